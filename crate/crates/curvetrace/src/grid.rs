//! Meshes, grid functions, quadrature, the discrete Dirichlet Laplacian,
//! and the harmonic decomposition u = xi f + U.
//!
//! Domains are a 1D interval or a 2D rectangle discretized by uniform
//! finite differences. Fields store interior nodes only; the Dirichlet
//! boundary value 0 is implicit, which keeps all linear algebra square.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::linalg::DenseMatrix;
use crate::{Error, Result};

/// Domain and resolution of a grid.
#[derive(Clone, Debug, PartialEq)]
pub enum GridSpec {
    /// Interval (0, length) with `nodes` interior points.
    Interval { length: f64, nodes: usize },
    /// Rectangle (0, width) x (0, height) with `nodes_x` x `nodes_y`
    /// interior points.
    Rectangle {
        width: f64,
        height: f64,
        nodes_x: usize,
        nodes_y: usize,
    },
}

impl GridSpec {
    /// Spatial dimension, 1 or 2.
    pub fn dimension(&self) -> usize {
        match self {
            GridSpec::Interval { .. } => 1,
            GridSpec::Rectangle { .. } => 2,
        }
    }
}

/// Discretized domain: mesh spacings, interior node layout, and the
/// uniform quadrature weight h^d per interior node.
#[derive(Debug)]
pub struct Grid {
    spec: GridSpec,
    nx: usize,
    ny: usize,
    hx: f64,
    hy: f64,
    weight: f64,
}

/// Builds a grid, validating the [`GridSpec`] invariants.
///
/// # Errors
///
/// [`Error::InvalidGridSpec`] for non-positive or non-finite extents, or
/// fewer than 3 interior nodes on any axis.
pub fn build_grid(spec: GridSpec) -> Result<Arc<Grid>> {
    let check_extent = |name: &str, v: f64| -> Result<()> {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::InvalidGridSpec(alloc::format!(
                "{name} must be positive and finite, got {v}"
            )));
        }
        Ok(())
    };
    let check_nodes = |name: &str, n: usize| -> Result<()> {
        if n < 3 {
            return Err(Error::InvalidGridSpec(alloc::format!(
                "{name} must be at least 3, got {n}"
            )));
        }
        Ok(())
    };
    let (nx, ny, hx, hy) = match &spec {
        GridSpec::Interval { length, nodes } => {
            check_extent("length", *length)?;
            check_nodes("nodes", *nodes)?;
            (*nodes, 1, length / (*nodes as f64 + 1.0), 0.0)
        }
        GridSpec::Rectangle { width, height, nodes_x, nodes_y } => {
            check_extent("width", *width)?;
            check_extent("height", *height)?;
            check_nodes("nodes_x", *nodes_x)?;
            check_nodes("nodes_y", *nodes_y)?;
            (
                *nodes_x,
                *nodes_y,
                width / (*nodes_x as f64 + 1.0),
                height / (*nodes_y as f64 + 1.0),
            )
        }
    };
    let weight = if spec.dimension() == 1 { hx } else { hx * hy };
    Ok(Arc::new(Grid { spec, nx, ny, hx, hy, weight }))
}

impl Grid {
    /// The spec this grid was built from.
    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    /// Spatial dimension, 1 or 2.
    pub fn dimension(&self) -> usize {
        self.spec.dimension()
    }

    /// Number of interior nodes.
    pub fn interior_count(&self) -> usize {
        self.nx * self.ny
    }

    /// Interior nodes per axis; ny = 1 in 1D.
    pub fn shape(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }

    /// Mesh spacings per axis; hy = 0 in 1D.
    pub fn spacing(&self) -> (f64, f64) {
        (self.hx, self.hy)
    }

    /// Quadrature weight per interior node (h in 1D, hx hy in 2D).
    pub fn quad_weight(&self) -> f64 {
        self.weight
    }

    /// Coordinates of interior node `idx` (lexicographic, x fastest);
    /// y = 0 in 1D.
    pub fn coord(&self, idx: usize) -> (f64, f64) {
        let i = idx % self.nx;
        let j = idx / self.nx;
        (
            (i as f64 + 1.0) * self.hx,
            if self.ny == 1 { 0.0 } else { (j as f64 + 1.0) * self.hy },
        )
    }

    fn same_as(&self, other: &Grid) -> bool {
        core::ptr::eq(self, other) || self.spec == other.spec
    }
}

/// Real-valued grid function on interior nodes; boundary values are
/// implicitly zero.
#[derive(Clone, Debug)]
pub struct Field {
    grid: Arc<Grid>,
    values: Vec<f64>,
}

impl Field {
    /// All-zero field.
    pub fn zeros(grid: &Arc<Grid>) -> Field {
        Field { grid: grid.clone(), values: vec![0.0; grid.interior_count()] }
    }

    /// Constant field.
    pub fn constant(grid: &Arc<Grid>, c: f64) -> Field {
        Field { grid: grid.clone(), values: vec![c; grid.interior_count()] }
    }

    /// Field sampled from a coordinate function (y = 0 in 1D).
    pub fn from_fn(grid: &Arc<Grid>, mut f: impl FnMut(f64, f64) -> f64) -> Field {
        let values = (0..grid.interior_count())
            .map(|idx| {
                let (x, y) = grid.coord(idx);
                f(x, y)
            })
            .collect();
        Field { grid: grid.clone(), values }
    }

    /// Field from explicit nodal values.
    ///
    /// # Errors
    ///
    /// [`Error::InvalidArgument`] when the length does not match the grid.
    pub fn from_values(grid: &Arc<Grid>, values: Vec<f64>) -> Result<Field> {
        if values.len() != grid.interior_count() {
            return Err(Error::InvalidArgument(alloc::format!(
                "field has {} values, grid has {} interior nodes",
                values.len(),
                grid.interior_count()
            )));
        }
        Ok(Field { grid: grid.clone(), values })
    }

    /// The grid this field lives on.
    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    /// Nodal values.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Mutable nodal values.
    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    /// Number of interior nodes.
    pub fn len(&self) -> usize {
        self.values.len()
    }

    /// True when the field has no nodes (never, for a valid grid).
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Smallest nodal value.
    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Largest nodal value.
    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Largest absolute nodal value.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Pointwise map.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field {
        Field {
            grid: self.grid.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// self + c * other.
    pub fn add_scaled(&self, c: f64, other: &Field) -> Field {
        debug_assert!(self.grid.same_as(&other.grid));
        Field {
            grid: self.grid.clone(),
            values: self
                .values
                .iter()
                .zip(other.values.iter())
                .map(|(a, b)| a + c * b)
                .collect(),
        }
    }

    /// self += c * other.
    pub fn add_scaled_mut(&mut self, c: f64, other: &Field) {
        debug_assert!(self.grid.same_as(&other.grid));
        for (a, b) in self.values.iter_mut().zip(other.values.iter()) {
            *a += c * b;
        }
    }

    /// c * self.
    pub fn scaled(&self, c: f64) -> Field {
        self.map(|v| c * v)
    }

    /// Quadrature L2 norm, sqrt(<u,u>).
    pub fn norm_quad(&self) -> f64 {
        libm::sqrt(inner_product_unchecked(self, self))
    }

    /// Quadrature L2 distance to another field.
    pub fn distance_quad(&self, other: &Field) -> f64 {
        debug_assert!(self.grid.same_as(&other.grid));
        let w = self.grid.quad_weight();
        let s: f64 = self
            .values
            .iter()
            .zip(other.values.iter())
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        libm::sqrt(w * s)
    }
}

/// Quadrature inner product <u, v> = h^d sum_i u_i v_i.
///
/// # Errors
///
/// [`Error::GridMismatch`] when the fields live on different grids.
pub fn inner_product(u: &Field, v: &Field) -> Result<f64> {
    if !u.grid.same_as(&v.grid) {
        return Err(Error::GridMismatch);
    }
    Ok(inner_product_unchecked(u, v))
}

pub(crate) fn inner_product_unchecked(u: &Field, v: &Field) -> f64 {
    let s: f64 = u.values.iter().zip(v.values.iter()).map(|(a, b)| a * b).sum();
    u.grid.quad_weight() * s
}

/// Splits u = xi f + U with <U, f> = 0, returning (xi, U).
///
/// xi = <u,f>/<f,f> is the generalized first harmonic of u with respect
/// to the weight f.
///
/// # Errors
///
/// [`Error::ZeroField`] when f is identically zero;
/// [`Error::GridMismatch`] for mismatched grids.
pub fn project_harmonic(u: &Field, f: &Field) -> Result<(f64, Field)> {
    let norm_sq = inner_product(f, f)?;
    if norm_sq == 0.0 {
        return Err(Error::ZeroField("weight f"));
    }
    let xi = inner_product_unchecked(u, f) / norm_sq;
    let cap_u = u.add_scaled(-xi, f);
    Ok((xi, cap_u))
}

/// One-sided outward normal-derivative proxies at every boundary-adjacent
/// node: (0 - u_adjacent)/h along the outward axis. Strictly negative for
/// positive fields decaying to the boundary.
pub fn outward_normal_proxies(u: &Field) -> Vec<f64> {
    let grid = u.grid();
    let (nx, ny) = grid.shape();
    let (hx, hy) = grid.spacing();
    let v = u.values();
    let mut proxies = Vec::new();
    if grid.dimension() == 1 {
        proxies.push(-v[0] / hx);
        proxies.push(-v[nx - 1] / hx);
        return proxies;
    }
    for j in 0..ny {
        proxies.push(-v[j * nx] / hx);
        proxies.push(-v[j * nx + nx - 1] / hx);
    }
    for i in 0..nx {
        proxies.push(-v[i] / hy);
        proxies.push(-v[(ny - 1) * nx + i] / hy);
    }
    proxies
}

/// The discrete Dirichlet Laplacian, stored as its stencil: A = -Delta_h
/// is symmetric positive definite with the 3-point (1D) or 5-point (2D)
/// stencil on the grid.
#[derive(Clone, Debug)]
pub struct LaplacianOp {
    grid: Arc<Grid>,
    cx: f64,
    cy: f64,
}

/// Assembles the negative discrete Laplacian A = -Delta_h for a grid.
pub fn build_laplacian(grid: &Arc<Grid>) -> LaplacianOp {
    let (hx, hy) = grid.spacing();
    let cx = 1.0 / (hx * hx);
    let cy = if grid.dimension() == 2 { 1.0 / (hy * hy) } else { 0.0 };
    LaplacianOp { grid: grid.clone(), cx, cy }
}

impl LaplacianOp {
    /// The grid the operator acts on.
    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    /// Diagonal entry of A (constant across nodes).
    pub fn diagonal(&self) -> f64 {
        2.0 * self.cx + 2.0 * self.cy
    }

    /// Infinity norm of A (largest row sum of absolute values).
    pub fn inf_norm(&self) -> f64 {
        2.0 * (self.diagonal())
    }

    /// A u on raw slices.
    pub fn apply_slice(&self, u: &[f64], out: &mut [f64]) {
        let (nx, ny) = self.grid.shape();
        debug_assert_eq!(u.len(), nx * ny);
        let diag = self.diagonal();
        for j in 0..ny {
            let row = j * nx;
            for i in 0..nx {
                let idx = row + i;
                let mut s = diag * u[idx];
                if i > 0 {
                    s -= self.cx * u[idx - 1];
                }
                if i + 1 < nx {
                    s -= self.cx * u[idx + 1];
                }
                if j > 0 {
                    s -= self.cy * u[idx - nx];
                }
                if j + 1 < ny {
                    s -= self.cy * u[idx + nx];
                }
                out[idx] = s;
            }
        }
    }

    /// A u as a field.
    pub fn apply(&self, u: &Field) -> Field {
        debug_assert!(self.grid.same_as(u.grid()));
        let mut out = Field::zeros(&self.grid);
        let values = u.values().to_vec();
        self.apply_slice(&values, out.values_mut());
        out
    }

    /// Discrete Dirichlet energy <A u, u> (quadrature-weighted).
    pub fn energy(&self, u: &Field) -> f64 {
        inner_product_unchecked(&self.apply(u), u)
    }

    /// Dense assembly of A, for direct factorizations.
    pub fn assemble_dense(&self) -> DenseMatrix {
        let (nx, ny) = self.grid.shape();
        let n = nx * ny;
        let mut m = DenseMatrix::zeros(n);
        let diag = self.diagonal();
        for j in 0..ny {
            for i in 0..nx {
                let idx = j * nx + i;
                *m.at_mut(idx, idx) = diag;
                if i > 0 {
                    *m.at_mut(idx, idx - 1) = -self.cx;
                }
                if i + 1 < nx {
                    *m.at_mut(idx, idx + 1) = -self.cx;
                }
                if j > 0 {
                    *m.at_mut(idx, idx - nx) = -self.cy;
                }
                if j + 1 < ny {
                    *m.at_mut(idx, idx + nx) = -self.cy;
                }
            }
        }
        m
    }
}

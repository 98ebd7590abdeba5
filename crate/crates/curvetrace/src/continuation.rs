//! The core engine: bordered linear solves, the harmonic-constrained
//! Newton corrector, the k-homotopy bootstrap, and the predictor-corrector
//! tracer for the solution curve mu = phi(xi).
//!
//! Everything here exploits one structural fact: with the derivative cap
//! g'(u) <= nu1 < nu, the linearized problem augmented by the harmonic
//! constraint row is invertible at every curve point, including turning
//! points of mu and the homotopy's starting coefficient q = lambda1 where
//! the unbordered operator itself is singular. xi is therefore a global
//! curve parameter and plain continuation in xi needs no arclength.

use alloc::vec;
use alloc::vec::Vec;

use crate::grid::{inner_product_unchecked, Field, LaplacianOp};
use crate::linalg::{DenseMatrix, LuFactors};
use crate::nonlinearity::NonlinearitySpec;
use crate::spectral::{SpectralData, WeightData};
use crate::{Error, Result};

/// Operator, spectral data, and weight bundled for the engine.
///
/// The paper-level operations take (A, f, nu, ...) separately; the context
/// carries them so call sites pass only what varies per call.
#[derive(Clone, Debug)]
pub struct Context {
    op: LaplacianOp,
    spectral: SpectralData,
    weight: WeightData,
    margin: f64,
}

impl Context {
    /// Bundles an operator with its spectral data and weight.
    ///
    /// # Errors
    ///
    /// [`Error::GridMismatch`] if the weight or eigenfunctions live on a
    /// different grid than the operator.
    pub fn new(op: LaplacianOp, spectral: SpectralData, weight: WeightData) -> Result<Self> {
        let grid = op.grid();
        if grid.spec() != spectral.phi1.grid().spec() || grid.spec() != weight.f.grid().spec() {
            return Err(Error::GridMismatch);
        }
        Ok(Context { op, spectral, weight, margin: 1e-8 })
    }

    /// Overrides the solvability margin used by the q < nu gate.
    pub fn with_margin(mut self, margin: f64) -> Self {
        self.margin = margin;
        self
    }

    /// The discrete operator A.
    pub fn op(&self) -> &LaplacianOp {
        &self.op
    }

    /// Leading eigenpairs.
    pub fn spectral(&self) -> &SpectralData {
        &self.spectral
    }

    /// Weight data (f, f1, <f,f>, nu).
    pub fn weight(&self) -> &WeightData {
        &self.weight
    }

    /// Solvability margin.
    pub fn margin(&self) -> f64 {
        self.margin
    }

    /// Solves the bordered system
    ///
    /// ```text
    ///   (-A + diag(q)) z - mu* f = rhs,    <z, f> = xi_rhs,
    /// ```
    ///
    /// the discrete form of the constrained linearized problem. The
    /// system is uniquely solvable whenever q < nu, even where
    /// -A + diag(q) itself is singular, so the whole (N+1) matrix is
    /// factorized at once; block elimination would degenerate exactly in
    /// the singular case.
    ///
    /// # Errors
    ///
    /// [`Error::SlopeCapViolation`] when max q > nu - margin (reported
    /// before solving); [`Error::SingularMatrix`] if factorization still
    /// fails, which signals a violated hypothesis.
    pub fn bordered_solve(&self, q: &Field, rhs: &Field, xi_rhs: f64) -> Result<(Field, f64)> {
        self.check_slope_cap(q)?;
        let system = BorderedSystem::assemble(&self.op, q, &self.weight.f)?;
        Ok(system.solve(rhs, xi_rhs))
    }

    fn check_slope_cap(&self, q: &Field) -> Result<()> {
        let max_q = q.max_value();
        let cap = self.weight.nu - self.margin;
        if max_q > cap {
            return Err(Error::SlopeCapViolation { max_q, cap });
        }
        Ok(())
    }

    /// Newton-corrects a point on the curve at fixed harmonic xi,
    /// starting from the orthogonal component `u_orth0` and `mu0`.
    ///
    /// Each iteration solves one bordered system with q = g'(u); the
    /// constraint row simultaneously drives <u, f> to xi <f, f>. After
    /// meeting the tolerance, `polish_steps` extra iterations push the
    /// residual toward the floating-point floor.
    ///
    /// # Errors
    ///
    /// [`Error::NewtonDiverged`] after the iteration cap or when damping
    /// cannot reduce the residual; [`Error::SlopeCapViolation`] if the
    /// iterate leaves the solvable region.
    pub fn newton_correct(
        &self,
        xi: f64,
        u_orth0: &Field,
        mu0: f64,
        g: &NonlinearitySpec,
        settings: &NewtonSettings,
    ) -> Result<CurvePoint> {
        self.newton_correct_counted(xi, u_orth0, mu0, g, settings)
            .map(|(point, _iters)| point)
    }

    /// Same as [`Context::newton_correct`] but also reports the Newton
    /// iteration count, which the tracer uses for step-size growth.
    fn newton_correct_counted(
        &self,
        xi: f64,
        u_orth0: &Field,
        mu0: f64,
        g: &NonlinearitySpec,
        settings: &NewtonSettings,
    ) -> Result<(CurvePoint, usize)> {
        let mut u = self.weight.f.scaled(xi);
        u.add_scaled_mut(1.0, u_orth0);
        let (u, mu, residual, iters) = self.newton_loop(xi, u, mu0, &PlainG { g }, settings)?;
        Ok((self.package_point(xi, u, mu, residual), iters))
    }

    /// Computes the curve tangent (U_xi, mu') at a converged point by one
    /// bordered solve with q = g'(u): the tangent u_xi satisfies
    /// (-A + diag(g'(u))) u_xi - mu' f = 0 with <u_xi, f> = <f, f>,
    /// and U_xi = u_xi - f.
    ///
    /// # Errors
    ///
    /// Propagates bordered-solve failures (slope cap, singularity).
    pub fn tangent(&self, p: &CurvePoint, g: &NonlinearitySpec) -> Result<Tangent> {
        let u = p.solution(&self.weight);
        let q = u.map(|v| g.dg(v));
        let zero = Field::zeros(self.op.grid());
        let (u_xi, mu_prime) = self.bordered_solve(&q, &zero, self.weight.norm_sq)?;
        let u_orth_xi = u_xi.add_scaled(-1.0, &self.weight.f);
        Ok(Tangent { u_orth_xi, mu_prime })
    }

    /// Bootstraps the first curve point at harmonic `xi0` by continuation
    /// in k of the embedded family
    ///
    /// ```text
    ///   Delta u + lambda1 u + k (g(u) - lambda1 u) = mu f,
    /// ```
    ///
    /// starting from the exact k = 0 solution u = a0 phi1, mu = 0 with
    /// a0 = xi0 <f,f> / <phi1, f>, and marching k to 1 with adaptive
    /// steps (halved on Newton failure).
    ///
    /// # Errors
    ///
    /// [`Error::StepUnderflow`] when the k-step falls below 1e-8 (the
    /// last good k is reported); Newton and bordered errors propagate.
    pub fn bootstrap_homotopy(
        &self,
        xi0: f64,
        g: &NonlinearitySpec,
        settings: &NewtonSettings,
    ) -> Result<CurvePoint> {
        let lambda1 = self.spectral.lambda1;
        let a0 = xi0 * self.weight.norm_sq / self.weight.f1;
        let mut u = self.spectral.phi1.scaled(a0);
        let mut mu = 0.0;
        let mut k: f64 = 0.0;
        let mut dk = 0.25;
        let mut prev: Option<(Field, f64, f64)> = None; // (u, mu, k) one step back
        let mut residual = 0.0;
        while k < 1.0 {
            let k_next = (k + dk).min(1.0);
            // Secant predictor across k when two accepted states exist.
            let (u_pred, mu_pred) = match &prev {
                Some((u_old, mu_old, k_old)) if k > *k_old => {
                    let r = (k_next - k) / (k - k_old);
                    let mut up = u.clone();
                    up.add_scaled_mut(r, &u.add_scaled(-1.0, u_old));
                    (up, mu + r * (mu - mu_old))
                }
                _ => (u.clone(), mu),
            };
            let blend = BlendG { g, lambda1, k: k_next };
            match self.newton_loop(xi0, u_pred, mu_pred, &blend, settings) {
                Ok((u_new, mu_new, res, iters)) => {
                    prev = Some((core::mem::replace(&mut u, u_new), mu, k));
                    mu = mu_new;
                    k = k_next;
                    residual = res;
                    if iters <= settings.fast_iters() {
                        dk = (dk * 1.5).min(0.25);
                    }
                }
                Err(Error::NewtonDiverged { .. }) => {
                    dk *= 0.5;
                    if dk < 1e-8 {
                        return Err(Error::StepUnderflow { parameter: "k", last_good: k });
                    }
                }
                Err(other) => return Err(other),
            }
        }
        Ok(self.package_point(xi0, u, mu, residual))
    }

    /// Traces the solution curve over [xi_min, xi_max]: bootstraps at the
    /// control's anchor, then marches both directions with an Euler
    /// predictor along the tangent and Newton correction, adapting the
    /// step scale (halve on failure, grow on fast convergence).
    ///
    /// Persistent corrector failure at the step floor truncates the curve
    /// and sets the corresponding flag instead of erroring.
    ///
    /// # Errors
    ///
    /// [`Error::InvalidArgument`] unless xi_min < xi_max; bootstrap and
    /// tangent errors propagate.
    pub fn trace_curve(
        &self,
        xi_min: f64,
        xi_max: f64,
        g: &NonlinearitySpec,
        control: &StepControl,
    ) -> Result<SolutionCurve> {
        if !(xi_min < xi_max) {
            return Err(Error::InvalidArgument(alloc::format!(
                "xi range is empty: [{xi_min}, {xi_max}]"
            )));
        }
        let anchor = control.anchor.clamp(xi_min, xi_max);
        let first = self.bootstrap_homotopy(anchor, g, &control.newton)?;
        self.trace_from(first, xi_min, xi_max, g, control)
    }

    /// Traces the curve over [xi_min, xi_max] starting from an already
    /// converged anchor point instead of the homotopy bootstrap; used
    /// when a solution is known in advance (the fishing model's positive
    /// state at mu = 0).
    ///
    /// # Errors
    ///
    /// [`Error::InvalidArgument`] unless xi_min <= anchor.xi <= xi_max
    /// and xi_min < xi_max; tangent errors propagate.
    pub fn trace_from(
        &self,
        mut anchor: CurvePoint,
        xi_min: f64,
        xi_max: f64,
        g: &NonlinearitySpec,
        control: &StepControl,
    ) -> Result<SolutionCurve> {
        if !(xi_min < xi_max) || anchor.xi < xi_min || anchor.xi > xi_max {
            return Err(Error::InvalidArgument(alloc::format!(
                "anchor xi {} outside trace range [{xi_min}, {xi_max}]",
                anchor.xi
            )));
        }
        if anchor.tangent.is_none() {
            anchor.tangent = Some(self.tangent(&anchor, g)?);
        }

        let (right, truncated_right) = self.march(&anchor, xi_max, g, control)?;
        let (left, truncated_left) = self.march(&anchor, xi_min, g, control)?;

        let mut points: Vec<CurvePoint> = left.into_iter().rev().collect();
        points.push(anchor);
        points.extend(right);
        let growth = fit_growth_envelope(&points);
        Ok(SolutionCurve {
            points,
            truncated_left,
            truncated_right,
            growth,
            classification: None,
        })
    }

    /// Marches from `start` toward `target` xi; returns accepted points in
    /// marching order and whether the trace was truncated by step
    /// underflow.
    fn march(
        &self,
        start: &CurvePoint,
        target: f64,
        g: &NonlinearitySpec,
        control: &StepControl,
    ) -> Result<(Vec<CurvePoint>, bool)> {
        let mut points = Vec::new();
        let mut current = start.clone();
        let mut scale = control.base_step;
        let direction = if target >= start.xi { 1.0 } else { -1.0 };
        loop {
            let remaining = (target - current.xi) * direction;
            if remaining <= 0.0 {
                break;
            }
            let step = (scale * (1.0 + current.xi.abs())).min(remaining);
            let xi_next = if step == remaining { target } else { current.xi + direction * step };
            let tangent = current.tangent.as_ref().expect("accepted points carry tangents");
            let dxi = xi_next - current.xi;
            let u_orth_pred = current.u_orth.add_scaled(dxi, &tangent.u_orth_xi);
            let mu_pred = current.mu + dxi * tangent.mu_prime;
            match self.newton_correct_counted(xi_next, &u_orth_pred, mu_pred, g, &control.newton) {
                Ok((mut point, iters)) => {
                    point.tangent = Some(self.tangent(&point, g)?);
                    points.push(point.clone());
                    current = point;
                    if iters <= control.newton.fast_iters() {
                        scale = (scale * control.growth).min(control.max_scale);
                    }
                }
                Err(Error::NewtonDiverged { .. }) => {
                    scale *= 0.5;
                    if scale < control.min_scale {
                        return Ok((points, true));
                    }
                }
                Err(other) => return Err(other),
            }
        }
        Ok((points, false))
    }

    /// Wraps a converged (u, mu) into a CurvePoint at harmonic xi.
    fn package_point(&self, xi: f64, u: Field, mu: f64, residual: f64) -> CurvePoint {
        let min_u = u.min_value();
        let max_u = u.max_value();
        let u_orth = u.add_scaled(-xi, &self.weight.f);
        CurvePoint { xi, mu, u_orth, residual, tangent: None, min_u, max_u }
    }

    /// Damped Newton on (u, mu) at fixed harmonic xi for a general
    /// (possibly homotopy-blended) nonlinearity. Returns the converged
    /// full solution u, mu, the final residual norm, and iterations used.
    fn newton_loop(
        &self,
        xi: f64,
        mut u: Field,
        mut mu: f64,
        g: &dyn GEval,
        settings: &NewtonSettings,
    ) -> Result<(Field, f64, f64, usize)> {
        let f = &self.weight.f;
        let target = xi * self.weight.norm_sq;
        let f_norm = libm::sqrt(self.weight.norm_sq);
        let mut residual_field = self.pde_residual(&u, mu, g);
        let mut res_norm = residual_field.norm_quad();
        let mut polish_left = settings.polish_steps;
        for iter in 1..=settings.max_iter {
            let tol = settings.tol * (1.0 + mu.abs()) * f_norm;
            if res_norm <= tol {
                if polish_left == 0 {
                    return Ok((u, mu, res_norm, iter - 1));
                }
                polish_left -= 1;
            }
            let q = u.map(|v| g.dg(v));
            self.check_slope_cap(&q)?;
            let system = BorderedSystem::assemble(&self.op, &q, f)?;
            let neg_res = residual_field.scaled(-1.0);
            let constraint_gap = target - inner_product_unchecked(&u, f);
            let (w, m) = system.solve(&neg_res, constraint_gap);

            // Damping by halving until the residual decreases.
            let mut alpha = 1.0;
            let mut accepted = false;
            for _ in 0..=settings.max_halvings {
                let u_try = u.add_scaled(alpha, &w);
                let mu_try = mu + alpha * m;
                let r_try = self.pde_residual(&u_try, mu_try, g);
                let n_try = r_try.norm_quad();
                if n_try < res_norm * (1.0 - 1e-4 * alpha) || n_try <= tol {
                    u = u_try;
                    mu = mu_try;
                    residual_field = r_try;
                    res_norm = n_try;
                    accepted = true;
                    break;
                }
                alpha *= 0.5;
            }
            if !accepted {
                return Err(Error::NewtonDiverged {
                    xi,
                    mu,
                    residual: res_norm,
                    iterations: iter,
                });
            }
        }
        let tol = settings.tol * (1.0 + mu.abs()) * f_norm;
        if res_norm <= tol {
            return Ok((u, mu, res_norm, settings.max_iter));
        }
        Err(Error::NewtonDiverged {
            xi,
            mu,
            residual: res_norm,
            iterations: settings.max_iter,
        })
    }

    /// -A u + g(u) - mu f, the discrete PDE residual.
    fn pde_residual(&self, u: &Field, mu: f64, g: &dyn GEval) -> Field {
        let au = self.op.apply(u);
        let mut r = u.map(|v| g.g(v));
        r.add_scaled_mut(-1.0, &au);
        r.add_scaled_mut(-mu, &self.weight.f);
        r
    }
}

/// Evaluator abstraction so the homotopy blend and the plain nonlinearity
/// share one Newton loop.
trait GEval {
    fn g(&self, u: f64) -> f64;
    fn dg(&self, u: f64) -> f64;
}

struct PlainG<'a> {
    g: &'a NonlinearitySpec,
}

impl GEval for PlainG<'_> {
    fn g(&self, u: f64) -> f64 {
        self.g.g(u)
    }
    fn dg(&self, u: f64) -> f64 {
        self.g.dg(u)
    }
}

/// lambda1 u + k (g(u) - lambda1 u); evaluates g directly at k = 1.
struct BlendG<'a> {
    g: &'a NonlinearitySpec,
    lambda1: f64,
    k: f64,
}

impl GEval for BlendG<'_> {
    fn g(&self, u: f64) -> f64 {
        if self.k == 1.0 {
            self.g.g(u)
        } else {
            self.lambda1 * u + self.k * (self.g.g(u) - self.lambda1 * u)
        }
    }
    fn dg(&self, u: f64) -> f64 {
        if self.k == 1.0 {
            self.g.dg(u)
        } else {
            self.lambda1 + self.k * (self.g.dg(u) - self.lambda1)
        }
    }
}

/// The assembled and factorized bordered matrix
/// [[-A + diag(q), -f], [h^d f^T, 0]].
pub struct BorderedSystem {
    factors: LuFactors,
    n: usize,
}

impl BorderedSystem {
    /// Assembles and factorizes the bordered matrix.
    ///
    /// # Errors
    ///
    /// [`Error::SingularMatrix`] when factorization fails; under the
    /// hypothesis q < nu this cannot happen, so a failure here signals a
    /// violated hypothesis at the call site.
    pub fn assemble(op: &LaplacianOp, q: &Field, f: &Field) -> Result<Self> {
        let grid = op.grid();
        let n = grid.interior_count();
        let (nx, ny) = grid.shape();
        let (hx, hy) = grid.spacing();
        let cx = 1.0 / (hx * hx);
        let cy = if grid.dimension() == 2 { 1.0 / (hy * hy) } else { 0.0 };
        let diag = 2.0 * cx + 2.0 * cy;
        let w = grid.quad_weight();
        let mut m = DenseMatrix::zeros(n + 1);
        let qv = q.values();
        let fv = f.values();
        for j in 0..ny {
            for i in 0..nx {
                let idx = j * nx + i;
                *m.at_mut(idx, idx) = qv[idx] - diag;
                if i > 0 {
                    *m.at_mut(idx, idx - 1) = cx;
                }
                if i + 1 < nx {
                    *m.at_mut(idx, idx + 1) = cx;
                }
                if j > 0 {
                    *m.at_mut(idx, idx - nx) = cy;
                }
                if j + 1 < ny {
                    *m.at_mut(idx, idx + nx) = cy;
                }
                *m.at_mut(idx, n) = -fv[idx];
                *m.at_mut(n, idx) = w * fv[idx];
            }
        }
        let factors = m.factorize()?;
        Ok(BorderedSystem { factors, n })
    }

    /// Solves the bordered system for right-hand side (rhs, xi_rhs),
    /// returning (z, mu*).
    pub fn solve(&self, rhs: &Field, xi_rhs: f64) -> (Field, f64) {
        let mut b = vec![0.0; self.n + 1];
        b[..self.n].copy_from_slice(rhs.values());
        b[self.n] = xi_rhs;
        let x = self.factors.solve(&b);
        let mu_star = x[self.n];
        let mut z = Field::zeros(rhs.grid());
        z.values_mut().copy_from_slice(&x[..self.n]);
        (z, mu_star)
    }
}

/// Newton corrector settings.
#[derive(Clone, Copy, Debug)]
pub struct NewtonSettings {
    /// Residual tolerance factor; acceptance is tol (1+|mu|) ||f||.
    pub tol: f64,
    /// Iteration cap.
    pub max_iter: usize,
    /// Damping halvings per iteration.
    pub max_halvings: usize,
    /// Extra full steps after first acceptance, pushing the residual to
    /// the floating-point floor.
    pub polish_steps: usize,
}

impl NewtonSettings {
    fn fast_iters(&self) -> usize {
        4
    }
}

impl Default for NewtonSettings {
    fn default() -> Self {
        NewtonSettings { tol: 1e-10, max_iter: 25, max_halvings: 8, polish_steps: 1 }
    }
}

/// Step control for curve tracing.
#[derive(Clone, Copy, Debug)]
pub struct StepControl {
    /// Base step scale; the xi step is scale (1 + |xi|).
    pub base_step: f64,
    /// Floor for the adaptive scale; underflow truncates the trace.
    pub min_scale: f64,
    /// Cap for the adaptive scale.
    pub max_scale: f64,
    /// Growth factor applied after fast-converging steps.
    pub growth: f64,
    /// Bootstrap anchor harmonic.
    pub anchor: f64,
    /// Corrector settings.
    pub newton: NewtonSettings,
}

impl Default for StepControl {
    fn default() -> Self {
        StepControl {
            base_step: 0.05,
            min_scale: 1e-8,
            max_scale: 0.05,
            growth: 1.5,
            anchor: 0.0,
            newton: NewtonSettings::default(),
        }
    }
}

/// Tangent data at a curve point: U_xi (orthogonal part of u_xi) and mu'.
#[derive(Clone, Debug)]
pub struct Tangent {
    /// U_xi = u_xi - f, orthogonal to f.
    pub u_orth_xi: Field,
    /// dmu/dxi.
    pub mu_prime: f64,
}

impl Tangent {
    /// The full tangent u_xi = f + U_xi.
    pub fn u_xi(&self, weight: &WeightData) -> Field {
        self.u_orth_xi.add_scaled(1.0, &weight.f)
    }
}

/// One converged point of the solution curve.
#[derive(Clone, Debug)]
pub struct CurvePoint {
    /// Generalized first harmonic of u.
    pub xi: f64,
    /// Forcing amplitude.
    pub mu: f64,
    /// Orthogonal component U of u = xi f + U, <U, f> = 0.
    pub u_orth: Field,
    /// Quadrature norm of the PDE residual at acceptance.
    pub residual: f64,
    /// Curve tangent, when computed.
    pub tangent: Option<Tangent>,
    /// Smallest nodal value of u.
    pub min_u: f64,
    /// Largest nodal value of u.
    pub max_u: f64,
}

impl CurvePoint {
    /// Reconstructs the full solution u = xi f + U.
    pub fn solution(&self, weight: &WeightData) -> Field {
        self.u_orth.add_scaled(self.xi, &weight.f)
    }
}

/// Least-squares linear envelope |mu| <= c1 |xi| + c2 over a trace.
#[derive(Clone, Copy, Debug)]
pub struct GrowthFit {
    /// Envelope slope.
    pub c1: f64,
    /// Envelope intercept, lifted so every traced point satisfies the
    /// bound.
    pub c2: f64,
    /// min over points of c1 |xi| + c2 - |mu|; nonnegative up to roundoff.
    pub min_slack: f64,
}

/// An ordered solution curve with diagnostics.
#[derive(Clone, Debug)]
pub struct SolutionCurve {
    /// Points in strictly increasing xi order.
    pub points: Vec<CurvePoint>,
    /// True when the left march stopped at the step floor before xi_min.
    pub truncated_left: bool,
    /// True when the right march stopped at the step floor before xi_max.
    pub truncated_right: bool,
    /// Linear growth envelope fitted over the trace.
    pub growth: GrowthFit,
    /// Classification attached by the analysis layer, when computed.
    pub classification: Option<crate::analysis::CurveClassification>,
}

impl SolutionCurve {
    /// Number of points.
    pub fn len(&self) -> usize {
        self.points.len()
    }

    /// True when the trace is empty.
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// The traced point whose xi is nearest to the query.
    pub fn point_nearest(&self, xi: f64) -> &CurvePoint {
        self.points
            .iter()
            .min_by(|a, b| {
                let da = (a.xi - xi).abs();
                let db = (b.xi - xi).abs();
                da.partial_cmp(&db).expect("xi distances are comparable")
            })
            .expect("curve has at least one point")
    }
}

/// Fits the least-squares line through (|xi|, |mu|) and lifts the
/// intercept so the envelope covers every point.
fn fit_growth_envelope(points: &[CurvePoint]) -> GrowthFit {
    if points.len() < 2 {
        let c2 = points.first().map_or(0.0, |p| p.mu.abs());
        return GrowthFit { c1: 0.0, c2, min_slack: 0.0 };
    }
    let n = points.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for p in points {
        let x = p.xi.abs();
        let y = p.mu.abs();
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    let denom = n * sxx - sx * sx;
    let c1 = if denom.abs() > 0.0 { (n * sxy - sx * sy) / denom } else { 0.0 };
    let mut c2 = (sy - c1 * sx) / n;
    let max_violation = points
        .iter()
        .map(|p| p.mu.abs() - (c1 * p.xi.abs() + c2))
        .fold(f64::NEG_INFINITY, f64::max);
    if max_violation > 0.0 {
        c2 += max_violation;
    }
    let min_slack = points
        .iter()
        .map(|p| c1 * p.xi.abs() + c2 - p.mu.abs())
        .fold(f64::INFINITY, f64::min);
    GrowthFit { c1, c2, min_slack }
}

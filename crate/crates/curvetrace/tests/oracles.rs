//! Independent oracles for the production numerics.
//!
//! Everything here checks the library against a second route that shares no
//! code with it: closed-form tridiagonal spectra, nalgebra's dense solvers,
//! and cold-start unconstrained Newton. nalgebra is a dev-dependency only;
//! the production crate never links it.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use curvetrace::analysis::oracle_solutions;
use curvetrace::antimax::solve_linear_at;
use curvetrace::continuation::{Context, StepControl};
use curvetrace::grid::{build_grid, build_laplacian, Field, Grid, GridSpec, LaplacianOp};
use curvetrace::nonlinearity::make_softplus_family;
use curvetrace::spectral::{compute_eigenpairs, compute_nu};

/// Closed-form eigenvalue of the 1D second-difference stencil on (0, L)
/// with n interior nodes: (2/h^2)(1 - cos(k pi / (n+1))).
fn tridiag_lambda(length: f64, nodes: usize, k: usize) -> f64 {
    let h = length / (nodes as f64 + 1.0);
    2.0 / (h * h) * (1.0 - (k as f64 * PI / (nodes as f64 + 1.0)).cos())
}

fn interval_op(length: f64, nodes: usize) -> (Arc<Grid>, LaplacianOp) {
    let grid = build_grid(GridSpec::Interval { length, nodes }).unwrap();
    let op = build_laplacian(&grid);
    (grid, op)
}

#[test]
fn spectrum_matches_closed_form_1d() {
    for (length, nodes) in [(PI, 50), (PI, 99), (1.0, 200), (2.5, 128)] {
        let (grid, op) = interval_op(length, nodes);
        let sd = compute_eigenpairs(&op, 2).unwrap();
        for (k, lambda) in [(1, sd.lambda1), (2, sd.lambda2)] {
            let exact = tridiag_lambda(length, nodes, k);
            let rel = (lambda - exact).abs() / exact;
            assert!(rel < 1e-10, "L={length} n={nodes} k={k}: rel err {rel:.3e}");
        }
        // The discrete eigenvectors are exact sine samples; compare after
        // matching the quadrature normalization and the sign convention.
        let h = length / (nodes as f64 + 1.0);
        let scale = (2.0 / ((nodes as f64 + 1.0) * h)).sqrt();
        for (k, phi) in [(1usize, &sd.phi1), (2, &sd.phi2)] {
            let exact = Field::from_fn(&grid, |x, _| scale * (k as f64 * PI * x / length).sin());
            let sign = if phi.values()[0] * exact.values()[0] < 0.0 { -1.0 } else { 1.0 };
            let err = phi.add_scaled(-sign, &exact).max_abs();
            assert!(err < 1e-9, "L={length} n={nodes} k={k}: vector sup err {err:.3e}");
        }
    }
}

#[test]
fn spectrum_matches_closed_form_2d_rectangle() {
    // Non-square rectangle so the second eigenvalue is simple; the square
    // (degenerate) case is exercised by the acceptance suite.
    let grid = build_grid(GridSpec::Rectangle {
        width: PI,
        height: 1.4 * PI,
        nodes_x: 14,
        nodes_y: 9,
    })
    .unwrap();
    let op = build_laplacian(&grid);
    let sd = compute_eigenpairs(&op, 2).unwrap();
    let axis_x = |k: usize| tridiag_lambda(PI, 14, k);
    let axis_y = |k: usize| tridiag_lambda(1.4 * PI, 9, k);
    let exact1 = axis_x(1) + axis_y(1);
    let mut sums: Vec<f64> = Vec::new();
    for kx in 1..=3 {
        for ky in 1..=3 {
            sums.push(axis_x(kx) + axis_y(ky));
        }
    }
    sums.sort_by(f64::total_cmp);
    let exact2 = sums[1];
    let rel1 = (sd.lambda1 - exact1).abs() / exact1;
    let rel2 = (sd.lambda2 - exact2).abs() / exact2;
    assert!(rel1 < 1e-10, "2d lambda1 rel err {rel1:.3e}");
    assert!(rel2 < 1e-10, "2d lambda2 rel err {rel2:.3e}");
}

/// Dense symmetric assembly of A = -Laplacian_h for nalgebra, built from the
/// raw stencil rather than the library's assembler.
fn stencil_matrix(grid: &Arc<Grid>) -> DMatrix<f64> {
    let n = grid.interior_count();
    let (hx, hy) = grid.spacing();
    let (nx, _) = grid.shape();
    let mut m = DMatrix::<f64>::zeros(n, n);
    match grid.dimension() {
        1 => {
            let c = 1.0 / (hx * hx);
            for i in 0..n {
                m[(i, i)] = 2.0 * c;
                if i + 1 < n {
                    m[(i, i + 1)] = -c;
                    m[(i + 1, i)] = -c;
                }
            }
        }
        _ => {
            let cx = 1.0 / (hx * hx);
            let cy = 1.0 / (hy * hy);
            for i in 0..n {
                m[(i, i)] = 2.0 * cx + 2.0 * cy;
                if (i + 1) % nx != 0 {
                    m[(i, i + 1)] = -cx;
                    m[(i + 1, i)] = -cx;
                }
                if i + nx < n {
                    m[(i, i + nx)] = -cy;
                    m[(i + nx, i)] = -cy;
                }
            }
        }
    }
    m
}

#[test]
fn spectrum_matches_nalgebra_symmetric_eigen() {
    let cases: Vec<Arc<Grid>> = vec![
        build_grid(GridSpec::Interval { length: PI, nodes: 80 }).unwrap(),
        build_grid(GridSpec::Rectangle {
            width: 1.0,
            height: 1.7,
            nodes_x: 12,
            nodes_y: 9,
        })
        .unwrap(),
    ];
    for grid in cases {
        let op = build_laplacian(&grid);
        let sd = compute_eigenpairs(&op, 2).unwrap();
        let eig = SymmetricEigen::new(stencil_matrix(&grid));
        let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        vals.sort_by(f64::total_cmp);
        let rel1 = (sd.lambda1 - vals[0]).abs() / vals[0];
        let rel2 = (sd.lambda2 - vals[1]).abs() / vals[1];
        assert!(rel1 < 1e-9, "lambda1 vs nalgebra rel err {rel1:.3e}");
        assert!(rel2 < 1e-9, "lambda2 vs nalgebra rel err {rel2:.3e}");
    }
}

/// Bordered matrix in nalgebra form, filled from the raw stencil: the block
/// [[-A + diag(q), -f], [w_quad f^T, 0]].
fn bordered_matrix(grid: &Arc<Grid>, q: &[f64], f: &Field) -> DMatrix<f64> {
    let n = grid.interior_count();
    let mut m = DMatrix::<f64>::zeros(n + 1, n + 1);
    let a = stencil_matrix(grid);
    for i in 0..n {
        for j in 0..n {
            m[(i, j)] = -a[(i, j)];
        }
        m[(i, i)] += q[i];
        m[(i, n)] = -f.values()[i];
        m[(n, i)] = grid.quad_weight() * f.values()[i];
    }
    m
}

#[test]
fn bordered_solver_matches_nalgebra_dense() {
    let (grid, op) = interval_op(PI, 60);
    let sd = compute_eigenpairs(&op, 2).unwrap();
    let f = Field::constant(&grid, 1.0);
    let w = compute_nu(&sd, &f).unwrap();
    let nu = w.nu;
    let ctx = Context::new(op, sd, w).unwrap();
    let n = grid.interior_count();

    let mut rng = ChaCha8Rng::seed_from_u64(0x0B0A_5EED);
    for trial in 0..10 {
        let q: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..nu - 0.1)).collect();
        let rhs: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let xi_rhs: f64 = rng.gen_range(-1.0..1.0);
        let q_field = Field::from_values(&grid, q.clone()).unwrap();
        let rhs_field = Field::from_values(&grid, rhs.clone()).unwrap();
        let (z, mu_star) = ctx.bordered_solve(&q_field, &rhs_field, xi_rhs).unwrap();

        let m = bordered_matrix(&grid, &q, &ctx.weight().f);
        let mut b = DVector::<f64>::zeros(n + 1);
        for i in 0..n {
            b[i] = rhs[i];
        }
        b[n] = xi_rhs;
        let sol = m.lu().solve(&b).expect("dense bordered solve");
        let mut worst: f64 = (mu_star - sol[n]).abs();
        for i in 0..n {
            worst = worst.max((z.values()[i] - sol[i]).abs());
        }
        assert!(worst < 1e-9, "trial {trial}: max abs discrepancy {worst:.3e}");
    }
}

#[test]
fn bordered_solver_matches_nalgebra_in_singular_base_case() {
    // q identically lambda1 with f = phi1 makes the (1,1) block singular;
    // the bordered matrix stays invertible and both routes must agree.
    let (grid, op) = interval_op(PI, 60);
    let sd = compute_eigenpairs(&op, 2).unwrap();
    let f = sd.phi1.clone();
    let w = compute_nu(&sd, &f).unwrap();
    let lambda1 = sd.lambda1;
    let ctx = Context::new(op, sd, w).unwrap();
    let n = grid.interior_count();

    let mut rng = ChaCha8Rng::seed_from_u64(0xCA5E_0002);
    let q = vec![lambda1; n];
    let rhs: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let xi_rhs = 0.7;
    let q_field = Field::from_values(&grid, q.clone()).unwrap();
    let rhs_field = Field::from_values(&grid, rhs.clone()).unwrap();
    let (z, mu_star) = ctx.bordered_solve(&q_field, &rhs_field, xi_rhs).unwrap();

    let m = bordered_matrix(&grid, &q, &ctx.weight().f);
    let mut b = DVector::<f64>::zeros(n + 1);
    for i in 0..n {
        b[i] = rhs[i];
    }
    b[n] = xi_rhs;
    let sol = m.lu().solve(&b).expect("dense bordered solve");
    let mut worst: f64 = (mu_star - sol[n]).abs();
    for i in 0..n {
        worst = worst.max((z.values()[i] - sol[i]).abs());
    }
    assert!(worst < 1e-9, "singular-base case: max abs discrepancy {worst:.3e}");
}

#[test]
fn resolvent_matches_nalgebra_dense() {
    let (grid, op) = interval_op(PI, 80);
    let sd = compute_eigenpairs(&op, 2).unwrap();
    let f = Field::constant(&grid, 1.0);
    let n = grid.interior_count();
    let a = stencil_matrix(&grid);
    for lambda in [-3.0, 0.0, sd.lambda1 - 0.3, sd.lambda1 + 0.4, 0.5 * (sd.lambda1 + sd.lambda2)]
    {
        let u = solve_linear_at(&op, &sd, lambda, &f).unwrap();
        let mut m = -a.clone();
        for i in 0..n {
            m[(i, i)] += lambda;
        }
        let b = DVector::<f64>::from_row_slice(f.values());
        let sol = m.lu().solve(&b).expect("dense resolvent solve");
        let mut worst: f64 = 0.0;
        for i in 0..n {
            worst = worst.max((u.values()[i] - sol[i]).abs());
        }
        assert!(worst < 1e-10, "lambda {lambda}: max abs discrepancy {worst:.3e}");
    }
}

#[test]
fn continuation_point_agrees_with_cold_start_oracle() {
    // Dual-route check on a nonlinear problem: the constrained bordered path
    // and plain unconstrained Newton from cold amplitude starts must land on
    // the same solution set.
    let (grid, op) = interval_op(PI, 100);
    let sd = compute_eigenpairs(&op, 2).unwrap();
    let f = Field::constant(&grid, 1.0);
    let w = compute_nu(&sd, &f).unwrap();
    let lambda1 = sd.lambda1;
    let nu = w.nu;
    let ctx = Context::new(op, sd, w).unwrap();
    let g = make_softplus_family(-1.0, 0.5 * (lambda1 + nu)).unwrap();

    let curve = ctx.trace_curve(0.0, 3.0, &g, &StepControl::default()).unwrap();
    let p = curve.point_nearest(2.0);
    let u_full = p.solution(ctx.weight());
    let sols = oracle_solutions(
        ctx.op(),
        &ctx.weight().f,
        &ctx.spectral().phi1,
        p.mu,
        &g,
        41,
    );
    assert_eq!(sols.len(), 2, "expected both branches at mu = {}", p.mu);
    let nearest = sols
        .iter()
        .map(|s| s.distance_quad(&u_full))
        .fold(f64::INFINITY, f64::min);
    let bound = 1e-8 * (1.0 + u_full.norm_quad());
    assert!(nearest < bound, "nearest oracle solution at distance {nearest:.3e}");
}

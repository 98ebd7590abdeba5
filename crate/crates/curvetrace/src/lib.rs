//! Numerical continuation of global solution curves for the semilinear
//! elliptic problem `Delta u + g(u) = mu f(x)` with Dirichlet conditions,
//! discretized by finite differences on a 1D interval or 2D rectangle.
//!
//! The curve `mu = phi(xi)` is parametrized by the generalized first
//! harmonic `xi = <u,f>/<f,f>`, which is a global parameter: turning
//! points in `mu` are regular points in `xi`, so no arclength machinery
//! is needed. The crate provides
//!
//! - [`grid`]: meshes, grid functions, the discrete Dirichlet Laplacian,
//!   quadrature inner products, and the harmonic decomposition u = xi f + U;
//! - [`spectral`]: the leading eigenpairs (lambda1, phi1), (lambda2, phi2)
//!   and the weight constant nu of the generalized Poincare inequality;
//! - [`nonlinearity`]: validated C^2 families g(u) (softplus interpolant,
//!   logistic fishing model, linear);
//! - [`continuation`]: the bordered linear solver, harmonic-constrained
//!   Newton corrector, homotopy bootstrap, and predictor-corrector tracer;
//! - [`analysis`]: turning points, the second-derivative sign identity,
//!   curve classification, asymptotic slopes, and a multistart solution
//!   counting oracle;
//! - [`antimax`]: maximum/anti-maximum sign portraits for the linear
//!   problem and the estimation of the anti-maximum window delta_f;
//! - [`fishing`]: the logistic harvesting scenario end to end.
//!
//! The crate is `no_std` + `alloc`; all IO lives in the companion CLI.

#![cfg_attr(not(test), no_std)]
// Precondition guards are written `!(a < b)` on purpose: unlike `a >= b`,
// the negated form also rejects NaN arguments.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod analysis;
pub mod antimax;
pub mod continuation;
pub mod error;
pub mod fishing;
pub mod grid;
pub mod linalg;
pub mod nonlinearity;
pub mod spectral;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = core::result::Result<T, Error>;

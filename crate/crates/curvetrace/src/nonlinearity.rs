//! Validated C^2 nonlinearity families g(u).
//!
//! The solvability theory caps the derivative: g'(u) <= nu1 < nu, where nu
//! is the weight constant from [`crate::spectral`]. Each constructor
//! declares the exact supremum nu1 for its family; [`validate`] audits a
//! family against a concrete weight before any continuation run.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::spectral::WeightData;
use crate::{Error, Result};

/// Sign of g'' across the whole line.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Convexity {
    /// g'' >= 0 everywhere.
    Convex,
    /// g'' <= 0 everywhere.
    Concave,
    /// No constant sign is claimed (linear g).
    None,
}

/// Concrete family with its parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Family {
    /// g(u) = gamma1 u + (gamma2 - gamma1) ln(1 + e^u).
    Softplus { gamma1: f64, gamma2: f64 },
    /// Logistic harvesting model: g(u) = a u - b u^2 for u >= 0, with an
    /// exponential-relaxation extension of slope c for u < 0.
    Fishing { a: f64, b: f64, c: f64, tau: f64 },
    /// g(u) = gamma u.
    Linear { gamma: f64 },
}

/// Evaluators for g, g', g'' together with the declared asymptotic slopes
/// gamma1 (at -infinity), gamma2 (at +infinity), the derivative supremum
/// nu1, and the convexity tag.
///
/// For the fishing family gamma2 is -infinity (the quadratic has no
/// asymptotic slope); classification operations refuse non-finite slopes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NonlinearitySpec {
    family: Family,
    gamma1: f64,
    gamma2: f64,
    nu1: f64,
    convexity: Convexity,
}

/// ln(1 + e^u) computed without overflow: for u > 30 the tail ln(1+e^-u)
/// is replaced by e^-u (error below e^-60), for u < -30 by e^u.
fn softramp(u: f64) -> f64 {
    if u > 30.0 {
        u + libm::exp(-u)
    } else if u < -30.0 {
        libm::exp(u)
    } else {
        libm::log1p(libm::exp(u))
    }
}

/// Logistic sigmoid 1/(1 + e^-u), overflow-safe on both tails.
fn sigmoid(u: f64) -> f64 {
    if u >= 0.0 {
        1.0 / (1.0 + libm::exp(-u))
    } else {
        let e = libm::exp(u);
        e / (1.0 + e)
    }
}

impl NonlinearitySpec {
    /// g(u).
    pub fn g(&self, u: f64) -> f64 {
        match self.family {
            Family::Softplus { gamma1, gamma2 } => gamma1 * u + (gamma2 - gamma1) * softramp(u),
            Family::Fishing { a, b, c, tau } => {
                if u >= 0.0 {
                    (a - b * u) * u
                } else {
                    c * u - (c - a) * tau * (libm::exp(u / tau) - 1.0)
                }
            }
            Family::Linear { gamma } => gamma * u,
        }
    }

    /// g'(u).
    pub fn dg(&self, u: f64) -> f64 {
        match self.family {
            Family::Softplus { gamma1, gamma2 } => gamma1 + (gamma2 - gamma1) * sigmoid(u),
            Family::Fishing { a, b, c, tau } => {
                if u >= 0.0 {
                    a - 2.0 * b * u
                } else {
                    c - (c - a) * libm::exp(u / tau)
                }
            }
            Family::Linear { gamma } => gamma,
        }
    }

    /// g''(u).
    pub fn d2g(&self, u: f64) -> f64 {
        match self.family {
            Family::Softplus { gamma1, gamma2 } => {
                // s(1-s) via e^-|u|/(1+e^-|u|)^2; the naive product rounds
                // to zero already near |u| = 37 where s rounds to 1.
                let e = libm::exp(-u.abs());
                (gamma2 - gamma1) * e / ((1.0 + e) * (1.0 + e))
            }
            Family::Fishing { a, b, c, tau } => {
                if u >= 0.0 {
                    -2.0 * b
                } else {
                    -(c - a) / tau * libm::exp(u / tau)
                }
            }
            Family::Linear { .. } => 0.0,
        }
    }

    /// Asymptotic slope as u -> -infinity.
    pub fn gamma1(&self) -> f64 {
        self.gamma1
    }

    /// Asymptotic slope as u -> +infinity (-infinity for the fishing
    /// family, whose positive side is quadratic).
    pub fn gamma2(&self) -> f64 {
        self.gamma2
    }

    /// Declared supremum of g'.
    pub fn nu1(&self) -> f64 {
        self.nu1
    }

    /// Convexity tag.
    pub fn convexity(&self) -> Convexity {
        self.convexity
    }

    /// The underlying family and parameters.
    pub fn family(&self) -> &Family {
        &self.family
    }
}

/// Softplus interpolant g(u) = gamma1 u + (gamma2 - gamma1) ln(1 + e^u):
/// slope gamma1 at -infinity, gamma2 at +infinity, g'' of one sign
/// (that of gamma2 - gamma1), bounded deviations from both asymptotes.
///
/// # Errors
///
/// [`Error::InvalidArgument`] when gamma1 == gamma2 (use [`make_linear`])
/// or either slope is not finite.
pub fn make_softplus_family(gamma1: f64, gamma2: f64) -> Result<NonlinearitySpec> {
    if !gamma1.is_finite() || !gamma2.is_finite() {
        return Err(Error::InvalidArgument(String::from(
            "softplus slopes must be finite",
        )));
    }
    if gamma1 == gamma2 {
        return Err(Error::InvalidArgument(String::from(
            "softplus requires gamma1 != gamma2; use make_linear for equal slopes",
        )));
    }
    Ok(NonlinearitySpec {
        family: Family::Softplus { gamma1, gamma2 },
        gamma1,
        gamma2,
        nu1: gamma1.max(gamma2),
        convexity: if gamma2 > gamma1 { Convexity::Convex } else { Convexity::Concave },
    })
}

/// Logistic harvesting nonlinearity: g(u) = a u - b u^2 for u >= 0,
/// extended for u < 0 by the unique exponential relaxation
/// g(u) = c u - (c - a) tau (e^(u/tau) - 1), tau = (c - a)/(2b),
/// which matches value, slope, and curvature at 0 (so g is C^2 with
/// g(0) = 0, g'(0) = a, g''(0) = -2b), keeps g'' < 0 everywhere, and
/// approaches the asymptote c u + d with d = (c - a)^2/(2b) > 0.
///
/// The supremum of g' is c, approached as u -> -infinity.
///
/// # Errors
///
/// [`Error::InvalidArgument`] when b <= 0 or c <= a (global concavity
/// needs the -infinity slope above g'(0) = a), or parameters not finite.
pub fn make_fishing_family(a: f64, b: f64, c: f64) -> Result<NonlinearitySpec> {
    if !(a.is_finite() && b.is_finite() && c.is_finite()) {
        return Err(Error::InvalidArgument(String::from(
            "fishing parameters must be finite",
        )));
    }
    if b <= 0.0 {
        return Err(Error::InvalidArgument(format!("fishing requires b > 0, got b = {b}")));
    }
    if c <= a {
        return Err(Error::InvalidArgument(format!(
            "fishing requires c > a for a concave C^2 extension, got a = {a}, c = {c}"
        )));
    }
    let tau = (c - a) / (2.0 * b);
    Ok(NonlinearitySpec {
        family: Family::Fishing { a, b, c, tau },
        gamma1: c,
        gamma2: f64::NEG_INFINITY,
        nu1: c,
        convexity: Convexity::Concave,
    })
}

/// Linear nonlinearity g(u) = gamma u.
pub fn make_linear(gamma: f64) -> NonlinearitySpec {
    NonlinearitySpec {
        family: Family::Linear { gamma },
        gamma1: gamma,
        gamma2: gamma,
        nu1: gamma,
        convexity: Convexity::None,
    }
}

/// Outcome of auditing a nonlinearity against a weight.
#[derive(Clone, Debug)]
pub struct ValidationReport {
    /// True when every check passed.
    pub pass: bool,
    /// Human-readable failures, each naming the first offending u.
    pub failures: Vec<String>,
    /// sup |g(u) - gamma1 u| over sampled u in [-50, 0].
    pub sup_b1: f64,
    /// sup |g(u) - gamma2 u| over sampled u in [0, 50]; absent when
    /// gamma2 is not finite (fishing family).
    pub sup_b2: Option<f64>,
    /// The family's declared derivative cap.
    pub nu1: f64,
    /// The weight constant the cap is checked against.
    pub nu: f64,
}

const VALIDATE_SAMPLES: usize = 10_000;
const FD_STEP: f64 = 1e-4;
const FD_TOL: f64 = 1e-6;

/// Audits a nonlinearity against a weight: the slope cap nu1 < nu, the
/// consistency of g' and g'' with centered differences over u in
/// [-50, 50] (tolerance 1e-6, relative with unit floor), the cap
/// g' <= nu1 at every sample, the convexity sign, and the boundedness of
/// the asymptote deviations. Failures are reported, never panicked.
///
/// Samples are half-offset from the uniform grid so that no difference
/// stencil straddles a piecewise seam (the fishing family is C^2 but not
/// C^3 at u = 0, where a straddling stencil would see an O(step) error).
pub fn validate(spec: &NonlinearitySpec, w: &WeightData) -> ValidationReport {
    let mut failures = Vec::new();
    if !(spec.nu1 < w.nu) {
        failures.push(format!(
            "slope cap violated: nu1 = {} must be strictly below nu = {}",
            spec.nu1, w.nu
        ));
    }
    let mut sup_b1 = 0.0f64;
    let mut sup_b2 = 0.0f64;
    let mut first_dg_fail: Option<(f64, f64, f64)> = None;
    let mut first_d2g_fail: Option<(f64, f64, f64)> = None;
    let mut first_cap_fail: Option<(f64, f64)> = None;
    let mut first_sign_fail: Option<(f64, f64)> = None;
    for i in 0..VALIDATE_SAMPLES {
        let u = -50.0 + 100.0 * (i as f64 + 0.5) / (VALIDATE_SAMPLES as f64);
        let dg = spec.dg(u);
        let d2g = spec.d2g(u);
        let dg_fd = (spec.g(u + FD_STEP) - spec.g(u - FD_STEP)) / (2.0 * FD_STEP);
        if (dg_fd - dg).abs() > FD_TOL * dg.abs().max(1.0) && first_dg_fail.is_none() {
            first_dg_fail = Some((u, dg, dg_fd));
        }
        let d2g_fd = (spec.dg(u + FD_STEP) - spec.dg(u - FD_STEP)) / (2.0 * FD_STEP);
        if (d2g_fd - d2g).abs() > FD_TOL * d2g.abs().max(1.0) && first_d2g_fail.is_none() {
            first_d2g_fail = Some((u, d2g, d2g_fd));
        }
        if dg > spec.nu1 + 1e-12 * spec.nu1.abs().max(1.0) && first_cap_fail.is_none() {
            first_cap_fail = Some((u, dg));
        }
        let sign_ok = match spec.convexity {
            Convexity::Convex => d2g >= 0.0,
            Convexity::Concave => d2g <= 0.0,
            Convexity::None => true,
        };
        if !sign_ok && first_sign_fail.is_none() {
            first_sign_fail = Some((u, d2g));
        }
        if u <= 0.0 {
            sup_b1 = sup_b1.max((spec.g(u) - spec.gamma1 * u).abs());
        }
        if u >= 0.0 && spec.gamma2.is_finite() {
            sup_b2 = sup_b2.max((spec.g(u) - spec.gamma2 * u).abs());
        }
    }
    if let Some((u, dg, fd)) = first_dg_fail {
        failures.push(format!("g' inconsistent with FD of g at u = {u}: {dg} vs {fd}"));
    }
    if let Some((u, d2g, fd)) = first_d2g_fail {
        failures.push(format!("g'' inconsistent with FD of g' at u = {u}: {d2g} vs {fd}"));
    }
    if let Some((u, dg)) = first_cap_fail {
        failures.push(format!("g'(u) = {dg} exceeds declared nu1 = {} at u = {u}", spec.nu1));
    }
    if let Some((u, d2g)) = first_sign_fail {
        failures.push(format!(
            "g''(u) = {d2g} contradicts convexity tag {:?} at u = {u}",
            spec.convexity
        ));
    }
    ValidationReport {
        pass: failures.is_empty(),
        failures,
        sup_b1,
        sup_b2: if spec.gamma2.is_finite() { Some(sup_b2) } else { None },
        nu1: spec.nu1,
        nu: w.nu,
    }
}

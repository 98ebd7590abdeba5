//! Maximum and anti-maximum principle checks for the linear problem
//! Delta u + lambda u = f: sign portraits of the solution, and a
//! scan-plus-bisection estimate of the weight-dependent window
//! (lambda1, lambda1 + delta_f) on which the solution of the discrete
//! system stays strictly positive for positive f.

use alloc::vec::Vec;

use crate::grid::{outward_normal_proxies, Field, LaplacianOp};
use crate::spectral::SpectralData;
use crate::{Error, Result};

/// Verdict on the sign of a field over the interior.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SignVerdict {
    /// u > 0 at every interior node.
    StrictlyPositive,
    /// u < 0 at every interior node.
    StrictlyNegative,
    /// u changes sign or touches zero.
    Mixed,
}

impl SignVerdict {
    /// Stable machine-readable code used in reports.
    pub fn code(&self) -> &'static str {
        match self {
            SignVerdict::StrictlyPositive => "strictly-positive",
            SignVerdict::StrictlyNegative => "strictly-negative",
            SignVerdict::Mixed => "mixed",
        }
    }
}

impl core::fmt::Display for SignVerdict {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.code())
    }
}

/// Extrema, boundary normal-derivative proxies, and the sign verdict of
/// a field.
#[derive(Clone, Debug)]
pub struct SignPortrait {
    /// Smallest interior value.
    pub min_value: f64,
    /// Largest interior value.
    pub max_value: f64,
    /// One-sided outward differences at boundary-adjacent nodes; for a
    /// positive solution these approximate the negative outward normal
    /// derivative.
    pub normal_proxies: Vec<f64>,
    /// Sign verdict, strict at every interior node.
    pub verdict: SignVerdict,
}

/// Result of the delta_f scan for one weight.
#[derive(Clone, Debug)]
pub struct AntimaxReport {
    /// The weight the scan was run for.
    pub f: Field,
    /// Estimated width of the anti-maximum window above lambda1.
    pub delta_f: f64,
    /// Scanned (lambda, verdict) table in increasing lambda order.
    pub scan: Vec<(f64, SignVerdict)>,
    /// Final bracketing interval around the sign-loss threshold; for a
    /// capped report, (last scanned lambda, lambda2).
    pub bracket: (f64, f64),
    /// True when no sign loss occurred below lambda2 and delta_f was
    /// capped at lambda2 - lambda1.
    pub capped: bool,
    /// Bisection resolution the threshold was refined to.
    pub resolution: f64,
    /// Grid spacing, recorded so the h-dependence of the discrete
    /// estimate can be studied across runs.
    pub spacing: (f64, f64),
}

/// Margin around the discrete eigenvalues inside which the linear solve
/// is refused as ill-conditioned.
pub const EIGEN_EXCLUSION: f64 = 1e-8;

/// Solves the discrete form of Delta u + lambda u = f, i.e.
/// (lambda I - A) u = f, by a dense factorization with one round of
/// iterative refinement.
///
/// The residual is gated at 1e-11 ||f|| plus a conditioning floor of
/// 32 eps (||A||_inf + |lambda|) ||u||; near the resolvent poles the
/// solution norm grows like 1/dist(lambda, spec A) and the floor term
/// is what a backward-stable solve can actually deliver there.
///
/// # Errors
///
/// [`Error::NearEigenvalue`] when lambda is within 1e-8 of lambda1 or
/// lambda2, or when the gated residual check fails (which indicates
/// effective near-singularity beyond the tracked pair).
pub fn solve_linear_at(
    op: &LaplacianOp,
    spectral: &SpectralData,
    lambda: f64,
    f: &Field,
) -> Result<Field> {
    for eig in [spectral.lambda1, spectral.lambda2] {
        if (lambda - eig).abs() < EIGEN_EXCLUSION {
            return Err(Error::NearEigenvalue { lambda, eigenvalue: eig });
        }
    }
    let n = op.grid().interior_count();
    let a = op.assemble_dense();
    let mut m = crate::linalg::DenseMatrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            *m.at_mut(i, j) = -a.at(i, j);
        }
        *m.at_mut(i, i) += lambda;
    }
    let factors = m.clone().factorize().map_err(|_| Error::NearEigenvalue {
        lambda,
        eigenvalue: nearest_eigenvalue(spectral, lambda),
    })?;
    let x = factors.solve_refined(&m, f.values());
    let mut u = Field::zeros(op.grid());
    u.values_mut().copy_from_slice(&x);

    let mut residual = Field::zeros(op.grid());
    m.matvec(u.values(), residual.values_mut());
    residual.add_scaled_mut(-1.0, f);
    let res_norm = residual.norm_quad();
    let eps = f64::EPSILON;
    let gate = 1e-11 * f.norm_quad() + 32.0 * eps * (op.inf_norm() + lambda.abs()) * u.norm_quad();
    if res_norm > gate {
        return Err(Error::NearEigenvalue {
            lambda,
            eigenvalue: nearest_eigenvalue(spectral, lambda),
        });
    }
    Ok(u)
}

fn nearest_eigenvalue(spectral: &SpectralData, lambda: f64) -> f64 {
    if (lambda - spectral.lambda1).abs() <= (lambda - spectral.lambda2).abs() {
        spectral.lambda1
    } else {
        spectral.lambda2
    }
}

/// Extrema, outward one-sided boundary differences, and the sign verdict
/// of a field, strict at every interior node.
pub fn sign_portrait(u: &Field) -> SignPortrait {
    let min_value = u.min_value();
    let max_value = u.max_value();
    let verdict = if min_value > 0.0 {
        SignVerdict::StrictlyPositive
    } else if max_value < 0.0 {
        SignVerdict::StrictlyNegative
    } else {
        SignVerdict::Mixed
    };
    SignPortrait { min_value, max_value, normal_proxies: outward_normal_proxies(u), verdict }
}

/// Estimates delta_f for a positive weight: scans lambda upward from
/// lambda1 + eps0 (eps0 = 1e-4 (lambda2 - lambda1)) in steps of
/// (lambda2 - lambda1)/64, finds the first lambda whose solution loses
/// strict positivity, and bisects the bracket down to `resolution`.
/// When no sign loss occurs below lambda2 - eps0 the estimate is capped
/// at lambda2 - lambda1 and flagged.
///
/// # Errors
///
/// [`Error::NotPositive`] unless f > 0 at every interior node;
/// [`Error::InvalidArgument`] for a non-positive resolution; solve
/// failures propagate.
pub fn estimate_delta(
    op: &LaplacianOp,
    spectral: &SpectralData,
    f: &Field,
    resolution: f64,
) -> Result<AntimaxReport> {
    let min_f = f.min_value();
    if min_f <= 0.0 {
        return Err(Error::NotPositive { what: "weight f", min: min_f });
    }
    if !(resolution > 0.0) {
        return Err(Error::InvalidArgument(alloc::format!(
            "bisection resolution must be positive, got {resolution}"
        )));
    }
    let (l1, l2) = (spectral.lambda1, spectral.lambda2);
    let gap = l2 - l1;
    let eps0 = 1e-4 * gap;
    let step = gap / 64.0;
    let verdict_at = |lambda: f64| -> Result<SignVerdict> {
        let u = solve_linear_at(op, spectral, lambda, f)?;
        Ok(sign_portrait(&u).verdict)
    };

    let mut scan = Vec::new();
    let mut lose: Option<(f64, f64)> = None;
    let mut lambda = l1 + eps0;
    let mut last_positive = l1 + EIGEN_EXCLUSION;
    while lambda <= l2 - eps0 {
        let v = verdict_at(lambda)?;
        scan.push((lambda, v));
        if v == SignVerdict::StrictlyPositive {
            last_positive = lambda;
        } else {
            lose = Some((last_positive, lambda));
            break;
        }
        lambda += step;
    }

    match lose {
        Some((mut a, mut b)) => {
            while b - a > resolution {
                let mid = 0.5 * (a + b);
                if verdict_at(mid)? == SignVerdict::StrictlyPositive {
                    a = mid;
                } else {
                    b = mid;
                }
            }
            let threshold = 0.5 * (a + b);
            Ok(AntimaxReport {
                f: f.clone(),
                delta_f: threshold - l1,
                scan,
                bracket: (a, b),
                capped: false,
                resolution,
                spacing: op.grid().spacing(),
            })
        }
        None => Ok(AntimaxReport {
            f: f.clone(),
            delta_f: gap,
            scan,
            bracket: (last_positive, l2),
            capped: true,
            resolution,
            spacing: op.grid().spacing(),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{build_grid, build_laplacian, inner_product, GridSpec};
    use crate::spectral::compute_eigenpairs;
    use core::f64::consts::PI;

    struct Setup {
        op: LaplacianOp,
        sd: SpectralData,
    }

    fn setup(nodes: usize) -> Setup {
        let grid = build_grid(GridSpec::Interval { length: PI, nodes }).unwrap();
        let op = build_laplacian(&grid);
        let sd = compute_eigenpairs(&op, 2).unwrap();
        Setup { op, sd }
    }

    #[test]
    fn eigenfunction_data_gives_closed_form() {
        // f = phi1: u = phi1 / (lambda - lambda1) for any admissible
        // lambda; checked at lambda = 0 (maximum-principle side).
        let s = setup(100);
        let u = solve_linear_at(&s.op, &s.sd, 0.0, &s.sd.phi1).unwrap();
        let expected = s.sd.phi1.scaled(1.0 / (0.0 - s.sd.lambda1));
        assert!(u.distance_quad(&expected) < 1e-8, "closed-form mismatch");
        assert_eq!(sign_portrait(&u).verdict, SignVerdict::StrictlyNegative);
    }

    #[test]
    fn maximum_principle_below_lambda1() {
        let s = setup(100);
        let f = Field::constant(s.op.grid(), 1.0);
        let u = solve_linear_at(&s.op, &s.sd, s.sd.lambda1 - 0.5, &f).unwrap();
        let p = sign_portrait(&u);
        assert_eq!(p.verdict, SignVerdict::StrictlyNegative);
        // Negative solution: outward proxies -u/h are positive.
        assert!(p.normal_proxies.iter().all(|&d| d > 0.0));
    }

    #[test]
    fn antimaximum_just_above_lambda1() {
        let s = setup(100);
        let f = Field::constant(s.op.grid(), 1.0);
        let u = solve_linear_at(&s.op, &s.sd, s.sd.lambda1 + 0.01, &f).unwrap();
        let p = sign_portrait(&u);
        assert_eq!(p.verdict, SignVerdict::StrictlyPositive);
        assert!(p.normal_proxies.iter().all(|&d| d < 0.0));
    }

    #[test]
    fn near_eigenvalue_rejected() {
        let s = setup(50);
        let f = Field::constant(s.op.grid(), 1.0);
        for lambda in [s.sd.lambda1 + 1e-10, s.sd.lambda2 - 1e-9] {
            assert!(matches!(
                solve_linear_at(&s.op, &s.sd, lambda, &f),
                Err(Error::NearEigenvalue { .. })
            ));
        }
    }

    #[test]
    fn portraits_of_eigenfunctions() {
        let s = setup(60);
        assert_eq!(sign_portrait(&s.sd.phi1).verdict, SignVerdict::StrictlyPositive);
        assert!(sign_portrait(&s.sd.phi1).normal_proxies.iter().all(|&d| d < 0.0));
        assert_eq!(sign_portrait(&s.sd.phi1.scaled(-1.0)).verdict, SignVerdict::StrictlyNegative);
        assert_eq!(sign_portrait(&s.sd.phi2).verdict, SignVerdict::Mixed);
    }

    #[test]
    fn phi1_weight_caps_delta() {
        let s = setup(80);
        let gap = s.sd.lambda2 - s.sd.lambda1;
        let report = estimate_delta(&s.op, &s.sd, &s.sd.phi1.clone(), 1e-4 * gap).unwrap();
        assert!(report.capped);
        assert!((report.delta_f - gap).abs() < 1e-12);
        assert!(report
            .scan
            .iter()
            .all(|&(_, v)| v == SignVerdict::StrictlyPositive));
    }

    #[test]
    fn constant_weight_delta_positive() {
        let s = setup(100);
        let f = Field::constant(s.op.grid(), 1.0);
        let gap = s.sd.lambda2 - s.sd.lambda1;
        let report = estimate_delta(&s.op, &s.sd, &f, 1e-4 * gap).unwrap();
        assert!(report.delta_f > 0.0);
        // Every scanned lambda below the threshold is strictly positive.
        let threshold = s.sd.lambda1 + report.delta_f;
        for &(lambda, v) in &report.scan {
            if lambda < threshold {
                assert_eq!(v, SignVerdict::StrictlyPositive, "at lambda {lambda}");
            }
        }
        assert_eq!(report.spacing, s.op.grid().spacing());
    }

    #[test]
    fn delta_depends_on_weight() {
        // phi1 keeps positivity through the whole window (capped), while
        // the positive mix phi1 + 0.5 phi2 loses it strictly before
        // lambda2: distinct delta_f values, as the theorem's f-dependence
        // requires.
        let s = setup(80);
        let gap = s.sd.lambda2 - s.sd.lambda1;
        let mix = s.sd.phi1.add_scaled(0.5, &s.sd.phi2);
        assert!(mix.min_value() > 0.0, "mix weight must be positive to scan");
        let r_phi1 = estimate_delta(&s.op, &s.sd, &s.sd.phi1.clone(), 1e-4 * gap).unwrap();
        let r_mix = estimate_delta(&s.op, &s.sd, &mix, 1e-4 * gap).unwrap();
        assert!(r_phi1.capped);
        assert!(!r_mix.capped);
        assert!(r_mix.delta_f < r_phi1.delta_f - 10.0 * r_mix.resolution);
    }

    #[test]
    fn nonpositive_weight_refused() {
        let s = setup(40);
        let gap = s.sd.lambda2 - s.sd.lambda1;
        assert!(matches!(
            estimate_delta(&s.op, &s.sd, &s.sd.phi2.clone(), 1e-4 * gap),
            Err(Error::NotPositive { .. })
        ));
    }

    #[test]
    fn resolvent_pole_strength() {
        // ||u(lambda)|| |lambda1 - lambda| -> |<f, phi1>| as lambda ->
        // lambda1: the pole residue of the resolvent applied to f.
        let s = setup(100);
        let f = Field::constant(s.op.grid(), 1.0);
        let f1 = inner_product(&f, &s.sd.phi1).unwrap();
        let lambda = s.sd.lambda1 - 1e-5;
        let u = solve_linear_at(&s.op, &s.sd, lambda, &f).unwrap();
        let strength = u.norm_quad() * (s.sd.lambda1 - lambda).abs();
        assert!(
            (strength - f1.abs()).abs() < 1e-3 * f1.abs(),
            "pole strength {strength} vs f1 {f1}"
        );
    }
}

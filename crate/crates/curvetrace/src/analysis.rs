//! Post-processing of traced curves: turning-point location, the
//! second-derivative sign identity, curve-shape classification with
//! predicted solution counts, the bridge between the generalized and the
//! classical first harmonic, asymptotic slope measurement, and an
//! independent multi-start solution-count oracle.

use alloc::format;
use alloc::vec::Vec;

use crate::continuation::{Context, CurvePoint, NewtonSettings, SolutionCurve};
use crate::grid::{inner_product, inner_product_unchecked, Field, LaplacianOp};
use crate::nonlinearity::{Convexity, NonlinearitySpec};
use crate::spectral::{SpectralData, WeightData};
use crate::{Error, Result};

/// Sign of mu'' at a turning point.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mu2Sign {
    /// mu'' > 0: the turning point is a minimum of mu.
    Positive,
    /// mu'' < 0: a maximum.
    Negative,
}

/// A refined turning point of the curve, with the data needed for the
/// second-derivative identity.
#[derive(Clone, Debug)]
pub struct TurningPoint {
    /// Harmonic at the turning point; |mu'(xi0)| <= 1e-8.
    pub xi0: f64,
    /// Critical forcing amplitude mu(xi0).
    pub mu0: f64,
    /// Converged curve point at xi0, tangent included.
    pub point: CurvePoint,
    /// Full tangent w = u_xi at xi0; positive at every interior node.
    pub w: Field,
    /// Sign of mu'' from the identity.
    pub mu2_sign: Mu2Sign,
    /// mu'' from the identity mu'' <w, f> = <g''(u) w^3>.
    pub mu2_identity: f64,
    /// mu'' from a centered second difference of re-converged mu(xi).
    pub mu2_fd: f64,
    /// |mu2_identity - mu2_fd| / |mu2_fd|.
    pub identity_residual: f64,
}

/// Case label of the solution curve per the classification theorems.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CaseLabel {
    /// Both asymptotic slopes below lambda1: mu decreasing, unique
    /// solution for every mu.
    Decreasing,
    /// Both slopes in (lambda1, nu): mu increasing, unique solution.
    Increasing,
    /// Convex g with gamma1 < lambda1 < gamma2 < nu: parabola-like curve
    /// opening upward in mu, global minimum mu0.
    ParabolaMin,
    /// Concave mirror: global maximum mu0.
    ParabolaMax,
}

impl CaseLabel {
    /// Stable machine-readable code used in reports.
    pub fn code(&self) -> &'static str {
        match self {
            CaseLabel::Decreasing => "decreasing(i)",
            CaseLabel::Increasing => "increasing(ii)",
            CaseLabel::ParabolaMin => "parabola-min(iii-convex)",
            CaseLabel::ParabolaMax => "parabola-max(iii-concave)",
        }
    }
}

impl core::fmt::Display for CaseLabel {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.code())
    }
}

/// Predicted exact solution counts relative to the critical value mu0.
/// For the monotone cases there is no critical value and every count
/// is 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PredictedCounts {
    /// Solutions for mu < mu0.
    pub below_mu0: u32,
    /// Solutions at mu = mu0 (counting the tangency as one).
    pub at_mu0: u32,
    /// Solutions for mu > mu0.
    pub above_mu0: u32,
}

/// Measured and predicted asymptotic slopes dmu/dxi_bar.
#[derive(Clone, Copy, Debug)]
pub struct SlopeEstimates {
    /// Secant slope over the left outer 20% of the trace.
    pub left: f64,
    /// Secant slope over the right outer 20%.
    pub right: f64,
    /// (gamma1 - lambda1) / <f, phi1>.
    pub predicted_left: f64,
    /// (gamma2 - lambda1) / <f, phi1>.
    pub predicted_right: f64,
}

/// Curve-shape classification with predicted counts and diagnostics.
#[derive(Clone, Debug)]
pub struct CurveClassification {
    /// Case label from the slope data (gamma1, gamma2) vs (lambda1, nu).
    pub label: CaseLabel,
    /// Critical value read off the trace at trace resolution, for the
    /// parabola cases; refine with [`find_turning_point`] for
    /// solver-accuracy.
    pub mu0: Option<f64>,
    /// Predicted exact multiplicity per mu-interval.
    pub counts: PredictedCounts,
    /// Asymptotic slope comparison when the trace reaches far enough.
    pub slopes: Option<SlopeEstimates>,
    /// <f, f> / <f, phi1>, the factor linking xi and xi_bar growth.
    pub bridge_factor: f64,
    /// Whether the observed tangent signs along the trace match the
    /// label (monotone, or exactly one sign change of mu' in the right
    /// orientation).
    pub trace_consistent: bool,
}

/// Decomposition of a curve point along the classical first harmonic.
#[derive(Clone, Debug)]
pub struct HarmonicBridge {
    /// xi_bar = <u, phi1>.
    pub xi_bar: f64,
    /// U_bar = u - xi_bar phi1, orthogonal to phi1.
    pub u_bar: Field,
    /// Normalized residual of the identity
    /// xi <f,f> = xi_bar <f,phi1> + <U_bar,f>; pure roundoff.
    pub residual: f64,
}

/// Locates the turning point of a traced curve, if any.
///
/// Scans the stored tangents for a sign change of mu', then refines by
/// safeguarded secant iteration on mu'(xi), each evaluation being a
/// Newton correction plus a tangent solve, until |mu'| <= 1e-8. The
/// returned point carries the identity and finite-difference values of
/// mu'' for cross-validation.
///
/// Returns `Ok(None)` when mu' keeps one sign along the whole trace.
///
/// # Errors
///
/// [`Error::MultipleTurningPoints`] when mu' changes sign more than once
/// (an anomaly under the convex/concave hypotheses, reported rather than
/// silently resolved); [`Error::ConstraintViolation`] if the kernel
/// tangent w fails strict interior positivity.
pub fn find_turning_point(
    ctx: &Context,
    curve: &SolutionCurve,
    g: &NonlinearitySpec,
) -> Result<Option<TurningPoint>> {
    let slopes: Vec<(f64, f64)> = curve
        .points
        .iter()
        .map(|p| {
            let t = p.tangent.as_ref().expect("traced points carry tangents");
            (p.xi, t.mu_prime)
        })
        .collect();
    let mut brackets = Vec::new();
    for i in 0..slopes.len().saturating_sub(1) {
        let (xa, sa) = slopes[i];
        let (xb, sb) = slopes[i + 1];
        if sa == 0.0 {
            brackets.push((xa, xa));
        } else if sa * sb < 0.0 {
            brackets.push((xa, xb));
        }
    }
    if brackets.is_empty() {
        return Ok(None);
    }
    if brackets.len() > 1 {
        let locations = brackets.iter().map(|&(a, b)| 0.5 * (a + b)).collect();
        return Err(Error::MultipleTurningPoints { locations });
    }
    let (xa, _xb) = brackets[0];
    let i = curve.points.iter().position(|p| p.xi == xa).expect("bracket endpoint is traced");
    let refined = refine_turning_point(ctx, g, &curve.points[i], &curve.points[i + 1])?;
    Ok(Some(refined))
}

/// Safeguarded secant iteration on mu'(xi) between two traced points
/// with opposite tangent signs.
fn refine_turning_point(
    ctx: &Context,
    g: &NonlinearitySpec,
    pa: &CurvePoint,
    pb: &CurvePoint,
) -> Result<TurningPoint> {
    let settings = NewtonSettings::default();
    let eval = |xi: f64, warm: &CurvePoint| -> Result<(CurvePoint, f64)> {
        let mut p = ctx.newton_correct(xi, &warm.u_orth, warm.mu, g, &settings)?;
        let t = ctx.tangent(&p, g)?;
        let mu_prime = t.mu_prime;
        p.tangent = Some(t);
        Ok((p, mu_prime))
    };
    let mut a = (pa.clone(), pa.tangent.as_ref().unwrap().mu_prime, pa.xi);
    let mut b = (pb.clone(), pb.tangent.as_ref().unwrap().mu_prime, pb.xi);
    let mut best: Option<(CurvePoint, f64)> = None;
    for _ in 0..80 {
        // Secant step, bisection fallback when it leaves the bracket.
        let (sa, sb) = (a.1, b.1);
        let mut xi_new = b.2 - sb * (b.2 - a.2) / (sb - sa);
        let (lo, hi) = if a.2 < b.2 { (a.2, b.2) } else { (b.2, a.2) };
        if !(xi_new > lo && xi_new < hi) {
            xi_new = 0.5 * (lo + hi);
        }
        let warm = if (xi_new - a.2).abs() < (xi_new - b.2).abs() { &a.0 } else { &b.0 };
        let (p, s) = eval(xi_new, warm)?;
        let converged = s.abs() <= 1e-8;
        if s * sa > 0.0 {
            a = (p.clone(), s, xi_new);
        } else {
            b = (p.clone(), s, xi_new);
        }
        if converged {
            best = Some((p, s));
            break;
        }
    }
    let (point, _mu_prime) = best.ok_or(Error::StepUnderflow {
        parameter: "turning-point bracket",
        last_good: 0.5 * (a.2 + b.2),
    })?;
    let weight = ctx.weight();
    let w = point.tangent.as_ref().unwrap().u_xi(weight);
    let min_w = w.min_value();
    if min_w <= 0.0 {
        return Err(Error::ConstraintViolation { value: min_w, bound: 0.0 });
    }
    let u = point.solution(weight);
    let wf = inner_product_unchecked(&w, &weight.f);
    if wf <= 0.0 {
        return Err(Error::ConstraintViolation { value: wf, bound: 0.0 });
    }
    let mu2_identity = cubic_identity_quadrature(&u, &w, g) / wf;
    let mu2_sign =
        if mu2_identity > 0.0 { Mu2Sign::Positive } else { Mu2Sign::Negative };

    // Cross-validation: centered second difference of re-converged mu.
    let delta = 1e-3 * (1.0 + point.xi.abs());
    let plus = ctx.newton_correct(point.xi + delta, &point.u_orth, point.mu, g, &settings)?;
    let minus = ctx.newton_correct(point.xi - delta, &point.u_orth, point.mu, g, &settings)?;
    let mu2_fd = (plus.mu - 2.0 * point.mu + minus.mu) / (delta * delta);
    let denom = mu2_fd.abs().max(f64::MIN_POSITIVE);
    let identity_residual = (mu2_identity - mu2_fd).abs() / denom;
    Ok(TurningPoint {
        xi0: point.xi,
        mu0: point.mu,
        point,
        w,
        mu2_sign,
        mu2_identity,
        mu2_fd,
        identity_residual,
    })
}

/// Quadrature of g''(u) w^3.
fn cubic_identity_quadrature(u: &Field, w: &Field, g: &NonlinearitySpec) -> f64 {
    let wq = u.grid().quad_weight();
    let mut sum = 0.0;
    for (ui, wi) in u.values().iter().zip(w.values()) {
        sum += g.d2g(*ui) * wi * wi * wi;
    }
    wq * sum
}

/// Evaluates the second-derivative identity mu'' <w,f> = <g''(u) w^3> at
/// a turning point, returning (sign of mu'' as a signum, mu'' estimate).
/// For g'' = 0 the estimate is 0 and the signum is 0.
///
/// # Errors
///
/// [`Error::ConstraintViolation`] when <w, f> <= 0, which contradicts
/// w > 0, f > 0 and flags a discretization anomaly.
pub fn second_derivative_identity(
    tp: &TurningPoint,
    g: &NonlinearitySpec,
    f: &Field,
) -> Result<(f64, f64)> {
    let wf = inner_product(&tp.w, f)?;
    if wf <= 0.0 {
        return Err(Error::ConstraintViolation { value: wf, bound: 0.0 });
    }
    let u = tp.point.u_orth.add_scaled(tp.xi0, f);
    let mu2 = cubic_identity_quadrature(&u, &tp.w, g) / wf;
    Ok((sign_of(mu2), mu2))
}

fn sign_of(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Classifies a traced curve from the slope data (gamma1, gamma2)
/// against (lambda1, nu), cross-checking the label against the observed
/// tangent signs.
///
/// The critical value in the result is read off the trace; it is
/// accurate to the local step size only.
///
/// # Errors
///
/// [`Error::Unclassifiable`] when the slopes sit outside every covered
/// case: non-finite slopes, slopes at or beyond nu, or slopes equal to
/// lambda1 (boundary cases are refused, not guessed).
pub fn classify(
    curve: &SolutionCurve,
    g: &NonlinearitySpec,
    weight: &WeightData,
    spectral: &SpectralData,
) -> Result<CurveClassification> {
    let lambda1 = spectral.lambda1;
    let nu = weight.nu;
    let (g1, g2) = (g.gamma1(), g.gamma2());
    if !g1.is_finite() || !g2.is_finite() {
        return Err(Error::Unclassifiable(format!(
            "asymptotic slopes must be finite to classify; got gamma1 = {g1}, gamma2 = {g2}"
        )));
    }
    let lo = g1.min(g2);
    let hi = g1.max(g2);
    let label = if hi < lambda1 {
        CaseLabel::Decreasing
    } else if lo > lambda1 && hi < nu {
        CaseLabel::Increasing
    } else if g1 < lambda1 && lambda1 < g2 && g2 < nu && g.convexity() == Convexity::Convex {
        CaseLabel::ParabolaMin
    } else if g2 < lambda1 && lambda1 < g1 && g1 < nu && g.convexity() == Convexity::Concave {
        CaseLabel::ParabolaMax
    } else {
        return Err(Error::Unclassifiable(format!(
            "slopes gamma1 = {g1}, gamma2 = {g2} fall outside the covered cases \
             (lambda1 = {lambda1}, nu = {nu}); boundary and super-nu slopes are refused"
        )));
    };
    let counts = match label {
        CaseLabel::Decreasing | CaseLabel::Increasing => {
            PredictedCounts { below_mu0: 1, at_mu0: 1, above_mu0: 1 }
        }
        CaseLabel::ParabolaMin => PredictedCounts { below_mu0: 0, at_mu0: 1, above_mu0: 2 },
        CaseLabel::ParabolaMax => PredictedCounts { below_mu0: 2, at_mu0: 1, above_mu0: 0 },
    };
    let mu0 = match label {
        CaseLabel::ParabolaMin => curve.points.iter().map(|p| p.mu).reduce(f64::min),
        CaseLabel::ParabolaMax => curve.points.iter().map(|p| p.mu).reduce(f64::max),
        _ => None,
    };
    let trace_consistent = trace_matches_label(curve, label);
    let slopes = match asymptotic_slopes(curve, g, weight, spectral, 50.0) {
        Ok(s) => Some(s),
        Err(Error::InsufficientRange { .. }) => None,
        Err(other) => return Err(other),
    };
    Ok(CurveClassification {
        label,
        mu0,
        counts,
        slopes,
        bridge_factor: weight.norm_sq / weight.f1,
        trace_consistent,
    })
}

/// Checks observed tangent signs against a label: monotone labels demand
/// one strict sign throughout; parabola labels demand exactly one sign
/// change in the matching orientation.
fn trace_matches_label(curve: &SolutionCurve, label: CaseLabel) -> bool {
    let slopes: Vec<f64> = curve
        .points
        .iter()
        .filter_map(|p| p.tangent.as_ref().map(|t| t.mu_prime))
        .collect();
    if slopes.len() < 2 {
        return false;
    }
    match label {
        CaseLabel::Decreasing => slopes.iter().all(|&s| s < 0.0),
        CaseLabel::Increasing => slopes.iter().all(|&s| s > 0.0),
        CaseLabel::ParabolaMin | CaseLabel::ParabolaMax => {
            let mut changes = 0;
            for w in slopes.windows(2) {
                if w[0] * w[1] < 0.0 {
                    changes += 1;
                }
            }
            let oriented = if label == CaseLabel::ParabolaMin {
                slopes[0] < 0.0 && *slopes.last().unwrap() > 0.0
            } else {
                slopes[0] > 0.0 && *slopes.last().unwrap() < 0.0
            };
            changes == 1 && oriented
        }
    }
}

/// Decomposes a curve point along phi1: xi_bar = <u, phi1>,
/// U_bar = u - xi_bar phi1, and checks the bridge identity
/// xi <f,f> = xi_bar <f,phi1> + <U_bar,f> (exact algebra; the residual
/// is pure roundoff, normalized by 1 + |xi| <f,f>).
///
/// # Errors
///
/// [`Error::GridMismatch`] when the fields live on different grids.
pub fn harmonic_bridge(
    p: &CurvePoint,
    f: &Field,
    spectral: &SpectralData,
) -> Result<HarmonicBridge> {
    let u = p.u_orth.add_scaled(p.xi, f);
    let xi_bar = inner_product(&u, &spectral.phi1)?;
    let u_bar = u.add_scaled(-xi_bar, &spectral.phi1);
    let ff = inner_product(f, f)?;
    let fphi = inner_product(f, &spectral.phi1)?;
    let ubf = inner_product(&u_bar, f)?;
    let residual = (p.xi * ff - xi_bar * fphi - ubf).abs() / (1.0 + p.xi.abs() * ff);
    Ok(HarmonicBridge { xi_bar, u_bar, residual })
}

/// Measures asymptotic slopes dmu/dxi_bar by secants over the outer 20%
/// of each end of the trace (each point mapped to xi_bar through the
/// harmonic bridge) and compares with the predictions
/// (gamma_i - lambda1) / <f, phi1>.
///
/// # Errors
///
/// [`Error::InsufficientRange`] unless the trace reaches past
/// +-`min_reach` on both sides.
pub fn asymptotic_slopes(
    curve: &SolutionCurve,
    g: &NonlinearitySpec,
    weight: &WeightData,
    spectral: &SpectralData,
    min_reach: f64,
) -> Result<SlopeEstimates> {
    let first = curve.points.first().ok_or(Error::InsufficientRange {
        reached: 0.0,
        required: min_reach,
    })?;
    let last = curve.points.last().unwrap();
    if last.xi < min_reach {
        return Err(Error::InsufficientRange { reached: last.xi, required: min_reach });
    }
    if first.xi > -min_reach {
        return Err(Error::InsufficientRange { reached: first.xi, required: min_reach });
    }
    let span = last.xi - first.xi;
    let right = secant_over(curve, last.xi - 0.2 * span, f64::INFINITY, weight, spectral)?;
    let left = secant_over(curve, f64::NEG_INFINITY, first.xi + 0.2 * span, weight, spectral)?;
    let fphi = weight.f1;
    Ok(SlopeEstimates {
        left,
        right,
        predicted_left: (g.gamma1() - spectral.lambda1) / fphi,
        predicted_right: (g.gamma2() - spectral.lambda1) / fphi,
    })
}

/// Secant slope of mu against xi_bar between the outermost points of the
/// trace restricted to [lo, hi].
fn secant_over(
    curve: &SolutionCurve,
    lo: f64,
    hi: f64,
    weight: &WeightData,
    spectral: &SpectralData,
) -> Result<f64> {
    let subset: Vec<&CurvePoint> =
        curve.points.iter().filter(|p| p.xi >= lo && p.xi <= hi).collect();
    let (a, b) = if subset.len() >= 2 {
        (subset[0], *subset.last().unwrap())
    } else {
        // Degenerate window; fall back to the trace's outermost pair.
        let n = curve.points.len();
        (&curve.points[n - 2], &curve.points[n - 1])
    };
    let ba = harmonic_bridge(a, &weight.f, spectral)?;
    let bb = harmonic_bridge(b, &weight.f, spectral)?;
    Ok((b.mu - a.mu) / (bb.xi_bar - ba.xi_bar))
}

/// All distinct solutions of the unconstrained discrete problem
/// -Au + g(u) = mu f found by damped Newton from multi-starts
/// u = s phi1, s = 0 and +-log-spaced in [1e-2, 1e3].
///
/// This path is deliberately independent of the continuation engine: no
/// bordering, no harmonic constraint, plain square Jacobian solves, so
/// its counts confront the curve rather than restate it. Non-convergent
/// starts are dropped; converged solutions are deduplicated by pairwise
/// quadrature distance below 1e-6 (1 + norm).
pub fn oracle_solutions(
    op: &LaplacianOp,
    f: &Field,
    phi1: &Field,
    mu: f64,
    g: &NonlinearitySpec,
    starts: usize,
) -> Vec<Field> {
    oracle_solutions_from(op, f, phi1, mu, g, &start_amplitudes(starts))
}

/// [`oracle_solutions`] with caller-chosen start amplitudes, for harnesses
/// that augment the deterministic grid with extra coverage.
pub fn oracle_solutions_from(
    op: &LaplacianOp,
    f: &Field,
    phi1: &Field,
    mu: f64,
    g: &NonlinearitySpec,
    amplitudes: &[f64],
) -> Vec<Field> {
    let f_norm = f.norm_quad();
    let tol = 1e-10 * (1.0 + mu.abs()) * f_norm.max(1.0);
    let mut found: Vec<Field> = Vec::new();
    for &s in amplitudes {
        let u0 = phi1.scaled(s);
        if let Some(u) = plain_newton(op, f, mu, g, u0, tol) {
            let is_new = found
                .iter()
                .all(|v| v.distance_quad(&u) >= 1e-6 * (1.0 + u.norm_quad()));
            if is_new {
                found.push(u);
            }
        }
    }
    found
}

/// Number of distinct solutions found by [`oracle_solutions`].
pub fn count_solutions_oracle(
    op: &LaplacianOp,
    f: &Field,
    phi1: &Field,
    mu: f64,
    g: &NonlinearitySpec,
    starts: usize,
) -> usize {
    oracle_solutions(op, f, phi1, mu, g, starts).len()
}

/// s = 0 plus +-|s| log-spaced over [1e-2, 1e3].
pub fn start_amplitudes(starts: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(starts);
    if starts == 0 {
        return out;
    }
    out.push(0.0);
    let half = (starts - 1) / 2;
    for k in 0..half {
        let t = if half > 1 { k as f64 / (half - 1) as f64 } else { 0.0 };
        let mag = libm::pow(10.0, -2.0 + 5.0 * t);
        out.push(mag);
        out.push(-mag);
    }
    out.truncate(starts);
    out
}

/// Damped Newton on -Au + g(u) - mu f = 0 with a dense Jacobian solve
/// per step. Returns None when the start fails to converge.
pub(crate) fn plain_newton(
    op: &LaplacianOp,
    f: &Field,
    mu: f64,
    g: &NonlinearitySpec,
    mut u: Field,
    tol: f64,
) -> Option<Field> {
    let n = u.len();
    let mut res = plain_residual(op, f, mu, g, &u);
    let mut res_norm = res.norm_quad();
    for _ in 0..60 {
        if res_norm <= tol {
            return Some(u);
        }
        let mut jac = op.assemble_dense();
        // assemble_dense gives A; the Jacobian is -A + diag(g'(u)).
        for i in 0..n {
            for j in 0..n {
                let v = jac.at(i, j);
                *jac.at_mut(i, j) = -v;
            }
            *jac.at_mut(i, i) += g.dg(u.values()[i]);
        }
        let factors = match jac.factorize() {
            Ok(fa) => fa,
            Err(_) => return None,
        };
        let neg_res = res.scaled(-1.0);
        let step_vals = factors.solve(neg_res.values());
        let mut step = Field::zeros(u.grid());
        step.values_mut().copy_from_slice(&step_vals);
        let mut alpha = 1.0;
        let mut accepted = false;
        for _ in 0..10 {
            let u_try = u.add_scaled(alpha, &step);
            let r_try = plain_residual(op, f, mu, g, &u_try);
            let n_try = r_try.norm_quad();
            if n_try < res_norm || n_try <= tol {
                u = u_try;
                res = r_try;
                res_norm = n_try;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if !accepted {
            return None;
        }
    }
    if res_norm <= tol {
        Some(u)
    } else {
        None
    }
}

fn plain_residual(
    op: &LaplacianOp,
    f: &Field,
    mu: f64,
    g: &NonlinearitySpec,
    u: &Field,
) -> Field {
    let au = op.apply(u);
    let mut r = u.map(|v| g.g(v));
    r.add_scaled_mut(-1.0, &au);
    r.add_scaled_mut(-mu, f);
    r
}

/// Reports whether a curve classification agrees with oracle counts at
/// sampled mu values; a convenience for scenario audits.
///
/// For monotone labels the samples are mu0-free; for parabola labels the
/// samples straddle the critical value at the offsets given.
pub fn oracle_agrees(
    op: &LaplacianOp,
    f: &Field,
    phi1: &Field,
    g: &NonlinearitySpec,
    classification: &CurveClassification,
    offsets: &[f64],
    starts: usize,
) -> bool {
    match classification.label {
        CaseLabel::Decreasing | CaseLabel::Increasing => offsets.iter().all(|&mu| {
            count_solutions_oracle(op, f, phi1, mu, g, starts) == 1
        }),
        CaseLabel::ParabolaMin => {
            let mu0 = match classification.mu0 {
                Some(m) => m,
                None => return false,
            };
            offsets.iter().all(|&d| {
                let count = count_solutions_oracle(op, f, phi1, mu0 + d, g, starts);
                if d > 0.0 {
                    count == 2
                } else {
                    count == 0
                }
            })
        }
        CaseLabel::ParabolaMax => {
            let mu0 = match classification.mu0 {
                Some(m) => m,
                None => return false,
            };
            offsets.iter().all(|&d| {
                let count = count_solutions_oracle(op, f, phi1, mu0 + d, g, starts);
                if d > 0.0 {
                    count == 0
                } else {
                    count == 2
                }
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::continuation::StepControl;
    use crate::grid::{build_grid, build_laplacian, GridSpec};
    use crate::nonlinearity::{make_linear, make_softplus_family};
    use crate::spectral::{compute_eigenpairs, compute_nu};
    use alloc::sync::Arc;
    use core::f64::consts::PI;

    struct Setup {
        ctx: Context,
        grid: Arc<crate::grid::Grid>,
    }

    fn setup(nodes: usize, weight_phi1: bool) -> Setup {
        let grid = build_grid(GridSpec::Interval { length: PI, nodes }).unwrap();
        let op = build_laplacian(&grid);
        let sd = compute_eigenpairs(&op, 2).unwrap();
        let f = if weight_phi1 { sd.phi1.clone() } else { Field::constant(&grid, 1.0) };
        let w = compute_nu(&sd, &f).unwrap();
        Setup { ctx: Context::new(op, sd, w).unwrap(), grid }
    }

    fn convex_gamma2(ctx: &Context) -> f64 {
        0.5 * (ctx.spectral().lambda1 + ctx.weight().nu)
    }

    #[test]
    fn linear_curve_has_no_turning_point() {
        let s = setup(40, false);
        let g = make_linear(0.3);
        let curve = s.ctx.trace_curve(-1.0, 1.0, &g, &StepControl::default()).unwrap();
        let tp = find_turning_point(&s.ctx, &curve, &g).unwrap();
        assert!(tp.is_none());
    }

    #[test]
    fn convex_softplus_turning_point() {
        let s = setup(60, false);
        let g2 = convex_gamma2(&s.ctx);
        let g = make_softplus_family(-1.0, g2).unwrap();
        let curve = s.ctx.trace_curve(-6.0, 6.0, &g, &StepControl::default()).unwrap();
        let tp = find_turning_point(&s.ctx, &curve, &g).unwrap().expect("fold expected");
        assert!(tp.point.tangent.as_ref().unwrap().mu_prime.abs() <= 1e-8);
        assert_eq!(tp.mu2_sign, Mu2Sign::Positive);
        assert!(tp.w.min_value() > 0.0, "kernel tangent positivity");
        assert!(
            tp.identity_residual < 0.10,
            "identity {} vs fd {}",
            tp.mu2_identity,
            tp.mu2_fd
        );
        // mu0 is the global minimum along the trace, up to step resolution.
        let trace_min = curve.points.iter().map(|p| p.mu).fold(f64::INFINITY, f64::min);
        assert!(tp.mu0 <= trace_min + 1e-6);
    }

    #[test]
    fn concave_mirror_turning_point() {
        let s = setup(60, false);
        let g1 = convex_gamma2(&s.ctx);
        let g = make_softplus_family(g1, -1.0).unwrap();
        let curve = s.ctx.trace_curve(-6.0, 6.0, &g, &StepControl::default()).unwrap();
        let tp = find_turning_point(&s.ctx, &curve, &g).unwrap().expect("fold expected");
        assert_eq!(tp.mu2_sign, Mu2Sign::Negative);
        assert!(tp.mu2_identity < 0.0);
        assert!(tp.identity_residual < 0.10);
        let (sign, est) = second_derivative_identity(&tp, &g, &s.ctx.weight().f).unwrap();
        assert_eq!(sign, -1.0);
        assert!((est - tp.mu2_identity).abs() < 1e-12 * est.abs());
    }

    #[test]
    fn identity_zero_for_linear_g() {
        // Formal evaluation on an artificial turning-point record.
        let s = setup(40, false);
        let g_lin = make_linear(0.3);
        let g2 = convex_gamma2(&s.ctx);
        let g = make_softplus_family(-1.0, g2).unwrap();
        let curve = s.ctx.trace_curve(-5.0, 5.0, &g, &StepControl::default()).unwrap();
        let tp = find_turning_point(&s.ctx, &curve, &g).unwrap().unwrap();
        let (sign, est) = second_derivative_identity(&tp, &g_lin, &s.ctx.weight().f).unwrap();
        assert_eq!(sign, 0.0);
        assert_eq!(est, 0.0);
    }

    #[test]
    fn classify_linear_cases() {
        let s = setup(40, false);
        let lambda1 = s.ctx.spectral().lambda1;
        let nu = s.ctx.weight().nu;

        let g_dec = make_linear(0.5 * lambda1);
        let curve = s.ctx.trace_curve(-2.0, 2.0, &g_dec, &StepControl::default()).unwrap();
        let c = classify(&curve, &g_dec, s.ctx.weight(), s.ctx.spectral()).unwrap();
        assert_eq!(c.label, CaseLabel::Decreasing);
        assert_eq!(c.counts, PredictedCounts { below_mu0: 1, at_mu0: 1, above_mu0: 1 });
        assert!(c.mu0.is_none());
        assert!(c.trace_consistent);

        let g_inc = make_linear(0.5 * (lambda1 + nu));
        let curve = s.ctx.trace_curve(-2.0, 2.0, &g_inc, &StepControl::default()).unwrap();
        let c = classify(&curve, &g_inc, s.ctx.weight(), s.ctx.spectral()).unwrap();
        assert_eq!(c.label, CaseLabel::Increasing);
        assert!(c.trace_consistent);
    }

    #[test]
    fn classify_parabola_and_consistency() {
        let s = setup(60, false);
        let g2 = convex_gamma2(&s.ctx);
        let g = make_softplus_family(-1.0, g2).unwrap();
        let curve = s.ctx.trace_curve(-6.0, 6.0, &g, &StepControl::default()).unwrap();
        let c = classify(&curve, &g, s.ctx.weight(), s.ctx.spectral()).unwrap();
        assert_eq!(c.label, CaseLabel::ParabolaMin);
        assert_eq!(c.counts, PredictedCounts { below_mu0: 0, at_mu0: 1, above_mu0: 2 });
        assert!(c.mu0.is_some());
        assert!(c.trace_consistent);
        assert!(c.slopes.is_none(), "trace too short for slope measurement");
        let expected = s.ctx.weight().norm_sq / s.ctx.weight().f1;
        assert!((c.bridge_factor - expected).abs() < 1e-14);
    }

    #[test]
    fn classify_refuses_boundary_and_super_nu() {
        let s = setup(40, false);
        let nu = s.ctx.weight().nu;
        let g_bad = make_softplus_family(-1.0, nu + 0.5).unwrap();
        let g2 = convex_gamma2(&s.ctx);
        let g_ok = make_softplus_family(-1.0, g2).unwrap();
        let curve = s.ctx.trace_curve(-2.0, 2.0, &g_ok, &StepControl::default()).unwrap();
        assert!(matches!(
            classify(&curve, &g_bad, s.ctx.weight(), s.ctx.spectral()),
            Err(Error::Unclassifiable(_))
        ));
        let lambda1 = s.ctx.spectral().lambda1;
        let g_boundary = make_linear(lambda1);
        assert!(matches!(
            classify(&curve, &g_boundary, s.ctx.weight(), s.ctx.spectral()),
            Err(Error::Unclassifiable(_))
        ));
    }

    #[test]
    fn bridge_identity_and_phi1_weight_coincidence() {
        let s = setup(60, true);
        let g2 = convex_gamma2(&s.ctx);
        let g = make_softplus_family(-1.0, g2).unwrap();
        let p = s
            .ctx
            .newton_correct(0.7, &Field::zeros(&s.grid), 0.0, &g, &NewtonSettings::default())
            .unwrap();
        let b = harmonic_bridge(&p, &s.ctx.weight().f, s.ctx.spectral()).unwrap();
        // f = phi1: the two harmonics coincide.
        assert!((b.xi_bar - 0.7).abs() < 1e-9, "xi_bar {}", b.xi_bar);
        assert!(b.residual < 1e-10);
        let ub_phi1 = inner_product(&b.u_bar, &s.ctx.spectral().phi1).unwrap();
        assert!(ub_phi1.abs() < 1e-10);
    }

    #[test]
    fn bridge_on_pure_phi1_gives_unit_harmonic() {
        let s = setup(50, false);
        let phi1 = s.ctx.spectral().phi1.clone();
        let f = &s.ctx.weight().f;
        let xi = inner_product(&phi1, f).unwrap() / s.ctx.weight().norm_sq;
        let u_orth = phi1.add_scaled(-xi, f);
        let p = CurvePoint {
            xi,
            mu: 0.0,
            u_orth,
            residual: 0.0,
            tangent: None,
            min_u: phi1.min_value(),
            max_u: phi1.max_value(),
        };
        let b = harmonic_bridge(&p, f, s.ctx.spectral()).unwrap();
        assert!((b.xi_bar - 1.0).abs() < 1e-10, "xi_bar {}", b.xi_bar);
        assert!(b.residual < 1e-10);
    }

    #[test]
    fn bridge_residual_along_trace() {
        let s = setup(50, false);
        let g2 = convex_gamma2(&s.ctx);
        let g = make_softplus_family(-1.0, g2).unwrap();
        let curve = s.ctx.trace_curve(-3.0, 3.0, &g, &StepControl::default()).unwrap();
        for p in &curve.points {
            let b = harmonic_bridge(p, &s.ctx.weight().f, s.ctx.spectral()).unwrap();
            assert!(b.residual < 1e-10, "residual {} at xi {}", b.residual, p.xi);
        }
    }

    #[test]
    fn linear_slopes_measured_equal_predicted() {
        let s = setup(50, false);
        let gamma = 0.4;
        let g = make_linear(gamma);
        let curve = s.ctx.trace_curve(-55.0, 55.0, &g, &StepControl::default()).unwrap();
        let sl = asymptotic_slopes(&curve, &g, s.ctx.weight(), s.ctx.spectral(), 50.0).unwrap();
        let rel_r = (sl.right - sl.predicted_right).abs() / sl.predicted_right.abs();
        let rel_l = (sl.left - sl.predicted_left).abs() / sl.predicted_left.abs();
        assert!(rel_r < 1e-8, "right {} vs {}", sl.right, sl.predicted_right);
        assert!(rel_l < 1e-8, "left {} vs {}", sl.left, sl.predicted_left);
    }

    #[test]
    fn slopes_insufficient_range() {
        let s = setup(40, false);
        let g = make_linear(0.4);
        let curve = s.ctx.trace_curve(-2.0, 2.0, &g, &StepControl::default()).unwrap();
        assert!(matches!(
            asymptotic_slopes(&curve, &g, s.ctx.weight(), s.ctx.spectral(), 50.0),
            Err(Error::InsufficientRange { .. })
        ));
    }

    #[test]
    fn oracle_unique_solution_linear() {
        let s = setup(40, false);
        let g = make_linear(0.3);
        for mu in [-10.0, 0.0, 10.0] {
            let n = count_solutions_oracle(
                s.ctx.op(),
                &s.ctx.weight().f,
                &s.ctx.spectral().phi1,
                mu,
                &g,
                9,
            );
            assert_eq!(n, 1, "mu = {mu}");
        }
    }

    #[test]
    fn oracle_counts_straddle_fold() {
        let s = setup(60, false);
        let g2 = convex_gamma2(&s.ctx);
        let g = make_softplus_family(-1.0, g2).unwrap();
        let curve = s.ctx.trace_curve(-6.0, 6.0, &g, &StepControl::default()).unwrap();
        let tp = find_turning_point(&s.ctx, &curve, &g).unwrap().unwrap();
        let phi1 = &s.ctx.spectral().phi1;
        let f = &s.ctx.weight().f;
        let above =
            count_solutions_oracle(s.ctx.op(), f, phi1, tp.mu0 + 1.0, &g, 21);
        let below =
            count_solutions_oracle(s.ctx.op(), f, phi1, tp.mu0 - 1.0, &g, 21);
        assert_eq!(above, 2, "two solutions above the fold");
        assert_eq!(below, 0, "none below the fold");
    }

    #[test]
    fn start_amplitudes_deterministic_and_spanning() {
        let s = start_amplitudes(41);
        assert_eq!(s.len(), 41);
        assert_eq!(s[0], 0.0);
        let max = s.iter().cloned().fold(0.0, f64::max);
        let min = s.iter().cloned().fold(0.0, f64::min);
        assert!((max - 1e3).abs() < 1e-9);
        assert!((min + 1e3).abs() < 1e-9);
        assert_eq!(s, start_amplitudes(41));
    }
}

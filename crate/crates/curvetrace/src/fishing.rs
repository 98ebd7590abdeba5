//! The fishing-harvesting scenario end to end: the positive steady state
//! at mu = 0, the parabola-like harvesting curve connecting (0, 0) and
//! (xi0, 0) with its single interior maximum, the stocking branch beyond
//! xi0 where mu < 0, and the empirical nodewise-ordering check between
//! positive solutions at two harvesting levels.

use alloc::vec::Vec;

use crate::analysis::{find_turning_point, plain_newton};
use crate::continuation::{Context, CurvePoint, NewtonSettings, SolutionCurve, StepControl};
use crate::grid::{inner_product, Field};
use crate::nonlinearity::{make_fishing_family, NonlinearitySpec};
use crate::{Error, Result};

/// A fishing scenario: logistic growth a u - b u^2 on u >= 0 with slope
/// cap c on the smooth extension below zero, plus the derived curve
/// landmarks once traced.
#[derive(Clone, Debug)]
pub struct FishingScenario {
    /// Linear growth rate; the positive state exists when a > lambda1.
    pub a: f64,
    /// Self-limitation coefficient, b > 0.
    pub b: f64,
    /// Slope of the extension at -infinity; the solvability cap requires
    /// c < nu.
    pub c: f64,
    /// The assembled nonlinearity.
    pub g: NonlinearitySpec,
    /// Harmonic of the positive state u0; filled by the trace.
    pub xi0: Option<f64>,
    /// Maximum sustainable harvesting amplitude; filled by the trace.
    pub mu_bar: Option<f64>,
    /// Harmonic at the curve maximum; filled by the trace.
    pub xi_turn: Option<f64>,
}

/// Builds a fishing scenario. The spectral conditions lambda1 < a and
/// c < nu are not checked here (the constructor has no grid); the trace
/// operations report them when violated.
///
/// # Errors
///
/// Family-level parameter violations (b <= 0, c <= a, non-finite) as in
/// [`make_fishing_family`].
pub fn make_scenario(a: f64, b: f64, c: f64) -> Result<FishingScenario> {
    let g = make_fishing_family(a, b, c)?;
    Ok(FishingScenario { a, b, c, g, xi0: None, mu_bar: None, xi_turn: None })
}

/// Which side of the curve maximum a mu-level is resolved on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Branch {
    /// xi < xi_turn: small solutions, mu in (0, mu_bar).
    Lower,
    /// xi > xi_turn: the branch through u0 and the stocking extension,
    /// mu in (-infinity, mu_bar); solutions are positive here.
    Upper,
}

/// Nodewise comparison outcome between two fields.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NodewiseOrdering {
    /// Second field strictly larger at every node.
    PointwiseIncreasing,
    /// Second field strictly smaller at every node.
    PointwiseDecreasing,
    /// Fields agree to roundoff.
    Equal,
    /// No uniform ordering.
    Mixed,
}

/// Empirical report for the monotonicity comparison of two positive
/// solutions u(mu1), u(mu2) on one branch.
#[derive(Clone, Debug)]
pub struct LemmaAReport {
    /// Smaller harvesting level.
    pub mu1: f64,
    /// Larger harvesting level.
    pub mu2: f64,
    /// Branch both solutions were resolved on.
    pub branch: Branch,
    /// Minimum of u(mu1) (positivity witness).
    pub u1_min: f64,
    /// Minimum of u(mu2).
    pub u2_min: f64,
    /// Observed nodewise ordering of u(mu2) - u(mu1).
    pub ordering: NodewiseOrdering,
    /// True when the ordering is uniform (increasing or decreasing).
    pub uniform: bool,
    /// Largest nodewise difference magnitude.
    pub max_abs_diff: f64,
}

/// Finds the positive steady state u0 at mu = 0 by damped Newton from
/// the logistic-amplitude seed s phi1, s = (a - lambda1) / (b max phi1),
/// retrying with tripled amplitude when the iteration collapses onto the
/// trivial solution. Uniqueness of the positive state means any positive
/// nontrivial limit is u0.
///
/// # Errors
///
/// [`Error::OnlyTrivialSolution`] when every retry converges to the
/// trivial solution or to a non-positive limit; with a <= lambda1 this
/// is the expected subcritical outcome.
pub fn find_u0(ctx: &Context, scenario: &FishingScenario) -> Result<Field> {
    let op = ctx.op();
    let f = &ctx.weight().f;
    let phi1 = &ctx.spectral().phi1;
    let lambda1 = ctx.spectral().lambda1;
    let phi1_max = phi1.max_value();
    // Below the 1e-11 ||f|| reporting bar but above the stencil's
    // cancellation floor (a few times eps ||u|| / h^2) on default grids.
    let tol = 3e-12 * f.norm_quad().max(1.0);
    let base = (scenario.a - lambda1).max(0.1) / (scenario.b * phi1_max);
    let retries = 5;
    let mut s = base;
    for _ in 0..=retries {
        if let Some(u) = plain_newton(op, f, 0.0, &scenario.g, phi1.scaled(s), tol) {
            if u.norm_quad() > 1e-4 && u.min_value() > 0.0 {
                return Ok(u);
            }
        }
        s *= 3.0;
    }
    Err(Error::OnlyTrivialSolution { retries })
}

/// Traces the harvesting curve: anchors at (xi0, 0) through u0, marches
/// down to xi = 0 (the trivial solution) and up to 1.6 xi0 (the stocking
/// branch), then verifies the curve shape and fills the scenario's
/// derived landmarks.
///
/// Verified along the way: mu at the xi = 0 endpoint within 1e-6 of
/// zero; exactly one interior maximum with mu_bar > 0 at
/// xi_turn in (0, xi0); beyond xi0, mu < 0, u > 0, and mu strictly
/// decreasing.
///
/// # Errors
///
/// [`Error::ConstraintViolation`] when a verified property fails
/// (value/bound identify which); [`Error::MultipleTurningPoints`] if
/// mu' changes sign more than once; trace and Newton errors propagate.
pub fn trace_fishing_curve(
    ctx: &Context,
    scenario: &FishingScenario,
) -> Result<(SolutionCurve, FishingScenario)> {
    let u0 = find_u0(ctx, scenario)?;
    let xi0 = inner_product(&u0, &ctx.weight().f)? / ctx.weight().norm_sq;
    if xi0 <= 0.0 {
        return Err(Error::ConstraintViolation { value: xi0, bound: 0.0 });
    }
    let settings = NewtonSettings::default();
    let u0_orth = u0.add_scaled(-xi0, &ctx.weight().f);
    let anchor = ctx.newton_correct(xi0, &u0_orth, 0.0, &scenario.g, &settings)?;
    let control = StepControl { anchor: xi0, ..Default::default() };
    let curve = ctx.trace_from(anchor, 0.0, 1.6 * xi0, &scenario.g, &control)?;

    // Endpoint at the trivial solution.
    let origin = curve.points.first().expect("trace is nonempty");
    if !(origin.xi == 0.0 && origin.mu.abs() <= 1e-6) {
        return Err(Error::ConstraintViolation { value: origin.mu.abs(), bound: 1e-6 });
    }
    // Single interior maximum, refined.
    let tp = find_turning_point(ctx, &curve, &scenario.g)?.ok_or(
        Error::ConstraintViolation { value: 0.0, bound: 1.0 },
    )?;
    if tp.mu0 <= 0.0 {
        return Err(Error::ConstraintViolation { value: tp.mu0, bound: 0.0 });
    }
    if !(tp.xi0 > 0.0 && tp.xi0 < xi0) {
        return Err(Error::ConstraintViolation { value: tp.xi0, bound: xi0 });
    }
    // Stocking branch: mu < 0, u > 0, mu strictly decreasing.
    let eps_xi = 1e-8 * (1.0 + xi0);
    let mut prev_mu: Option<f64> = None;
    for p in curve.points.iter().filter(|p| p.xi > xi0 + eps_xi) {
        if p.mu >= 0.0 {
            return Err(Error::ConstraintViolation { value: p.mu, bound: 0.0 });
        }
        if p.min_u <= 0.0 {
            return Err(Error::ConstraintViolation { value: p.min_u, bound: 0.0 });
        }
        if let Some(m) = prev_mu {
            if p.mu >= m {
                return Err(Error::ConstraintViolation { value: p.mu, bound: m });
            }
        }
        prev_mu = Some(p.mu);
    }

    let mut filled = scenario.clone();
    filled.xi0 = Some(xi0);
    filled.mu_bar = Some(tp.mu0);
    filled.xi_turn = Some(tp.xi0);
    Ok((curve, filled))
}

/// Resolves the solution at harvesting level `mu` on the requested
/// branch of a traced fishing curve by Newton iteration in xi on the
/// traced mu(xi), then compares the two solutions nodewise and reports
/// the observed ordering. Lemma A's direction is not asserted; the
/// report records what the discrete branch actually does.
///
/// # Errors
///
/// [`Error::InvalidArgument`] when mu1 > mu2 or a level sits above
/// mu_bar; [`Error::InsufficientRange`] when the traced branch does not
/// reach a level; [`Error::NotPositive`] when a resolved solution is not
/// strictly positive (reported without comparison); requires a filled
/// scenario.
pub fn lemma_a_check(
    ctx: &Context,
    curve: &SolutionCurve,
    scenario: &FishingScenario,
    mu1: f64,
    mu2: f64,
    branch: Branch,
) -> Result<LemmaAReport> {
    if mu1 > mu2 {
        return Err(Error::InvalidArgument(alloc::format!(
            "levels must satisfy mu1 <= mu2, got {mu1} > {mu2}"
        )));
    }
    let xi_turn = scenario.xi_turn.ok_or_else(|| {
        Error::InvalidArgument("scenario not filled; run trace_fishing_curve first".into())
    })?;
    let mu_bar = scenario.mu_bar.expect("filled scenario has mu_bar");
    if mu2 >= mu_bar {
        return Err(Error::InvalidArgument(alloc::format!(
            "level {mu2} is not below the curve maximum {mu_bar}"
        )));
    }
    let u1 = solution_at_level(ctx, curve, scenario, mu1, xi_turn, branch)?;
    let u2 = if mu1 == mu2 {
        u1.clone()
    } else {
        solution_at_level(ctx, curve, scenario, mu2, xi_turn, branch)?
    };
    let (u1_min, u2_min) = (u1.min_value(), u2.min_value());
    if u1_min <= 0.0 {
        return Err(Error::NotPositive { what: "solution at mu1", min: u1_min });
    }
    if u2_min <= 0.0 {
        return Err(Error::NotPositive { what: "solution at mu2", min: u2_min });
    }
    let scale = u1.max_abs().max(u2.max_abs());
    let tiny = 1e-12 * (1.0 + scale);
    let mut all_up = true;
    let mut all_down = true;
    let mut max_abs_diff: f64 = 0.0;
    for (a, b) in u1.values().iter().zip(u2.values()) {
        let d = b - a;
        max_abs_diff = max_abs_diff.max(d.abs());
        if d <= tiny {
            all_up = false;
        }
        if d >= -tiny {
            all_down = false;
        }
    }
    let ordering = if max_abs_diff <= tiny {
        NodewiseOrdering::Equal
    } else if all_up {
        NodewiseOrdering::PointwiseIncreasing
    } else if all_down {
        NodewiseOrdering::PointwiseDecreasing
    } else {
        NodewiseOrdering::Mixed
    };
    let uniform = matches!(
        ordering,
        NodewiseOrdering::PointwiseIncreasing | NodewiseOrdering::PointwiseDecreasing
    );
    Ok(LemmaAReport {
        mu1,
        mu2,
        branch,
        u1_min,
        u2_min,
        ordering,
        uniform,
        max_abs_diff,
    })
}

/// Locates xi with mu(xi) = mu on one branch of the traced curve and
/// re-converges the solution there. Newton iteration on xi using the
/// curve tangent, warm-started from the nearest traced bracket.
fn solution_at_level(
    ctx: &Context,
    curve: &SolutionCurve,
    scenario: &FishingScenario,
    mu: f64,
    xi_turn: f64,
    branch: Branch,
) -> Result<Field> {
    let on_branch: Vec<&CurvePoint> = match branch {
        Branch::Lower => curve.points.iter().filter(|p| p.xi <= xi_turn).collect(),
        Branch::Upper => curve.points.iter().filter(|p| p.xi >= xi_turn).collect(),
    };
    // mu is monotone along a single branch; find a traced bracket.
    let mut warm: Option<&CurvePoint> = None;
    for pair in on_branch.windows(2) {
        let (lo, hi) = if pair[0].mu <= pair[1].mu {
            (pair[0].mu, pair[1].mu)
        } else {
            (pair[1].mu, pair[0].mu)
        };
        if mu >= lo && mu <= hi {
            warm = Some(pair[0]);
            break;
        }
    }
    let start = warm.ok_or_else(|| {
        let reached = on_branch
            .iter()
            .map(|p| p.mu)
            .fold(f64::NAN, |acc, m| if acc.is_nan() || (m - mu).abs() < (acc - mu).abs() { m } else { acc });
        Error::InsufficientRange { reached, required: mu }
    })?;
    let settings = NewtonSettings::default();
    let mut point = start.clone();
    for _ in 0..30 {
        if (point.mu - mu).abs() <= 1e-10 * (1.0 + mu.abs()) {
            return Ok(point.solution(ctx.weight()));
        }
        let t = match &point.tangent {
            Some(t) => t.mu_prime,
            None => ctx.tangent(&point, &scenario.g)?.mu_prime,
        };
        if t == 0.0 {
            break;
        }
        let xi_next = point.xi + (mu - point.mu) / t;
        let mut p = ctx.newton_correct(xi_next, &point.u_orth, point.mu, &scenario.g, &settings)?;
        p.tangent = Some(ctx.tangent(&p, &scenario.g)?);
        point = p;
    }
    Err(Error::NewtonDiverged {
        xi: point.xi,
        mu: point.mu,
        residual: (point.mu - mu).abs(),
        iterations: 30,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{build_grid, build_laplacian, GridSpec};
    use crate::spectral::{compute_eigenpairs, compute_nu};
    use core::f64::consts::PI;

    fn fishing_setup(nodes: usize) -> (Context, FishingScenario) {
        let grid = build_grid(GridSpec::Interval { length: PI, nodes }).unwrap();
        let op = build_laplacian(&grid);
        let sd = compute_eigenpairs(&op, 2).unwrap();
        let f = Field::constant(&grid, 1.0);
        let w = compute_nu(&sd, &f).unwrap();
        let a = sd.lambda1 + 0.3;
        let c = 0.5 * (a + w.nu);
        let ctx = Context::new(op, sd, w).unwrap();
        let scenario = make_scenario(a, 1.0, c).unwrap();
        (ctx, scenario)
    }

    #[test]
    fn u0_positive_small_residual_bounded() {
        let (ctx, scenario) = fishing_setup(80);
        let u0 = find_u0(&ctx, &scenario).unwrap();
        assert!(u0.min_value() > 0.0);
        // Residual of the discrete equation at mu = 0.
        let au = ctx.op().apply(&u0);
        let mut r = u0.map(|v| scenario.g.g(v));
        r.add_scaled_mut(-1.0, &au);
        assert!(r.norm_quad() < 1e-11, "residual {}", r.norm_quad());
        // The uniform logistic equilibrium a/b is a supersolution bound.
        assert!(u0.max_value() < scenario.a / scenario.b);
    }

    #[test]
    fn subcritical_growth_only_trivial() {
        let (ctx, _) = fishing_setup(60);
        let a = ctx.spectral().lambda1 - 0.2;
        let c = 0.5 * (ctx.spectral().lambda1 + ctx.weight().nu);
        let scenario = make_scenario(a, 1.0, c).unwrap();
        assert!(matches!(
            find_u0(&ctx, &scenario),
            Err(Error::OnlyTrivialSolution { .. })
        ));
    }

    #[test]
    fn traced_curve_shape_and_landmarks() {
        let (ctx, scenario) = fishing_setup(80);
        let (curve, filled) = trace_fishing_curve(&ctx, &scenario).unwrap();
        let xi0 = filled.xi0.unwrap();
        let mu_bar = filled.mu_bar.unwrap();
        let xi_turn = filled.xi_turn.unwrap();

        // Endpoints (0, 0) and (xi0, 0).
        let first = curve.points.first().unwrap();
        assert_eq!(first.xi, 0.0);
        assert!(first.mu.abs() < 1e-8, "mu(0) = {}", first.mu);
        let at_xi0 = curve.point_nearest(xi0);
        assert!((at_xi0.xi - xi0).abs() < 1e-12);
        assert!(at_xi0.mu.abs() < 1e-8, "mu(xi0) = {}", at_xi0.mu);

        assert!(mu_bar > 0.0);
        assert!(xi_turn > 0.0 && xi_turn < xi0);

        // Single rise-then-fall in mu along the trace.
        let mus: Vec<f64> = curve.points.iter().map(|p| p.mu).collect();
        let mut switches = 0;
        for w in mus.windows(3) {
            let d1 = w[1] - w[0];
            let d2 = w[2] - w[1];
            if d1 * d2 < 0.0 {
                switches += 1;
            }
        }
        assert_eq!(switches, 1, "exactly one monotonicity switch");

        // Stocking branch: last point at 1.6 xi0 with mu < 0, u > 0, and
        // the (mu, norm) projection moving out as mu decreases.
        let last = curve.points.last().unwrap();
        assert!((last.xi - 1.6 * xi0).abs() < 1e-12);
        assert!(last.mu < 0.0);
        assert!(last.min_u > 0.0);
        let stock: Vec<&CurvePoint> =
            curve.points.iter().filter(|p| p.xi > xi0 * (1.0 + 1e-9)).collect();
        for pair in stock.windows(2) {
            assert!(pair[1].mu < pair[0].mu, "mu strictly decreasing while stocking");
            let n0 = pair[0].solution(ctx.weight()).norm_quad();
            let n1 = pair[1].solution(ctx.weight()).norm_quad();
            assert!(n1 > n0, "norm strictly increasing while stocking");
        }
    }

    #[test]
    fn concavity_audit_along_curve() {
        let (ctx, scenario) = fishing_setup(60);
        let (curve, _) = trace_fishing_curve(&ctx, &scenario).unwrap();
        for p in &curve.points {
            let u = p.solution(ctx.weight());
            for &v in u.values() {
                assert!(scenario.g.d2g(v) < 0.0, "g'' must stay negative, u = {v}");
            }
        }
    }

    #[test]
    fn lemma_a_stocking_branch_ordering() {
        let (ctx, scenario) = fishing_setup(80);
        let (curve, filled) = trace_fishing_curve(&ctx, &scenario).unwrap();
        let mu_bar = filled.mu_bar.unwrap();
        let report = lemma_a_check(
            &ctx,
            &curve,
            &filled,
            -0.2 * mu_bar,
            -0.1 * mu_bar,
            Branch::Upper,
        )
        .unwrap();
        assert!(report.uniform, "stocking comparison must be uniform");
        // Along the positive branch mu decreases as u grows, so the
        // larger mu has the smaller solution.
        assert_eq!(report.ordering, NodewiseOrdering::PointwiseDecreasing);
        assert!(report.u1_min > 0.0 && report.u2_min > 0.0);
    }

    #[test]
    fn lemma_a_lower_branch_matches_stated_direction() {
        let (ctx, scenario) = fishing_setup(80);
        let (curve, filled) = trace_fishing_curve(&ctx, &scenario).unwrap();
        let mu_bar = filled.mu_bar.unwrap();
        let report = lemma_a_check(
            &ctx,
            &curve,
            &filled,
            0.3 * mu_bar,
            0.6 * mu_bar,
            Branch::Lower,
        )
        .unwrap();
        assert!(report.uniform);
        assert_eq!(report.ordering, NodewiseOrdering::PointwiseIncreasing);
    }

    #[test]
    fn lemma_a_equal_levels_degenerate() {
        let (ctx, scenario) = fishing_setup(60);
        let (curve, filled) = trace_fishing_curve(&ctx, &scenario).unwrap();
        let mu_bar = filled.mu_bar.unwrap();
        let report =
            lemma_a_check(&ctx, &curve, &filled, 0.4 * mu_bar, 0.4 * mu_bar, Branch::Upper)
                .unwrap();
        assert_eq!(report.ordering, NodewiseOrdering::Equal);
        assert!(!report.uniform);
    }

    #[test]
    fn lemma_a_rejects_bad_levels() {
        let (ctx, scenario) = fishing_setup(60);
        let (curve, filled) = trace_fishing_curve(&ctx, &scenario).unwrap();
        let mu_bar = filled.mu_bar.unwrap();
        assert!(lemma_a_check(&ctx, &curve, &filled, 0.5, 0.1, Branch::Upper).is_err());
        assert!(lemma_a_check(&ctx, &curve, &filled, 0.0, 2.0 * mu_bar, Branch::Upper).is_err());
    }
}

//! The five batch commands. Each builds its scenario from the validated
//! config, runs the library, writes one CSV artifact plus a JSON summary,
//! and prints a one-line digest to standard output.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use curvetrace::analysis::{
    asymptotic_slopes, classify, find_turning_point, harmonic_bridge, oracle_solutions,
    oracle_solutions_from, start_amplitudes,
};
use curvetrace::antimax::{estimate_delta, sign_portrait, solve_linear_at};
use curvetrace::continuation::SolutionCurve;
use curvetrace::fishing::{make_scenario, trace_fishing_curve};
use curvetrace::grid::inner_product;
use curvetrace::Error;

use crate::config::{
    audit_nonlinearity, build_context, build_nonlinearity, build_problem, NonlinearityConfig,
    ScenarioConfig,
};
use crate::output::{artifact_paths, check, num, Csv, Summary};
use crate::Failure;

pub fn spectrum(config: &ScenarioConfig, out_dir: &Path) -> Result<(), Failure> {
    let (csv_path, summary_path) = artifact_paths(out_dir, config, "spectrum")?;
    let problem = build_problem(config)?;
    let sd = &problem.spectral;
    let f1 = inner_product(&problem.f, &sd.phi1)?;
    let w = curvetrace::spectral::compute_nu(sd, &problem.f)?;

    let mut csv = Csv::new(&["lambda1", "lambda2", "nu", "f1"]);
    csv.row(&[num(sd.lambda1), num(sd.lambda2), num(w.nu), num(f1)]);
    csv.write(&csv_path)?;

    let mut summary = Summary::new("spectrum", config);
    summary.number("lambda1", sd.lambda1);
    summary.number("lambda2", sd.lambda2);
    summary.number("nu", w.nu);
    summary.number("f1", f1);
    summary.push_check(check(
        "spectral_gap",
        sd.lambda1 < sd.lambda2,
        format!("lambda1 = {} < lambda2 = {}", sd.lambda1, sd.lambda2),
    ));
    summary.push_check(check(
        "nu_in_gap",
        w.nu > sd.lambda1 && w.nu <= sd.lambda2 * (1.0 + 1e-12),
        format!("nu = {} against ({}, {}]", w.nu, sd.lambda1, sd.lambda2),
    ));
    summary.push_check(check(
        "first_harmonic_positive",
        f1 > 0.0,
        format!("<f, phi1> = {f1}"),
    ));
    summary.write(&summary_path)?;

    println!(
        "lambda1 = {}, lambda2 = {}, nu = {}, f1 = {}",
        num(sd.lambda1),
        num(sd.lambda2),
        num(w.nu),
        num(f1)
    );
    Ok(())
}

fn curve_csv(curve: &SolutionCurve, path: &Path) -> Result<(), Failure> {
    let mut csv = Csv::new(&["xi", "mu", "mu_prime", "min_u", "max_u", "residual"]);
    for p in &curve.points {
        let mu_prime = p.tangent.as_ref().expect("traced points carry tangents").mu_prime;
        csv.row(&[
            num(p.xi),
            num(p.mu),
            num(mu_prime),
            num(p.min_u),
            num(p.max_u),
            num(p.residual),
        ]);
    }
    csv.write(path)
}

pub fn curve(config: &ScenarioConfig, out_dir: &Path) -> Result<(), Failure> {
    let (csv_path, summary_path) = artifact_paths(out_dir, config, "curve")?;
    let problem = build_problem(config)?;
    let ctx = build_context(config, problem)?;
    let g = build_nonlinearity(config, ctx.weight().nu)?;
    let control = config.step_control();

    let traced = ctx.trace_curve(config.curve.xi_min, config.curve.xi_max, &g, &control)?;
    curve_csv(&traced, &csv_path)?;

    let mut summary = Summary::new("curve", config);
    summary.value("points", json!(traced.len()));
    summary.value(
        "truncated",
        json!({"left": traced.truncated_left, "right": traced.truncated_right}),
    );
    summary.number("growth_c1", traced.growth.c1);
    summary.number("growth_c2", traced.growth.c2);

    let (audit_pass, audit_detail) = audit_nonlinearity(&g, ctx.weight());
    summary.push_check(check("nonlinearity_audit", audit_pass, audit_detail));
    summary.push_check(check(
        "trace_reached_range",
        !traced.truncated_left && !traced.truncated_right,
        format!(
            "traced [{}, {}]",
            traced.points.first().map_or(f64::NAN, |p| p.xi),
            traced.points.last().map_or(f64::NAN, |p| p.xi)
        ),
    ));
    summary.push_check(check(
        "growth_envelope",
        traced.growth.min_slack >= -1e-6,
        format!("min slack {:.3e}", traced.growth.min_slack),
    ));

    let tp = find_turning_point(&ctx, &traced, &g)?;
    match &tp {
        Some(tp) => {
            summary.value(
                "turning_point",
                json!({
                    "xi0": tp.xi0,
                    "mu0": tp.mu0,
                    "mu2_identity": tp.mu2_identity,
                    "mu2_fd": tp.mu2_fd,
                    "mu2_sign": format!("{:?}", tp.mu2_sign),
                }),
            );
            summary.push_check(check(
                "second_derivative_identity",
                tp.identity_residual < 0.10,
                format!("relative gap {:.3e}", tp.identity_residual),
            ));
        }
        None => summary.value("turning_point", json!(null)),
    }

    match asymptotic_slopes(&traced, &g, ctx.weight(), ctx.spectral(), config.curve.min_reach) {
        Ok(s) => {
            summary.value(
                "slopes",
                json!({
                    "left": s.left,
                    "right": s.right,
                    "predicted_left": s.predicted_left,
                    "predicted_right": s.predicted_right,
                }),
            );
            let left_ok = (s.left - s.predicted_left).abs() <= 0.05 * s.predicted_left.abs();
            let right_ok = (s.right - s.predicted_right).abs() <= 0.05 * s.predicted_right.abs();
            summary.push_check(check(
                "asymptotic_slopes",
                left_ok && right_ok,
                format!(
                    "left {} vs {}, right {} vs {}",
                    s.left, s.predicted_left, s.right, s.predicted_right
                ),
            ));
        }
        Err(Error::InsufficientRange { reached, required }) => {
            summary.value("slopes", json!(null));
            summary.value(
                "slopes_skipped",
                json!(format!("trace reaches |xi| = {reached}, slopes need {required}")),
            );
        }
        Err(other) => return Err(other.into()),
    }

    let label_line;
    match classify(&traced, &g, ctx.weight(), ctx.spectral()) {
        Ok(cl) => {
            label_line = format!("case {}", cl.label.code());
            summary.value("label", json!(cl.label.code()));
            summary.value(
                "predicted_counts",
                json!({
                    "below_mu0": cl.counts.below_mu0,
                    "at_mu0": cl.counts.at_mu0,
                    "above_mu0": cl.counts.above_mu0,
                }),
            );
            summary.number("bridge_factor", cl.bridge_factor);
            if let Some(mu0) = cl.mu0 {
                summary.number("mu0_trace", mu0);
            }
            summary.push_check(check(
                "trace_matches_label",
                cl.trace_consistent,
                format!("tangent sign pattern vs {}", cl.label.code()),
            ));
        }
        Err(Error::Unclassifiable(why)) => {
            label_line = "unclassifiable".to_string();
            summary.value("label", json!("unclassifiable"));
            summary.value("unclassifiable_reason", json!(why));
        }
        Err(other) => return Err(other.into()),
    }
    summary.write(&summary_path)?;

    let fold = match &tp {
        Some(tp) => format!("fold at (xi0 {}, mu0 {})", tp.xi0, tp.mu0),
        None => "no turning point".to_string(),
    };
    println!("{} points, {label_line}, {fold}", traced.len());
    Ok(())
}

pub fn antimax(config: &ScenarioConfig, out_dir: &Path) -> Result<(), Failure> {
    let (csv_path, summary_path) = artifact_paths(out_dir, config, "antimax")?;
    let problem = build_problem(config)?;
    let gap = problem.spectral.lambda2 - problem.spectral.lambda1;
    let resolution = config.antimax.resolution_fraction * gap;
    let report = estimate_delta(&problem.op, &problem.spectral, &problem.f, resolution)?;

    // The report's scan stores verdicts only; re-solve per lambda for the
    // extrema columns and confirm the verdicts reproduce.
    let mut csv = Csv::new(&["lambda", "min_u", "max_u", "verdict"]);
    let mut verdicts_reproduce = true;
    for &(lambda, verdict) in &report.scan {
        let u = solve_linear_at(&problem.op, &problem.spectral, lambda, &problem.f)?;
        let portrait = sign_portrait(&u);
        verdicts_reproduce &= portrait.verdict == verdict;
        csv.row(&[
            num(lambda),
            num(portrait.min_value),
            num(portrait.max_value),
            portrait.verdict.code().to_string(),
        ]);
    }
    csv.write(&csv_path)?;

    let mut summary = Summary::new("antimax", config);
    summary.number("delta_f", report.delta_f);
    summary.value("capped", json!(report.capped));
    summary.value("bracket", json!([report.bracket.0, report.bracket.1]));
    summary.number("resolution", report.resolution);
    summary.value("spacing", json!([report.spacing.0, report.spacing.1]));
    summary.push_check(check(
        "window_positive",
        report.delta_f > 0.0,
        format!("delta_f = {}", report.delta_f),
    ));
    summary.push_check(check(
        "window_within_gap",
        report.delta_f <= gap * (1.0 + 1e-12),
        format!("delta_f = {} against gap {gap}", report.delta_f),
    ));
    summary.push_check(check(
        "scan_verdicts_reproduce",
        verdicts_reproduce,
        format!("{} scanned lambda values", report.scan.len()),
    ));
    summary.write(&summary_path)?;

    println!("delta_f = {}{}", num(report.delta_f), if report.capped { " (capped)" } else { "" });
    Ok(())
}

pub fn fishing(config: &ScenarioConfig, out_dir: &Path) -> Result<(), Failure> {
    let (csv_path, summary_path) = artifact_paths(out_dir, config, "fishing")?;
    let Some(NonlinearityConfig::Fishing { a, b, c }) = config.nonlinearity else {
        return Err(Failure::Validation(
            "the fishing command needs `nonlinearity: {\"fishing\": {a, b, c}}`".to_string(),
        ));
    };
    let problem = build_problem(config)?;
    let ctx = build_context(config, problem)?;
    let scenario = make_scenario(a, b, c)?;
    if !(scenario.g.nu1() < ctx.weight().nu) {
        return Err(Failure::Validation(format!(
            "fishing extension slope violates the solvability hypothesis \
             sup g' <= nu1 < nu: c = {c} is not below nu = {}",
            ctx.weight().nu
        )));
    }
    let (curve, filled) = trace_fishing_curve(&ctx, &scenario)?;

    let mut csv = Csv::new(&[
        "xi", "mu", "mu_prime", "min_u", "max_u", "residual", "xi_bar", "norm2",
    ]);
    for p in &curve.points {
        let mu_prime = p.tangent.as_ref().expect("traced points carry tangents").mu_prime;
        let bridge = harmonic_bridge(p, &ctx.weight().f, ctx.spectral())?;
        let norm2 = p.solution(ctx.weight()).norm_quad();
        csv.row(&[
            num(p.xi),
            num(p.mu),
            num(mu_prime),
            num(p.min_u),
            num(p.max_u),
            num(p.residual),
            num(bridge.xi_bar),
            num(norm2),
        ]);
    }
    csv.write(&csv_path)?;

    let xi0 = filled.xi0.expect("trace fills xi0");
    let mu_bar = filled.mu_bar.expect("trace fills mu_bar");
    let xi_turn = filled.xi_turn.expect("trace fills xi_turn");
    let turn = curve.point_nearest(xi_turn);
    let xi_bar_turn = harmonic_bridge(turn, &ctx.weight().f, ctx.spectral())?.xi_bar;

    let mut summary = Summary::new("fishing", config);
    summary.number("xi0", xi0);
    summary.number("mu_bar", mu_bar);
    summary.number("xi_turn", xi_turn);
    summary.number("xi_bar_turn", xi_bar_turn);
    summary.value("points", json!(curve.len()));
    let origin_mu = curve.points.first().map_or(f64::NAN, |p| p.mu);
    let end = curve.point_nearest(xi0);
    summary.push_check(check(
        "endpoints_on_mu_zero",
        origin_mu.abs() < 1e-8 && end.mu.abs() < 1e-8,
        format!("|mu(0)| = {:.3e}, |mu(xi0)| = {:.3e}", origin_mu.abs(), end.mu.abs()),
    ));
    summary.push_check(check(
        "max_harvest_positive",
        mu_bar > 0.0,
        format!("mu_bar = {mu_bar}"),
    ));
    summary.push_check(check(
        "turn_inside_arc",
        0.0 < xi_turn && xi_turn < xi0,
        format!("xi_turn = {xi_turn} in (0, {xi0})"),
    ));

    // Independent multistart counts on either side of the harvest cap.
    let f = &ctx.weight().f;
    let phi1 = &ctx.spectral().phi1;
    let starts = config.count.starts;
    let below = oracle_solutions(ctx.op(), f, phi1, 0.5 * mu_bar, &scenario.g, starts).len();
    let above = oracle_solutions(ctx.op(), f, phi1, 1.5 * mu_bar, &scenario.g, starts).len();
    summary.value(
        "counts",
        json!([
            {"mu": 0.5 * mu_bar, "count": below},
            {"mu": 1.5 * mu_bar, "count": above},
        ]),
    );
    summary.push_check(check(
        "two_solutions_below_cap",
        below == 2,
        format!("count {below} at mu_bar/2"),
    ));
    summary.push_check(check(
        "no_solutions_above_cap",
        above == 0,
        format!("count {above} at 1.5 mu_bar"),
    ));

    let (audit_pass, audit_detail) = audit_nonlinearity(&scenario.g, ctx.weight());
    summary.push_check(check("nonlinearity_audit", audit_pass, audit_detail));
    summary.write(&summary_path)?;

    println!(
        "xi0 = {}, xi_bar_turn = {}, mu_bar = {}",
        num(xi0),
        num(xi_bar_turn),
        num(mu_bar)
    );
    Ok(())
}

pub fn count(config: &ScenarioConfig, out_dir: &Path, seed: Option<u64>) -> Result<(), Failure> {
    let (csv_path, summary_path) = artifact_paths(out_dir, config, "count")?;
    if config.count.mu_values.is_empty() {
        return Err(Failure::Validation(
            "the count command needs a non-empty `count.mu_values` list".to_string(),
        ));
    }
    let problem = build_problem(config)?;
    let ctx = build_context(config, problem)?;
    let g = build_nonlinearity(config, ctx.weight().nu)?;

    // Deterministic log-spaced starts, optionally extended by seeded random
    // amplitudes for extra basin coverage.
    let mut amplitudes = start_amplitudes(config.count.starts);
    if let Some(seed) = seed {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..config.count.starts {
            let mag = 10f64.powf(rng.gen_range(-2.0..3.0));
            let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            amplitudes.push(sign * mag);
        }
    }

    let mut csv = Csv::new(&["mu", "count"]);
    let mut counts = Vec::new();
    for &mu in &config.count.mu_values {
        let sols = oracle_solutions_from(
            ctx.op(),
            &ctx.weight().f,
            &ctx.spectral().phi1,
            mu,
            &g,
            &amplitudes,
        );
        counts.push((mu, sols.len()));
        csv.row(&[num(mu), sols.len().to_string()]);
    }
    csv.write(&csv_path)?;

    let mut summary = Summary::new("count", config);
    summary.value(
        "counts",
        json!(counts.iter().map(|&(mu, n)| json!({"mu": mu, "count": n})).collect::<Vec<_>>()),
    );
    summary.value("starts_used", json!(amplitudes.len()));
    let (audit_pass, audit_detail) = audit_nonlinearity(&g, ctx.weight());
    summary.push_check(check("nonlinearity_audit", audit_pass, audit_detail));
    summary.write(&summary_path)?;

    let digest: Vec<String> = counts.iter().map(|&(mu, n)| format!("{mu}: {n}")).collect();
    println!("counts: {}", digest.join(", "));
    Ok(())
}

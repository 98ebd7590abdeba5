//! Scenario configuration: a flat JSON document parsed strictly (unknown
//! keys are rejected at every level) and validated against the library's
//! preconditions before any compute runs.

use std::fs;
use std::path::Path;
use std::sync::Arc;

use anyhow::{bail, ensure, Context as _};
use serde::{Deserialize, Serialize};

use curvetrace::continuation::{Context, NewtonSettings, StepControl};
use curvetrace::grid::{build_grid, build_laplacian, Field, Grid, GridSpec, LaplacianOp};
use curvetrace::nonlinearity::{
    make_fishing_family, make_linear, make_softplus_family, validate, NonlinearitySpec,
};
use curvetrace::spectral::{compute_eigenpairs, compute_nu, SpectralData};

use crate::Failure;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub grid: GridConfig,
    #[serde(default)]
    pub weight: WeightConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nonlinearity: Option<NonlinearityConfig>,
    #[serde(default)]
    pub curve: CurveOptions,
    #[serde(default)]
    pub antimax: AntimaxOptions,
    #[serde(default)]
    pub count: CountOptions,
    #[serde(default)]
    pub output: OutputConfig,
    /// Seed for the randomized extra oracle starts of `count`; other
    /// commands are fully deterministic and only echo it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum GridConfig {
    Interval { length: f64, nodes: usize },
    Rectangle { width: f64, height: f64, nodes_x: usize, nodes_y: usize },
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum WeightConfig {
    /// f identically one.
    #[default]
    Constant,
    /// f equal to the principal eigenfunction.
    Phi1,
    /// Nodal values from a whitespace-separated text file; the value count
    /// must match the grid's interior node count.
    File { path: String },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum NonlinearityConfig {
    Linear { gamma: f64 },
    Softplus { gamma1: f64, gamma2: f64 },
    Fishing { a: f64, b: f64, c: f64 },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CurveOptions {
    pub xi_min: f64,
    pub xi_max: f64,
    /// Harmonic at which the homotopy bootstrap lands before marching.
    pub anchor: f64,
    pub base_step: f64,
    pub min_scale: f64,
    pub max_scale: f64,
    pub growth: f64,
    pub newton_tol: f64,
    pub max_iter: usize,
    /// Safety margin under the solvability cap nu.
    pub slope_margin: f64,
    /// Minimum |xi| reach required before asymptotic slopes are measured.
    pub min_reach: f64,
}

impl Default for CurveOptions {
    fn default() -> Self {
        let newton = NewtonSettings::default();
        let step = StepControl::default();
        CurveOptions {
            xi_min: -100.0,
            xi_max: 100.0,
            anchor: step.anchor,
            base_step: step.base_step,
            min_scale: step.min_scale,
            max_scale: step.max_scale,
            growth: step.growth,
            newton_tol: newton.tol,
            max_iter: newton.max_iter,
            slope_margin: 1e-8,
            min_reach: 50.0,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AntimaxOptions {
    /// Bisection resolution for delta_f as a fraction of lambda2 - lambda1.
    pub resolution_fraction: f64,
}

impl Default for AntimaxOptions {
    fn default() -> Self {
        AntimaxOptions { resolution_fraction: 1e-4 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CountOptions {
    /// Forcing amplitudes at which the oracle counts solutions.
    pub mu_values: Vec<f64>,
    /// Size of the deterministic log-spaced start grid.
    pub starts: usize,
}

impl Default for CountOptions {
    fn default() -> Self {
        CountOptions { mu_values: Vec::new(), starts: 41 }
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    /// CSV artifact name inside the output directory; defaults to
    /// `<command>.csv`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub csv: Option<String>,
    /// JSON summary name; defaults to `<command>_summary.json`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub summary: Option<String>,
}

pub fn load_config(path: &Path) -> Result<ScenarioConfig, Failure> {
    let run = || -> anyhow::Result<ScenarioConfig> {
        let text = fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let config: ScenarioConfig = serde_json::from_str(&text)
            .with_context(|| format!("parsing config {}", path.display()))?;
        config.check_numeric()?;
        Ok(config)
    };
    run().map_err(|e| Failure::Validation(format!("{e:#}")))
}

impl ScenarioConfig {
    /// Range and sign checks on every numeric field, before any compute.
    fn check_numeric(&self) -> anyhow::Result<()> {
        let c = &self.curve;
        ensure!(c.xi_min < c.xi_max, "curve.xi_min must be below curve.xi_max");
        ensure!(
            c.anchor >= c.xi_min && c.anchor <= c.xi_max,
            "curve.anchor must lie in [xi_min, xi_max]"
        );
        ensure!(c.base_step > 0.0, "curve.base_step must be positive");
        ensure!(
            0.0 < c.min_scale && c.min_scale <= c.max_scale,
            "curve step scales must satisfy 0 < min_scale <= max_scale"
        );
        ensure!(c.growth >= 1.0, "curve.growth must be at least 1");
        ensure!(c.newton_tol > 0.0, "curve.newton_tol must be positive");
        ensure!(c.max_iter >= 1, "curve.max_iter must be at least 1");
        ensure!(c.slope_margin > 0.0, "curve.slope_margin must be positive");
        ensure!(c.min_reach > 0.0, "curve.min_reach must be positive");
        ensure!(
            self.antimax.resolution_fraction > 0.0,
            "antimax.resolution_fraction must be positive"
        );
        ensure!(self.count.starts >= 1, "count.starts must be at least 1");
        for mu in &self.count.mu_values {
            ensure!(mu.is_finite(), "count.mu_values must be finite, got {mu}");
        }
        Ok(())
    }

    pub fn step_control(&self) -> StepControl {
        let c = &self.curve;
        StepControl {
            base_step: c.base_step,
            min_scale: c.min_scale,
            max_scale: c.max_scale,
            growth: c.growth,
            anchor: c.anchor,
            newton: self.newton_settings(),
        }
    }

    pub fn newton_settings(&self) -> NewtonSettings {
        NewtonSettings {
            tol: self.curve.newton_tol,
            max_iter: self.curve.max_iter,
            ..NewtonSettings::default()
        }
    }
}

/// Grid, operator, leading eigenpairs, and the configured weight:
/// everything every command starts from.
pub struct Problem {
    pub op: LaplacianOp,
    pub spectral: SpectralData,
    pub f: Field,
}

pub fn build_problem(config: &ScenarioConfig) -> Result<Problem, Failure> {
    let spec = match config.grid {
        GridConfig::Interval { length, nodes } => GridSpec::Interval { length, nodes },
        GridConfig::Rectangle { width, height, nodes_x, nodes_y } => {
            GridSpec::Rectangle { width, height, nodes_x, nodes_y }
        }
    };
    let grid = build_grid(spec)?;
    let op = build_laplacian(&grid);
    let spectral = compute_eigenpairs(&op, 2)?;
    let f = match &config.weight {
        WeightConfig::Constant => Field::constant(&grid, 1.0),
        WeightConfig::Phi1 => spectral.phi1.clone(),
        WeightConfig::File { path } => load_weight_file(Path::new(path), &grid)?,
    };
    Ok(Problem { op, spectral, f })
}

fn load_weight_file(path: &Path, grid: &Arc<Grid>) -> Result<Field, Failure> {
    let run = || -> anyhow::Result<Field> {
        let text = fs::read_to_string(path)
            .with_context(|| format!("reading weight file {}", path.display()))?;
        let mut values = Vec::new();
        for token in text.split_whitespace() {
            let v: f64 = token
                .parse()
                .with_context(|| format!("weight file {}: bad value {token:?}", path.display()))?;
            ensure!(v.is_finite(), "weight file {}: non-finite value {v}", path.display());
            values.push(v);
        }
        ensure!(
            values.len() == grid.interior_count(),
            "weight file {} holds {} values but the grid has {} interior nodes",
            path.display(),
            values.len(),
            grid.interior_count()
        );
        Ok(Field::from_values(grid, values)?)
    };
    run().map_err(|e| Failure::Validation(format!("{e:#}")))
}

/// Continuation context for the configured problem; consumes the parts.
pub fn build_context(config: &ScenarioConfig, problem: Problem) -> Result<Context, Failure> {
    let w = compute_nu(&problem.spectral, &problem.f)?;
    Ok(Context::new(problem.op, problem.spectral, w)?.with_margin(config.curve.slope_margin))
}

/// The configured nonlinearity, audited against the weight constant before
/// any solve; audit failures name the violated hypothesis and are
/// validation errors.
pub fn build_nonlinearity(
    config: &ScenarioConfig,
    nu: f64,
) -> Result<NonlinearitySpec, Failure> {
    let run = || -> anyhow::Result<NonlinearitySpec> {
        let Some(nl) = &config.nonlinearity else {
            bail!("this command needs a `nonlinearity` section in the config");
        };
        let spec = match *nl {
            NonlinearityConfig::Linear { gamma } => make_linear(gamma),
            NonlinearityConfig::Softplus { gamma1, gamma2 } => {
                make_softplus_family(gamma1, gamma2)?
            }
            NonlinearityConfig::Fishing { a, b, c } => make_fishing_family(a, b, c)?,
        };
        Ok(spec)
    };
    let spec = run().map_err(|e| Failure::Validation(format!("{e:#}")))?;
    // The audit needs nu, which lives in WeightData; rebuild the check the
    // library performs so the message cites the hypothesis directly.
    if !(spec.nu1() < nu) {
        return Err(Failure::Validation(format!(
            "nonlinearity violates the solvability hypothesis sup g' <= nu1 < nu: \
             nu1 = {} is not below nu = {nu}",
            spec.nu1()
        )));
    }
    Ok(spec)
}

/// Full derivative/convexity audit, recorded in the summary as a built-in
/// check rather than re-derived by callers.
pub fn audit_nonlinearity(
    spec: &NonlinearitySpec,
    w: &curvetrace::spectral::WeightData,
) -> (bool, String) {
    let report = validate(spec, w);
    if report.pass {
        (true, format!("nu1 = {} < nu = {}", report.nu1, report.nu))
    } else {
        (false, report.failures.join("; "))
    }
}

//! Command-line front end for the solution-curve tracer.
//!
//! Every subcommand reads one JSON scenario config, writes a CSV artifact
//! and a JSON summary into the output directory, and prints a one-line
//! digest. Artifacts are deterministic: identical config and seed produce
//! byte-identical files.

// Hypothesis guards are written `!(a < b)` on purpose: unlike `a >= b`,
// the negated form also rejects NaN arguments.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod commands;
mod config;
mod output;

/// Top-level failure split by exit code: bad inputs versus a numerical
/// method giving up.
#[derive(Debug)]
pub enum Failure {
    /// Config, argument, or hypothesis validation failed (exit 2).
    Validation(String),
    /// A solver or tracer failed on admissible input (exit 3).
    Numerical(String),
}

impl Failure {
    fn exit_code(&self) -> ExitCode {
        match self {
            Failure::Validation(_) => ExitCode::from(2),
            Failure::Numerical(_) => ExitCode::from(3),
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Validation(m) | Failure::Numerical(m) => m,
        }
    }
}

impl From<curvetrace::Error> for Failure {
    fn from(e: curvetrace::Error) -> Self {
        use curvetrace::Error::*;
        let text = e.to_string();
        match e {
            InvalidGridSpec(_) | GridMismatch | ZeroField(_) | InvalidArgument(_)
            | SlopeCapViolation { .. } | Unclassifiable(_) | NotPositive { .. } => {
                Failure::Validation(text)
            }
            SingularMatrix { .. }
            | EigenNoConvergence { .. }
            | NewtonDiverged { .. }
            | StepUnderflow { .. }
            | MultipleTurningPoints { .. }
            | InsufficientRange { .. }
            | ConstraintViolation { .. }
            | NearEigenvalue { .. }
            | OnlyTrivialSolution { .. } => Failure::Numerical(text),
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Validation(format!("{e:#}"))
    }
}

#[derive(Parser)]
#[command(
    name = "curvetrace",
    about = "Trace and analyze global solution curves of a forced elliptic problem",
    version
)]
struct Cli {
    /// Path to the JSON scenario config.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory for CSV and summary artifacts.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,

    /// Seed for the extra randomized solve starts (count command);
    /// overrides the config's seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Report the two lowest eigenvalues and the interpolated threshold nu.
    Spectrum,
    /// Trace the full solution curve and classify its shape.
    Curve,
    /// Scan the window above lambda1 where solutions flip uniformly negative.
    Antimax,
    /// Trace the bounded harvesting curve between its two roots.
    Fishing,
    /// Count distinct solutions at fixed forcing amplitudes.
    Count,
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let config_path = cli.config.as_ref().ok_or_else(|| {
        Failure::Validation("--config <path> is required".to_string())
    })?;
    let mut config = config::load_config(config_path)?;
    if cli.seed.is_some() {
        config.seed = cli.seed;
    }
    let seed = config.seed;

    match cli.command {
        Command::Spectrum => commands::spectrum(&config, &cli.out),
        Command::Curve => commands::curve(&config, &cli.out),
        Command::Antimax => commands::antimax(&config, &cli.out),
        Command::Fishing => commands::fishing(&config, &cli.out),
        Command::Count => commands::count(&config, &cli.out, seed),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message());
            failure.exit_code()
        }
    }
}

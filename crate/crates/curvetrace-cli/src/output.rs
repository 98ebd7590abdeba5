//! Artifact writers: CSV tables with 17-significant-digit numbers and the
//! versioned JSON summary. Nothing here reads the clock or the
//! environment, so identical inputs produce byte-identical files.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context as _;
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::config::ScenarioConfig;
use crate::Failure;

pub const SCHEMA_VERSION: u32 = 1;

/// Scientific notation with 17 significant digits, enough to round-trip
/// any f64 exactly.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// One CSV table: a header row plus formatted records.
pub struct Csv {
    lines: Vec<String>,
}

impl Csv {
    pub fn new(header: &[&str]) -> Csv {
        Csv { lines: vec![header.join(",")] }
    }

    pub fn row(&mut self, cells: &[String]) {
        self.lines.push(cells.join(","));
    }

    pub fn write(&self, path: &Path) -> Result<(), Failure> {
        let text = self.lines.join("\n") + "\n";
        fs::write(path, text)
            .with_context(|| format!("writing {}", path.display()))
            .map_err(|e| Failure::Validation(format!("{e:#}")))
    }
}

/// A named pass/fail verdict carried into the JSON summary.
#[derive(Serialize)]
pub struct Check {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

pub fn check(name: &'static str, pass: bool, detail: String) -> Check {
    Check { name, pass, detail }
}

pub struct Summary<'a> {
    command: &'static str,
    config: &'a ScenarioConfig,
    headline: Map<String, Value>,
    checks: Vec<Check>,
}

impl<'a> Summary<'a> {
    pub fn new(command: &'static str, config: &'a ScenarioConfig) -> Summary<'a> {
        Summary { command, config, headline: Map::new(), checks: Vec::new() }
    }

    pub fn number(&mut self, key: &str, value: f64) {
        self.headline.insert(key.to_string(), json!(value));
    }

    pub fn value(&mut self, key: &str, value: Value) {
        self.headline.insert(key.to_string(), value);
    }

    pub fn push_check(&mut self, c: Check) {
        self.checks.push(c);
    }

    pub fn write(&self, path: &Path) -> Result<(), Failure> {
        let doc = json!({
            "schema_version": SCHEMA_VERSION,
            "command": self.command,
            "config": serde_json::to_value(self.config).expect("config serializes"),
            "headline": Value::Object(self.headline.clone()),
            "checks": self.checks.iter().map(|c| {
                json!({"name": c.name, "pass": c.pass, "detail": c.detail})
            }).collect::<Vec<_>>(),
        });
        let text = serde_json::to_string_pretty(&doc).expect("summary serializes") + "\n";
        fs::write(path, text)
            .with_context(|| format!("writing {}", path.display()))
            .map_err(|e| Failure::Validation(format!("{e:#}")))
    }
}

/// Resolves the CSV and summary paths for a command inside the output
/// directory, creating the directory if needed.
pub fn artifact_paths(
    out_dir: &Path,
    config: &ScenarioConfig,
    command: &str,
) -> Result<(PathBuf, PathBuf), Failure> {
    fs::create_dir_all(out_dir)
        .with_context(|| format!("creating output directory {}", out_dir.display()))
        .map_err(|e| Failure::Validation(format!("{e:#}")))?;
    let csv_name = config.output.csv.clone().unwrap_or_else(|| format!("{command}.csv"));
    let summary_name = config
        .output
        .summary
        .clone()
        .unwrap_or_else(|| format!("{command}_summary.json"));
    Ok((out_dir.join(csv_name), out_dir.join(summary_name)))
}

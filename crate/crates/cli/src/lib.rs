//! Scenario runner for the audiovisual causal-inference network: loads
//! TOML scenario configs, runs them and writes CSV tables plus a JSON
//! summary per run.

pub mod config;
pub mod error;
pub mod output;
pub mod scenarios;
pub mod sweep;

use std::path::{Path, PathBuf};

pub use config::{ScenarioConfig, ScenarioKind};
pub use error::CliError;
pub use output::{RunOutput, Table};

use output::Cell;

fn echo(cfg: &ScenarioConfig) -> Result<serde_json::Value, CliError> {
    serde_json::to_value(cfg).map_err(|e| CliError::Output(e.to_string()))
}

/// Runs a scenario and writes its outputs under `root/<output dir>`.
pub fn run_config(cfg: &ScenarioConfig, root: &Path) -> Result<(PathBuf, RunOutput), CliError> {
    let out = scenarios::run(cfg)?;
    let dir = root.join(cfg.output_dir());
    out.write(&dir, &echo(cfg)?)?;
    Ok((dir, out))
}

pub fn run_path(path: &Path, root: &Path) -> Result<(PathBuf, RunOutput), CliError> {
    run_config(&ScenarioConfig::load(path)?, root)
}

pub fn figure_config(figure: &str) -> Result<ScenarioConfig, CliError> {
    let text = config::bundled(figure).ok_or_else(|| {
        CliError::Config(format!("unknown figure `{figure}`; expected one of {}", config::FIGURES.join(", ")))
    })?;
    ScenarioConfig::from_toml(text, figure)
}

pub fn run_figure(figure: &str, root: &Path) -> Result<(PathBuf, RunOutput), CliError> {
    run_config(&figure_config(figure)?, root)
}

/// Runs every override combination into `root/<dir>/point_NNN` and writes
/// `index.csv` last.
pub fn run_sweep(base: &ScenarioConfig, overrides: &[String], root: &Path) -> Result<PathBuf, CliError> {
    let parsed = overrides.iter().map(|o| sweep::parse_override(o)).collect::<Result<Vec<_>, _>>()?;
    let points = sweep::expand(base, &parsed)?;
    let dir = root.join(base.output_dir());
    let mut index = Table::new("index", &["point", "overrides", "dir"]);
    for (i, (assignments, cfg)) in points.iter().enumerate() {
        let name = format!("point_{i:03}");
        let out = scenarios::run(cfg)?;
        out.write(&dir.join(&name), &echo(cfg)?)?;
        let desc: Vec<String> = assignments.iter().map(|(k, v)| format!("{k}={v}")).collect();
        index.push(vec![i.into(), Cell::Text(desc.join(";")), Cell::Text(name)]);
    }
    std::fs::create_dir_all(&dir)?;
    index.write(&dir)?;
    Ok(dir)
}

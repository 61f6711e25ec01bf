//! Result tables (CSV) and run summaries (JSON).

use std::path::{Path, PathBuf};

use serde_json::{Map, Value};

use crate::error::CliError;

/// Environment variable naming the output root directory.
pub const OUT_ENV: &str = "AVCAUSAL_OUT";

pub fn output_root() -> PathBuf {
    std::env::var_os(OUT_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("out"))
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(x) if x.is_finite() => format!("{:.6}", if *x == 0.0 { 0.0 } else { *x }),
            Cell::Num(x) => x.to_string(),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: impl Into<String>, header: &[&'static str]) -> Self {
        Self {
            name: name.into(),
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len(), "row width in {}", self.name);
        self.rows.push(row);
    }

    pub fn write(&self, dir: &Path) -> Result<PathBuf, CliError> {
        let path = dir.join(format!("{}.csv", self.name));
        let mut w = csv::Writer::from_path(&path).map_err(|e| CliError::Output(e.to_string()))?;
        w.write_record(&self.header).map_err(|e| CliError::Output(e.to_string()))?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render))
                .map_err(|e| CliError::Output(e.to_string()))?;
        }
        w.flush()?;
        Ok(path)
    }
}

/// Tables plus summary metrics produced by one scenario run.
#[derive(Debug, Clone, Default)]
pub struct RunOutput {
    pub tables: Vec<Table>,
    pub metrics: Map<String, Value>,
    pub warnings: Vec<String>,
}

impl RunOutput {
    pub fn metric(&mut self, key: impl Into<String>, value: impl Into<Value>) {
        self.metrics.insert(key.into(), value.into());
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    /// Writes every table and `summary.json` (metrics plus the resolved
    /// config) into `dir`.
    pub fn write(&self, dir: &Path, config: &Value) -> Result<(), CliError> {
        std::fs::create_dir_all(dir)?;
        for t in &self.tables {
            t.write(dir)?;
        }
        let mut summary = Map::new();
        summary.insert("metrics".into(), Value::Object(self.metrics.clone()));
        summary.insert(
            "warnings".into(),
            Value::Array(self.warnings.iter().cloned().map(Value::String).collect()),
        );
        summary.insert("config".into(), config.clone());
        let text = serde_json::to_string_pretty(&Value::Object(summary)).map_err(|e| CliError::Output(e.to_string()))?;
        std::fs::write(dir.join("summary.json"), text + "\n")?;
        Ok(())
    }
}

/// Rounds for the summary so re-runs print identical text.
pub fn round6(x: f64) -> f64 {
    (x * 1e6).round() / 1e6
}

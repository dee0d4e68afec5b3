use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use crate::error::{CliError, CliResult};

/// Summary of one CLI run, printed to stdout and saved next to the outputs.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub command: Vec<String>,
    pub subcommand: String,
    pub seed: u64,
    pub parameters: BTreeMap<String, Value>,
    pub residuals: BTreeMap<String, Value>,
    pub wall_time_secs: f64,
    pub outputs: Vec<PathBuf>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub details: BTreeMap<String, Value>,
}

impl RunReport {
    pub fn new(command: &[String], subcommand: &str, seed: u64) -> Self {
        RunReport {
            command: command.to_vec(),
            subcommand: subcommand.to_string(),
            seed,
            parameters: BTreeMap::new(),
            residuals: BTreeMap::new(),
            wall_time_secs: 0.0,
            outputs: Vec::new(),
            details: BTreeMap::new(),
        }
    }

    pub fn param(&mut self, key: &str, value: impl Serialize) {
        self.parameters.insert(key.to_string(), json(value));
    }

    pub fn residual(&mut self, key: &str, value: f64) {
        self.residuals.insert(key.to_string(), float(value));
    }

    pub fn detail(&mut self, key: &str, value: impl Serialize) {
        self.details.insert(key.to_string(), json(value));
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report is serializable")
    }

    /// Write `<subcommand>.report.json` into `dir`.
    pub fn save(&self, dir: &Path) -> CliResult<PathBuf> {
        let path = dir.join(format!("{}.report.json", self.subcommand));
        std::fs::write(&path, self.to_json() + "\n")
            .map_err(|e| CliError::data(&format!("cannot write {}", path.display()), e))?;
        Ok(path)
    }
}

pub fn json(value: impl Serialize) -> Value {
    serde_json::to_value(value).expect("value is serializable")
}

/// A float as JSON; non-finite values become strings such as `"inf"`.
pub fn float(v: f64) -> Value {
    if v.is_finite() {
        Value::from(v)
    } else {
        Value::from(v.to_string())
    }
}

pub fn floats(values: &[f64]) -> Value {
    Value::Array(values.iter().copied().map(float).collect())
}

pub fn rows(m: &minplus::TropicalMatrix) -> Value {
    Value::Array((0..m.rows()).map(|i| floats(m.row(i))).collect())
}

//! Run summaries and persistent outputs: one JSON summary, fixed-column CSV
//! data files, and an echo of the resolved configuration. Floats are
//! serialized with 17 significant digits so reruns are byte-identical.

use serde::{Deserialize, Serialize};
use serde_json::Value;
use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

pub const SCHEMA_VERSION: &str = "1";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Check {
    /// acceptance rule identifier, e.g. "rigidity-median-bracket"
    pub rule: String,
    pub value: f64,
    pub lo: f64,
    pub hi: f64,
    pub passed: bool,
}

impl Check {
    pub fn bracket(rule: &str, value: f64, lo: f64, hi: f64) -> Self {
        Self {
            rule: rule.to_string(),
            value,
            lo,
            hi,
            passed: lo <= value && value <= hi,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Aggregate {
    pub metric: String,
    pub median: f64,
    pub mean: f64,
    pub standard_error: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunSummary {
    pub schema_version: String,
    pub command: String,
    pub config: BTreeMap<String, String>,
    pub records: Vec<Value>,
    pub aggregates: Vec<Aggregate>,
    pub checks: Vec<Check>,
    pub wall_seconds: f64,
}

impl RunSummary {
    pub fn new(command: &str, config: BTreeMap<String, String>) -> Self {
        Self {
            schema_version: SCHEMA_VERSION.to_string(),
            command: command.to_string(),
            config,
            records: Vec::new(),
            aggregates: Vec::new(),
            checks: Vec::new(),
            wall_seconds: 0.0,
        }
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn write(&self, dir: &Path) -> std::io::Result<()> {
        std::fs::create_dir_all(dir)?;
        let mut f = std::fs::File::create(dir.join("summary.json"))?;
        serde_json::to_writer_pretty(&mut f, self)?;
        writeln!(f)?;
        Ok(())
    }
}

/// Median / mean / standard error of a sample, as stored in summaries.
pub fn aggregate(metric: &str, values: &[f64]) -> Aggregate {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len();
    let median = if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    };
    let mean = values.iter().sum::<f64>() / n as f64;
    let var = if n > 1 {
        values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64
    } else {
        0.0
    };
    Aggregate {
        metric: metric.to_string(),
        median,
        mean,
        standard_error: (var / n as f64).sqrt(),
    }
}

/// 17-significant-digit float formatting used by every CSV column.
pub fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes `<dir>/data_<name>.csv` with a header row and formatted floats.
pub fn write_csv(
    dir: &Path,
    name: &str,
    header: &[&str],
    rows: &[Vec<f64>],
) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    let mut f = std::fs::File::create(dir.join(format!("data_{name}.csv")))?;
    writeln!(f, "{}", header.join(","))?;
    for row in rows {
        let cells: Vec<String> = row.iter().map(|v| fmt(*v)).collect();
        writeln!(f, "{}", cells.join(","))?;
    }
    Ok(())
}

pub fn write_config_echo(dir: &Path, echo: &str) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("config.echo"), echo)
}

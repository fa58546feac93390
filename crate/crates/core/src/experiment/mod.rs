//! Experiment files, dispatch to the verification modules, and report
//! emission.
//!
//! A report is a pure function of its config: parallel sections collect in
//! input order and wall time is only attached on request.

pub mod config;
pub mod emit;
mod run;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use config::{parse_config, parse_model_file, ExperimentConfig, Format};
pub use emit::{emit, emit_to_vec};
pub use run::run_experiment;

use crate::report::{BoundReport, IdentityResidualReport};

/// One table cell. Non-finite numbers are stored as text so that a JSON
/// round trip is lossless.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Cell {
    Empty,
    Int(i64),
    Num(f64),
    Bool(bool),
    Text(String),
}

impl Cell {
    pub fn num(x: f64) -> Cell {
        if x.is_finite() {
            Cell::Num(x)
        } else {
            Cell::Text(format!("{x}"))
        }
    }
    pub fn opt(x: Option<f64>) -> Cell {
        x.map_or(Cell::Empty, Cell::num)
    }
    pub fn int(i: usize) -> Cell {
        Cell::Int(i as i64)
    }
    pub fn text(s: impl Into<String>) -> Cell {
        Cell::Text(s.into())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }
    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    pub inputs: String,
    pub value: Option<f64>,
    pub bound: Option<f64>,
    pub slack: Option<f64>,
    pub pass: bool,
}

impl CheckRecord {
    pub fn new(name: impl Into<String>, inputs: impl Into<String>, value: f64, bound: f64, slack: f64, pass: bool) -> Self {
        CheckRecord {
            name: name.into(),
            inputs: inputs.into(),
            value: finite(value),
            bound: finite(bound),
            slack: finite(slack),
            pass,
        }
    }
}

impl From<&BoundReport> for CheckRecord {
    fn from(b: &BoundReport) -> Self {
        CheckRecord {
            name: b.bound_name.clone(),
            inputs: b.inputs.clone(),
            value: b.actual_value.and_then(finite),
            bound: finite(b.bound_value),
            slack: finite(b.slack),
            pass: b.pass,
        }
    }
}

impl CheckRecord {
    pub fn from_identity(r: &IdentityResidualReport, inputs: impl Into<String>) -> Self {
        CheckRecord {
            name: r.name.clone(),
            inputs: inputs.into(),
            value: finite(r.lhs),
            bound: finite(r.rhs),
            slack: finite(r.slack()),
            pass: r.pass,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub version: String,
    pub kind: String,
    /// SHA-256 of the compact JSON of `config`.
    pub config_digest: String,
    /// The config with every default filled in.
    pub config: ExperimentConfig,
    /// Resolved values of parameters that the config left implicit.
    pub parameters: BTreeMap<String, String>,
    /// Recorded but not asserted quantities.
    pub observations: BTreeMap<String, f64>,
    pub summary: Summary,
    pub records: Vec<CheckRecord>,
    pub table: Table,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<f64>,
}

impl RunReport {
    pub fn pass(&self) -> bool {
        self.summary.failed == 0
    }

    pub(crate) fn assemble(
        config: &ExperimentConfig,
        parameters: BTreeMap<String, String>,
        observations: BTreeMap<String, f64>,
        records: Vec<CheckRecord>,
        table: Table,
    ) -> Self {
        let passed = records.iter().filter(|r| r.pass).count();
        RunReport {
            version: env!("CARGO_PKG_VERSION").to_string(),
            kind: config.experiment.kind().to_string(),
            config_digest: config_digest(config),
            config: config.clone(),
            parameters,
            observations: observations.into_iter().filter(|(_, v)| v.is_finite()).collect(),
            summary: Summary {
                total: records.len(),
                passed,
                failed: records.len() - passed,
            },
            records,
            table,
            wall_time_ms: None,
        }
    }
}

pub fn config_digest(config: &ExperimentConfig) -> String {
    let bytes = serde_json::to_vec(config).expect("config serializes");
    hex::encode(Sha256::digest(&bytes))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> RunReport {
        let cfg = parse_config(r#"{"experiment": {"kind": "circle", "x_max": 10, "grid": 2}}"#).unwrap();
        let mut t = Table::new(&["a", "b,c", "d"]);
        t.push(vec![Cell::num(0.1), Cell::text("x\"y"), Cell::num(f64::INFINITY)]);
        t.push(vec![Cell::Int(3), Cell::Bool(true), Cell::Empty]);
        let records = vec![
            CheckRecord::new("ok", "x=1", 1.0, 2.0, 1.0, true),
            CheckRecord::new("bad", "x=2", f64::NAN, 2.0, -1.0, false),
        ];
        RunReport::assemble(&cfg, BTreeMap::new(), BTreeMap::from([("m".into(), 1.5)]), records, t)
    }

    #[test]
    fn summary_consistent() {
        let r = sample();
        assert_eq!(r.summary, Summary { total: 2, passed: 1, failed: 1 });
        assert!(!r.pass());
        assert_eq!(r.records[1].value, None);
    }

    #[test]
    fn json_round_trip() {
        let r = sample();
        let bytes = emit_to_vec(&r, Format::Json).unwrap();
        let back: RunReport = serde_json::from_slice(&bytes).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn csv_quoting_and_precision() {
        let text = String::from_utf8(emit_to_vec(&sample(), Format::Csv).unwrap()).unwrap();
        let lines: Vec<&str> = text.split("\r\n").collect();
        assert_eq!(lines[0], "a,\"b,c\",d");
        assert_eq!(lines[1], "1.0000000000000001e-1,\"x\"\"y\",inf");
        assert_eq!(lines[2], "3,true,");
        let empty = RunReport {
            table: Table::new(&["x", "y"]),
            ..sample()
        };
        assert_eq!(String::from_utf8(emit_to_vec(&empty, Format::Csv).unwrap()).unwrap(), "x,y\r\n");
    }
}

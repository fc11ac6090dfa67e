//! Report records and CSV side files.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::{Map, Value};

use crate::scenario::{ExitStatus, Failure, Outcome, Scenario};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, clap::ValueEnum)]
pub enum Units {
    #[default]
    Nats,
    Bits,
}

impl Units {
    pub fn name(self) -> &'static str {
        match self {
            Units::Nats => "nats",
            Units::Bits => "bits",
        }
    }

    pub fn entropy(self, nats: f64) -> f64 {
        match self {
            Units::Nats => nats,
            Units::Bits => nats / std::f64::consts::LN_2,
        }
    }
}

/// JSON number, with non-finite values spelled out as strings.
pub fn num(x: f64) -> Value {
    serde_json::Number::from_f64(x).map(Value::Number).unwrap_or_else(|| {
        Value::String(if x.is_nan() { "nan" } else if x > 0.0 { "inf" } else { "-inf" }.into())
    })
}

pub fn nums(xs: &[f64]) -> Value {
    Value::Array(xs.iter().copied().map(num).collect())
}

fn cell(x: f64) -> String {
    match num(x) {
        Value::String(s) => s,
        v => v.to_string(),
    }
}

/// Numeric series written next to the report.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub kind: &'static str,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(kind: &'static str, header: Vec<String>) -> Self {
        Self { kind, header, rows: Vec::new() }
    }

    pub fn push(&mut self, row: &[f64]) {
        self.rows.push(row.iter().map(|&x| cell(x)).collect());
    }

    pub fn push_labeled(&mut self, label: &str, row: &[f64]) {
        self.rows.push(std::iter::once(label.to_string()).chain(row.iter().map(|&x| cell(x))).collect());
    }

    pub fn file_name(&self, stem: &str) -> String {
        format!("{stem}.{}.csv", self.kind)
    }

    pub fn render(&self) -> Vec<u8> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(&self.header).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row).expect("in-memory write");
        }
        w.into_inner().expect("in-memory flush")
    }
}

/// Accumulates outputs, tolerances and checks for one task run.
#[derive(Debug)]
pub struct ReportBuilder {
    units: Units,
    outputs: Map<String, Value>,
    tolerances: BTreeMap<String, f64>,
    checks: BTreeMap<String, bool>,
    tables: Vec<Table>,
}

impl ReportBuilder {
    pub fn new(units: Units) -> Self {
        Self { units, outputs: Map::new(), tolerances: BTreeMap::new(), checks: BTreeMap::new(), tables: Vec::new() }
    }

    pub fn units(&self) -> Units {
        self.units
    }

    pub fn value(&mut self, key: &str, v: Value) {
        self.outputs.insert(key.to_string(), v);
    }

    pub fn number(&mut self, key: &str, x: f64) {
        self.value(key, num(x));
    }

    /// Entropy or information, converted to the selected units.
    pub fn entropic(&mut self, key: &str, nats: f64) {
        self.number(key, self.units.entropy(nats));
    }

    pub fn tolerance(&mut self, name: &str, tol: f64) {
        self.tolerances.insert(name.to_string(), tol);
    }

    pub fn check(&mut self, name: &str, passed: bool) {
        self.checks.insert(name.to_string(), passed);
    }

    pub fn table(&mut self, table: Table) {
        self.tables.push(table);
    }

    pub fn finish(self, scenario: &Scenario, stem: &str) -> Run {
        let passed = self.checks.values().all(|&c| c);
        let report = Report {
            schema_version: SCHEMA_VERSION,
            task: scenario.task.name(),
            scenario_sha256: scenario.digest.clone(),
            units: self.units.name(),
            tolerances: self.tolerances,
            outputs: self.outputs,
            checks: self.checks,
            passed,
            side_files: self.tables.iter().map(|t| t.file_name(stem)).collect(),
            metadata: scenario.metadata.clone().unwrap_or(Value::Null),
        };
        Run { report, tables: self.tables, stem: stem.to_string() }
    }
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub task: &'static str,
    pub scenario_sha256: String,
    pub units: &'static str,
    pub tolerances: BTreeMap<String, f64>,
    pub outputs: Map<String, Value>,
    pub checks: BTreeMap<String, bool>,
    pub passed: bool,
    pub side_files: Vec<String>,
    pub metadata: Value,
}

/// A finished report plus its side tables.
#[derive(Debug)]
pub struct Run {
    pub report: Report,
    pub tables: Vec<Table>,
    pub stem: String,
}

impl Run {
    pub fn render(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.report).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn status(&self) -> ExitStatus {
        if self.report.passed {
            ExitStatus::Ok
        } else {
            ExitStatus::CheckFailed
        }
    }

    pub fn write_tables(&self, dir: &Path) -> Outcome<()> {
        std::fs::create_dir_all(dir).map_err(|e| io_failure(dir, e))?;
        for t in &self.tables {
            write_atomic(&dir.join(t.file_name(&self.stem)), &t.render())?;
        }
        Ok(())
    }
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure::new(ExitStatus::MissingFile, format!("cannot write {}: {e}", path.display()))
}

/// Writes via a sibling temporary file and a rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Outcome<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| io_failure(path, e))?;
    tmp.write_all(bytes).map_err(|e| io_failure(path, e))?;
    tmp.persist(path).map_err(|e| io_failure(path, e.error))?;
    Ok(())
}

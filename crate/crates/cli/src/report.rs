//! Run reports: `report.json`, one CSV per table, extra text artifacts and a
//! separate `metadata.json` for everything that varies between runs.

use std::fs;
use std::path::Path;
use std::time::Duration;

use serde::Serialize;
use serde_json::Value;

use crate::CliError;

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Cell {
    Int(u64),
    Num(f64),
    Text(String),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Num(x) => sci(*x),
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
    fn from(i: usize) -> Self {
        Cell::Int(i as u64)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Text(if b { "pass" } else { "fail" }.into())
    }
}

/// C `%.12e`: twelve fractional digits and an exponent of at least two digits.
pub fn sci(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.into();
    }
    let s = format!("{x:.12e}");
    let (mantissa, exp) = s.split_once('e').expect("exponent format");
    let exp: i32 = exp.parse().expect("integer exponent");
    format!("{mantissa}e{}{:02}", if exp < 0 { '-' } else { '+' }, exp.abs())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Table {
    pub name: String,
    pub file: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self::with_columns(name, columns.iter().map(|c| c.to_string()).collect())
    }

    pub fn with_columns(name: &str, columns: Vec<String>) -> Self {
        Table { name: name.into(), file: format!("{name}.csv"), columns, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len(), "row width in table {}", self.name);
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<Vec<u8>, CliError> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::csv))?;
        }
        w.into_inner().map_err(|e| CliError::Internal(e.to_string()))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Assertion {
    pub name: String,
    pub value: f64,
    pub limit: f64,
    pub passed: bool,
}

impl Assertion {
    /// Passes when `value < limit`.
    pub fn below(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Assertion { name: name.into(), value, limit, passed: value < limit }
    }

    /// Passes when `value <= limit`.
    pub fn at_most(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Assertion { name: name.into(), value, limit, passed: value <= limit }
    }

    /// Passes when `value == limit` (exact counts).
    pub fn equals(name: impl Into<String>, value: usize, limit: usize) -> Self {
        Assertion { name: name.into(), value: value as f64, limit: limit as f64, passed: value == limit }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunReport {
    pub kind: String,
    pub scenario: Value,
    pub notes: Vec<String>,
    pub tables: Vec<Table>,
    pub assertions: Vec<Assertion>,
    /// Names of extra text files written next to the report.
    pub artifacts: Vec<String>,
    pub passed: bool,
    #[serde(skip)]
    pub texts: Vec<(String, String)>,
}

impl RunReport {
    pub fn new(kind: &str, scenario: Value) -> Self {
        RunReport {
            kind: kind.into(),
            scenario,
            notes: Vec::new(),
            tables: Vec::new(),
            assertions: Vec::new(),
            artifacts: Vec::new(),
            passed: true,
            texts: Vec::new(),
        }
    }

    pub fn assert(&mut self, a: Assertion) {
        self.passed &= a.passed;
        self.assertions.push(a);
    }

    pub fn artifact(&mut self, name: String, contents: String) {
        self.artifacts.push(name.clone());
        self.texts.push((name, contents));
    }

    pub fn to_json(&self) -> Result<String, CliError> {
        let mut s = serde_json::to_string_pretty(self).map_err(|e| CliError::Internal(e.to_string()))?;
        s.push('\n');
        Ok(s)
    }

    pub fn write(&self, dir: &Path) -> Result<(), CliError> {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        let put = |name: &str, bytes: &[u8]| {
            let p = dir.join(name);
            fs::write(&p, bytes).map_err(|e| CliError::io(&p, e))
        };
        put("report.json", self.to_json()?.as_bytes())?;
        for t in &self.tables {
            put(&t.file, &t.to_csv()?)?;
        }
        for (name, text) in &self.texts {
            put(name, text.as_bytes())?;
        }
        Ok(())
    }
}

#[derive(Serialize)]
struct Metadata<'a> {
    tool: &'a str,
    version: &'a str,
    wall_time_seconds: f64,
}

pub fn write_metadata(dir: &Path, wall: Duration) -> Result<(), CliError> {
    let m = Metadata {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        wall_time_seconds: wall.as_secs_f64(),
    };
    let p = dir.join("metadata.json");
    let mut s = serde_json::to_string_pretty(&m).map_err(|e| CliError::Internal(e.to_string()))?;
    s.push('\n');
    fs::write(&p, s).map_err(|e| CliError::io(&p, e))
}

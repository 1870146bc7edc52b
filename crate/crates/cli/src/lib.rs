//! Scenario runner for `cqed-core`: reads a scenario file, runs it through
//! the library and writes `report.json`, CSV tables and `metadata.json`.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

pub mod config;
pub mod report;
pub mod scenarios;

pub use config::{Kind, Scenario};
pub use report::{Assertion, RunReport, Table};

/// Exit status when every step succeeded but an embedded assertion failed.
pub const EXIT_ASSERTION: u8 = 4;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("parse error at line {line}, column {column}{}: {message}", field.as_ref().map(|f| format!(" (field `{f}`)")).unwrap_or_default())]
    Parse { line: usize, column: usize, field: Option<String>, message: String },
    #[error("validation error: field `{field}` {message}")]
    Validation { field: String, message: String },
    #[error("unknown scenario kind `{0}`; run `cqed list` for the available kinds")]
    UnknownKind(String),
    #[error(transparent)]
    Core(#[from] cqed_core::Error),
    #[error("cannot access {}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.to_path_buf(), source }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Parse { .. } => 2,
            CliError::Validation { .. } | CliError::UnknownKind(_) => 3,
            _ => 5,
        }
    }
}

/// Parses, runs and writes one scenario.
pub fn run(file: &Path, out: &Path) -> Result<RunReport, CliError> {
    let start = Instant::now();
    let text = std::fs::read_to_string(file).map_err(|e| CliError::io(file, e))?;
    let scenario = Scenario::parse(&text)?;
    let report = scenarios::run_scenario(&scenario)?;
    report.write(out)?;
    report::write_metadata(out, start.elapsed())?;
    Ok(report)
}

pub fn list() -> String {
    let mut s = String::new();
    for k in Kind::ALL {
        let _ = writeln!(s, "{:<22} {}", k.name(), k.summary());
    }
    s
}

pub fn describe(kind: &str) -> Result<String, CliError> {
    Ok(kind.parse::<Kind>()?.describe())
}

//! Run reports and CSV tables.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::spec::ProblemSpec;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Everything a run produced. No timings or other run-dependent data, so that the
/// same specification and version always serialize to the same bytes.
#[derive(Debug, Serialize)]
pub struct RunReport {
    pub version: &'static str,
    pub config_hash: String,
    pub task: String,
    pub inputs: Value,
    pub results: Value,
    pub diagnostics: Value,
}

/// SHA-256 of the canonical (key-sorted) JSON of version and specification.
pub fn config_hash(spec: &ProblemSpec) -> String {
    let canonical = json!({ "version": VERSION, "spec": spec });
    let digest = Sha256::digest(canonical.to_string().as_bytes());
    digest.iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

impl RunReport {
    pub fn new(spec: &ProblemSpec, results: Value, diagnostics: Value) -> Self {
        Self {
            version: VERSION,
            config_hash: config_hash(spec),
            task: spec.task.to_string(),
            inputs: serde_json::to_value(spec).expect("spec serializes"),
            results,
            diagnostics,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// A numeric table written as `<name>.csv`; complex values occupy `_re`/`_im` column pairs.
#[derive(Debug, Clone)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Self::with_header(name, header.iter().map(|h| h.to_string()).collect())
    }

    pub fn with_header(name: &str, header: Vec<String>) -> Self {
        Self {
            name: name.to_string(),
            header,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    /// Comma-separated, header first, LF line endings, shortest round-trip floats.
    pub fn to_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(&self.header).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row.iter().map(|v| v.to_string())).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ASCII output")
    }

    pub fn write_to(&self, dir: &Path) -> std::io::Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join(format!("{}.csv", self.name)), self.to_csv())
    }
}

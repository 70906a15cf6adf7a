//! Output files: RFC 4180 CSV tables and the JSON result bundle.

use crate::error::Result;
use serde::Serialize;
use std::fs;
use std::path::Path;

pub const SCHEMA_VERSION: u32 = 1;
pub const SUMMARY_FILE: &str = "summary.json";

/// Summary of one command run. Output paths are relative to the output
/// directory so the bundle is identical wherever it is written.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultBundle {
    pub schema_version: u32,
    pub command: String,
    pub scenario: String,
    pub seed: u64,
    pub version: String,
    pub outputs: Vec<String>,
    pub warnings: Vec<String>,
    pub metrics: serde_json::Value,
}

impl ResultBundle {
    pub fn new(command: &str, scenario: &str, seed: u64) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            command: command.to_string(),
            scenario: scenario.to_string(),
            seed,
            version: crate::VERSION.to_string(),
            outputs: Vec::new(),
            warnings: Vec::new(),
            metrics: serde_json::Value::Null,
        }
    }

    /// Writes the bundle as `summary.json` and records it among the outputs.
    pub fn write(&mut self, dir: &Path) -> Result<()> {
        self.outputs.push(SUMMARY_FILE.to_string());
        write_json(&dir.join(SUMMARY_FILE), self)
    }
}

/// Formats a value for CSV: shortest round-trip decimal, `.` separator.
pub fn num(x: f64) -> String {
    format!("{x}")
}

/// A table with a header row and string cells.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn write_to<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(&self.header)?;
        for r in &self.rows {
            out.write_record(r)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        self.write_to(fs::File::create(path)?)
    }
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

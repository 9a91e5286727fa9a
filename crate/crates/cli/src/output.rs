//! Rendering of run records as JSON or CSV.

use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use crate::args::Format;

/// Rows for CSV output. Every numeric row carries its error estimate.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub headers: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(headers: &[&'static str]) -> Self {
        Self {
            headers: headers.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.headers.len());
        self.rows.push(row);
    }
}

/// Result of one subcommand.
pub struct Outcome {
    pub config: Value,
    pub result: Value,
    pub table: Table,
    /// `Some(false)` makes the process exit with status 1.
    pub passed: Option<bool>,
}

#[derive(Serialize)]
struct Record<'a> {
    config: &'a Value,
    result: &'a Value,
}

/// Shortest round-trip form, switching to exponent notation for tiny or huge values.
pub fn num(x: f64) -> String {
    let m = x.abs();
    if m == 0.0 || (1e-4..1e15).contains(&m) || !x.is_finite() {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

pub fn opt<T: ToString>(x: Option<T>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

pub fn render(outcome: &Outcome, format: Format) -> Result<Vec<u8>, Box<dyn std::error::Error>> {
    match format {
        Format::Json => {
            let mut buf = serde_json::to_vec_pretty(&Record {
                config: &outcome.config,
                result: &outcome.result,
            })?;
            buf.push(b'\n');
            Ok(buf)
        }
        Format::Csv => {
            // the resolved config rides along as a comment line
            let mut buf = format!("# config {}\n", serde_json::to_string(&outcome.config)?).into_bytes();
            let mut w = csv::Writer::from_writer(&mut buf);
            w.write_record(&outcome.table.headers)?;
            for row in &outcome.table.rows {
                w.write_record(row)?;
            }
            w.flush()?;
            drop(w);
            Ok(buf)
        }
    }
}

pub fn emit(bytes: &[u8], out: Option<&Path>) -> std::io::Result<()> {
    match out {
        Some(path) => std::fs::write(path, bytes),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(bytes)?;
            stdout.flush()
        }
    }
}

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::config::Experiment;
use crate::error::Result;

/// A named numeric table, written as one CSV file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self { name: name.into(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[j]).collect())
    }

    /// RFC 4180 CSV with a header row; 17 significant digits so values round-trip.
    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(Vec::new());
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|v| format_float(*v)))?;
        }
        Ok(w.into_inner().map_err(|e| std::io::Error::other(e.to_string()))?)
    }
}

pub fn format_float(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        v.to_string()
    }
}

/// Measured quantity next to what it is compared with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub expected: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    /// `|measured - expected| ≤ tolerance`.
    pub fn abs(name: &str, measured: f64, expected: f64, tolerance: f64) -> Self {
        let pass = (measured - expected).abs() <= tolerance;
        Self { name: name.into(), measured, expected, tolerance, pass }
    }

    /// `|measured - expected| ≤ tolerance·|expected|`.
    pub fn rel(name: &str, measured: f64, expected: f64, tolerance: f64) -> Self {
        let pass = (measured - expected).abs() <= tolerance * expected.abs();
        Self { name: name.into(), measured, expected, tolerance, pass }
    }

    /// `measured ≤ bound`; recorded with `expected = bound`, `tolerance = 0`.
    pub fn at_most(name: &str, measured: f64, bound: f64) -> Self {
        Self { name: name.into(), measured, expected: bound, tolerance: 0.0, pass: measured <= bound }
    }

    /// `measured ≥ bound`.
    pub fn at_least(name: &str, measured: f64, bound: f64) -> Self {
        Self { name: name.into(), measured, expected: bound, tolerance: 0.0, pass: measured >= bound }
    }

    pub fn flag(name: &str, ok: bool) -> Self {
        let v = if ok { 1.0 } else { 0.0 };
        Self { name: name.into(), measured: v, expected: 1.0, tolerance: 0.0, pass: ok }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub experiment: Experiment,
    pub inputs: Value,
    pub tables: Vec<Table>,
    pub claim: String,
    pub checks: Vec<Check>,
    pub pass: bool,
    /// Free-form scalars worth keeping in the summary.
    pub summary: Value,
}

impl ResultRecord {
    pub fn new(experiment: Experiment, inputs: Value, claim: &str) -> Self {
        Self {
            experiment,
            inputs,
            tables: Vec::new(),
            claim: claim.into(),
            checks: Vec::new(),
            pass: true,
            summary: Value::Null,
        }
    }

    pub fn check(&mut self, c: Check) {
        self.pass &= c.pass;
        self.checks.push(c);
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    /// Writes `<slug>_<table>.csv` for every table and `<slug>_summary.json`.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir)?;
        let slug = self.experiment.slug();
        let mut written = Vec::new();
        for t in &self.tables {
            let path = dir.join(format!("{slug}_{}.csv", t.name));
            fs::write(&path, t.to_csv()?)?;
            written.push(path);
        }
        let summary = serde_json::json!({
            "experiment": self.experiment,
            "inputs": self.inputs,
            "claim": self.claim,
            "pass": self.pass,
            "checks": self.checks,
            "summary": self.summary,
            "tables": self.tables.iter().map(|t| &t.name).collect::<Vec<_>>(),
        });
        let path = dir.join(format!("{slug}_summary.json"));
        fs::write(&path, serde_json::to_string_pretty(&summary)?)?;
        written.push(path);
        Ok(written)
    }
}

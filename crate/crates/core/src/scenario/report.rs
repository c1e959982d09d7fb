use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::dynamics::DecayFit;
use crate::error::{GeoError, Result};

use super::config::ScenarioId;

/// How a measured value is compared with its prediction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Check {
    /// `|measured − predicted| / |predicted| ≤ tolerance`.
    Relative,
    /// `|measured − predicted| ≤ tolerance`.
    Absolute,
    /// `measured ≤ predicted + tolerance`.
    AtMost,
    /// `measured ≥ predicted − tolerance`.
    AtLeast,
    /// `measured < predicted` strictly.
    Below,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Criterion {
    pub name: String,
    pub check: Check,
    pub measured: f64,
    pub predicted: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub note: String,
}

impl Criterion {
    pub fn new(
        name: &str,
        check: Check,
        measured: f64,
        predicted: f64,
        tolerance: f64,
        note: &str,
    ) -> Self {
        let passed = match check {
            Check::Relative => (measured - predicted).abs() <= tolerance * predicted.abs(),
            Check::Absolute => (measured - predicted).abs() <= tolerance,
            Check::AtMost => measured <= predicted + tolerance,
            Check::AtLeast => measured >= predicted - tolerance,
            Check::Below => measured < predicted,
        };
        Criterion {
            name: name.to_string(),
            check,
            measured,
            predicted,
            tolerance,
            passed: passed && measured.is_finite(),
            note: note.to_string(),
        }
    }

    /// One human-readable line.
    pub fn summary(&self) -> String {
        let rel = match self.check {
            Check::Relative => "within",
            Check::Absolute => "±",
            Check::AtMost => "≤ +",
            Check::AtLeast => "≥ −",
            Check::Below => "<",
        };
        let tol = match self.check {
            Check::Relative => format!("{:.0}%", self.tolerance * 100.0),
            Check::Below => String::new(),
            _ => format!("{:.1e}", self.tolerance),
        };
        format!(
            "{} {}: measured {:.6e}, predicted {:.6e} ({rel} {tol})",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.measured,
            self.predicted
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NamedFit {
    pub label: String,
    pub fit: DecayFit,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PredictedRate {
    pub label: String,
    pub rate: f64,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub scenario: ScenarioId,
    pub name: String,
    pub seed: u64,
    pub prng: String,
    pub fits: Vec<NamedFit>,
    pub predicted: Vec<PredictedRate>,
    pub criteria: Vec<Criterion>,
    pub diagnostics: BTreeMap<String, f64>,
    pub wall_time_s: f64,
    pub passed: bool,
    /// Files written by the run, if any.
    pub outputs: Vec<PathBuf>,
}

impl RunReport {
    pub fn fit(&self, label: &str) -> Option<&DecayFit> {
        self.fits.iter().find(|f| f.label == label).map(|f| &f.fit)
    }

    pub fn criterion(&self, name: &str) -> Option<&Criterion> {
        self.criteria.iter().find(|c| c.name == name)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| GeoError::Io(e.to_string()))
    }
}

/// Time series written as CSV. The first column is `t`, the second
/// `distance`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(extra: &[&str]) -> Self {
        let mut columns = vec!["t".to_string(), "distance".to_string()];
        columns.extend(extra.iter().map(|s| s.to_string()));
        Table {
            columns,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            for (i, x) in row.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                let _ = write!(out, "{x:.16e}");
            }
            out.push('\n');
        }
        out
    }
}

pub(crate) fn write_outputs(
    dir: &Path,
    name: &str,
    table: &Table,
    report: &mut RunReport,
) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| GeoError::Io(format!("{}: {e}", dir.display())))?;
    let csv = dir.join(format!("{name}.csv"));
    let json = dir.join(format!("{name}.json"));
    report.outputs = vec![csv.clone(), json.clone()];
    std::fs::write(&csv, table.to_csv())
        .map_err(|e| GeoError::Io(format!("{}: {e}", csv.display())))?;
    std::fs::write(&json, report.to_json()?)
        .map_err(|e| GeoError::Io(format!("{}: {e}", json.display())))?;
    Ok(())
}

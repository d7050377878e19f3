//! Verification records and the versioned report document.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

/// One evaluated point of a check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub index: usize,
    /// Base point (or abscissa for one-dimensional sweeps).
    pub x: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub y: Vec<f64>,
    /// `None` when the evaluation failed; `error` says why.
    pub residual: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl SampleRecord {
    pub fn ok(index: usize, x: Vec<f64>, y: Vec<f64>, residual: f64) -> Self {
        SampleRecord {
            index,
            x,
            y,
            residual: Some(residual),
            error: None,
        }
    }

    pub fn failed(index: usize, x: Vec<f64>, y: Vec<f64>, err: &Error) -> Self {
        SampleRecord {
            index,
            x,
            y,
            residual: None,
            error: Some(err.to_string()),
        }
    }
}

/// Residual statistics of one named check against its tolerance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    pub samples: usize,
    pub max_residual: f64,
    pub mean_residual: f64,
    pub tolerance: f64,
    /// `max_residual < tolerance` and no sample failed.
    pub pass: bool,
    pub errors: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub points: Vec<SampleRecord>,
}

impl CheckRecord {
    /// Aggregates per-sample results; points are sorted by index so the
    /// outcome does not depend on evaluation order.
    pub fn from_samples(name: impl Into<String>, tolerance: f64, seed: Option<u64>, mut points: Vec<SampleRecord>) -> Self {
        points.sort_by_key(|p| p.index);
        let vals: Vec<f64> = points.iter().filter_map(|p| p.residual).collect();
        let errors = points.len() - vals.len();
        let max = vals.iter().copied().fold(0.0_f64, f64::max);
        let mean = if vals.is_empty() {
            0.0
        } else {
            vals.iter().sum::<f64>() / vals.len() as f64
        };
        CheckRecord {
            name: name.into(),
            samples: points.len(),
            max_residual: max,
            mean_residual: mean,
            tolerance,
            pass: errors == 0 && !vals.is_empty() && max < tolerance,
            errors,
            seed,
            points,
        }
    }

    /// A check whose residuals are plain numbers without sample coordinates.
    pub fn from_residuals(name: impl Into<String>, tolerance: f64, residuals: &[f64]) -> Self {
        let points = residuals
            .iter()
            .enumerate()
            .map(|(i, r)| SampleRecord::ok(i, Vec::new(), Vec::new(), *r))
            .collect();
        Self::from_samples(name, tolerance, None, points)
    }

    /// Drops the per-point detail, keeping the statistics.
    pub fn summarized(mut self) -> Self {
        self.points.clear();
        self
    }

    /// Residuals of the points that evaluated.
    pub fn residuals(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().filter_map(|p| p.residual)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
    pub all_pass: bool,
}

impl Summary {
    pub fn of(checks: &[CheckRecord]) -> Self {
        let passed = checks.iter().filter(|c| c.pass).count();
        Summary {
            total: checks.len(),
            passed,
            failed: checks.len() - passed,
            all_pass: passed == checks.len(),
        }
    }
}

/// Non-deterministic run information, kept apart from the report body.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Meta {
    pub version: String,
    pub elapsed_ms: Vec<(String, f64)>,
}

impl Default for Meta {
    fn default() -> Self {
        Meta {
            version: env!("CARGO_PKG_VERSION").to_string(),
            elapsed_ms: Vec::new(),
        }
    }
}

/// The report document. `config`, `checks` and `summary` form the body,
/// which is byte-identical across runs with the same config and seed;
/// `meta` carries version and wall-clock timings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub schema: u32,
    pub config: serde_json::Value,
    pub checks: Vec<CheckRecord>,
    pub summary: Summary,
    /// Checks that were selected but do not apply, with the reason.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    #[serde(default)]
    pub meta: Meta,
}

#[derive(Serialize)]
struct Body<'a> {
    schema: u32,
    config: &'a serde_json::Value,
    checks: &'a [CheckRecord],
    summary: &'a Summary,
    #[serde(skip_serializing_if = "<[String]>::is_empty")]
    notes: &'a [String],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Text,
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(Format::Json),
            "text" => Ok(Format::Text),
            other => Err(Error::InvalidParameter(format!("unknown format {other:?}"))),
        }
    }
}

impl VerificationReport {
    pub fn new(config: serde_json::Value, checks: Vec<CheckRecord>) -> Self {
        let summary = Summary::of(&checks);
        VerificationReport {
            schema: SCHEMA_VERSION,
            config,
            checks,
            summary,
            notes: Vec::new(),
            meta: Meta::default(),
        }
    }

    pub fn all_pass(&self) -> bool {
        self.summary.all_pass
    }

    pub fn check(&self, name: &str) -> Option<&CheckRecord> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// The deterministic part, serialized.
    pub fn body_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&Body {
            schema: self.schema,
            config: &self.config,
            checks: &self.checks,
            summary: &self.summary,
            notes: &self.notes,
        })?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    /// One line per check, residuals in scientific notation.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let width = self.checks.iter().map(|c| c.name.len()).max().unwrap_or(5).max(5);
        let _ = writeln!(
            out,
            "{:<width$}  {:>7}  {:>10}  {:>10}  {:>10}  result",
            "check", "samples", "max", "mean", "tol"
        );
        for c in &self.checks {
            let _ = writeln!(
                out,
                "{:<width$}  {:>7}  {:>10.3e}  {:>10.3e}  {:>10.3e}  {}",
                c.name,
                c.samples,
                c.max_residual,
                c.mean_residual,
                c.tolerance,
                if c.pass { "PASS" } else { "FAIL" }
            );
        }
        for n in &self.notes {
            let _ = writeln!(out, "note: {n}");
        }
        let s = &self.summary;
        let _ = writeln!(out, "total {}  passed {}  failed {}", s.total, s.passed, s.failed);
        out
    }

    pub fn render(&self, format: Format) -> Result<String> {
        match format {
            Format::Json => self.to_json(),
            Format::Text => Ok(self.to_text()),
        }
    }
}

/// Writes the rendered report to `path`.
pub fn emit(report: &VerificationReport, format: Format, path: &Path) -> Result<()> {
    let text = report.render(format)?;
    std::fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

//! Declarative run configuration: one JSON document per run.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::abmetric::Sampler;
use crate::atlas::FamilySpec;
use crate::deform::ProfileSpec;
use crate::error::{Error, Result};
use crate::phifun::PhiSpec;

/// Checks `verify` can run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    Douglas,
    DouglasFd,
    Berwald,
    Lss,
    Conformal,
    Ode,
    Eta,
    Invariants,
}

impl CheckKind {
    pub const ALL: [CheckKind; 8] = [
        CheckKind::Douglas,
        CheckKind::DouglasFd,
        CheckKind::Berwald,
        CheckKind::Lss,
        CheckKind::Conformal,
        CheckKind::Ode,
        CheckKind::Eta,
        CheckKind::Invariants,
    ];
}

fn default_checks() -> Vec<CheckKind> {
    vec![CheckKind::Douglas]
}

/// Tolerances per check; `tol` on [`RunConfig`] is the Douglas (AD) one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    pub fd: f64,
    pub berwald: f64,
    pub conformal: f64,
    pub lss: f64,
    pub ode: f64,
    pub eta: f64,
    pub invariants: f64,
    pub deform: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            fd: 1e-4,
            berwald: 1e-6,
            conformal: 1e-8,
            lss: 1e-8,
            ode: 1e-10,
            eta: 1e-8,
            invariants: 1e-12,
            deform: 1e-6,
        }
    }
}

/// Factors for the `deform` subcommand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeformSpec {
    pub kappa: ProfileSpec,
    pub rho: ProfileSpec,
    pub nu: ProfileSpec,
    /// Upper bound on `b^2` over the sampled chart.
    #[serde(default = "default_b2_max")]
    pub b2_max: f64,
}

fn default_b2_max() -> f64 {
    0.9
}

fn default_n() -> usize {
    3
}

fn default_samples() -> usize {
    25
}

fn default_radius() -> f64 {
    0.5
}

fn default_tol() -> f64 {
    1e-6
}

fn default_grid() -> usize {
    101
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(flatten)]
    pub family: FamilySpec,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub seed: u64,
    /// Base points are drawn from `|x| <= radius`.
    #[serde(default = "default_radius")]
    pub radius: f64,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default = "default_checks")]
    pub checks: Vec<CheckKind>,
    /// Grid size for one-variable sweeps.
    #[serde(default = "default_grid")]
    pub grid: usize,
    /// Profile for the `phi` subcommand; the family's own profile otherwise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<PhiSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deform: Option<DeformSpec>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            n: default_n(),
            family: FamilySpec::Berwald,
            samples: default_samples(),
            seed: 0,
            radius: default_radius(),
            tol: default_tol(),
            tolerances: Tolerances::default(),
            checks: default_checks(),
            grid: default_grid(),
            phi: None,
            deform: None,
        }
    }
}

fn positive(name: &str, v: f64, bad: &mut Vec<String>) {
    if !(v > 0.0 && v.is_finite()) {
        bad.push(format!("{name}: must be positive and finite, got {v}"));
    }
}

impl RunConfig {
    pub fn from_json(s: &str) -> Result<Self> {
        let c: RunConfig = serde_json::from_str(s)?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let s = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&s)
    }

    pub fn sampler(&self) -> Sampler {
        Sampler::new(self.samples, self.seed).with_radius(self.radius)
    }

    /// Collects every offending field rather than stopping at the first.
    pub fn validate(&self) -> Result<()> {
        let mut bad = Vec::new();
        if self.n < 2 {
            bad.push(format!("n: must be at least 2, got {}", self.n));
        }
        if self.samples < 1 {
            bad.push("samples: must be at least 1".to_string());
        }
        if self.grid < 2 {
            bad.push(format!("grid: must be at least 2, got {}", self.grid));
        }
        positive("radius", self.radius, &mut bad);
        positive("tol", self.tol, &mut bad);
        let t = &self.tolerances;
        for (name, v) in [
            ("tolerances.fd", t.fd),
            ("tolerances.berwald", t.berwald),
            ("tolerances.conformal", t.conformal),
            ("tolerances.lss", t.lss),
            ("tolerances.ode", t.ode),
            ("tolerances.eta", t.eta),
            ("tolerances.invariants", t.invariants),
            ("tolerances.deform", t.deform),
        ] {
            positive(name, v, &mut bad);
        }
        if self.checks.is_empty() {
            bad.push("checks: select at least one check".to_string());
        }
        if let Some(d) = &self.deform {
            positive("deform.b2_max", d.b2_max, &mut bad);
            for (name, p) in [("deform.kappa", &d.kappa), ("deform.rho", &d.rho), ("deform.nu", &d.nu)] {
                if let Err(e) = p.validate() {
                    bad.push(format!("{name}: {e}"));
                }
            }
        }
        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::Config { fields: bad })
        }
    }
}

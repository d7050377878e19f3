use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{berwald_tensor, douglas_tensor, douglas_tensor_fd, AbMetric, FinslerFunction, Sample, Sampler};
use super::tensors::DEFAULT_DOUGLAS_FD_STEP;
use crate::error::{Error, Result};
use crate::geometry::{check_douglas_condition, covariant_derivative, MetricRef, OneFormRef};
use crate::phifun::{series_from_params, PhiParams, DEFAULT_TRUNCATION};
use crate::report::{CheckRecord, SampleRecord};

/// How the Douglas tensor is differentiated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DouglasPath {
    Ad,
    Fd,
}

fn run_samples<F>(name: &str, tol: f64, sampler: &Sampler, samples: &[Sample], eval: F) -> CheckRecord
where
    F: Fn(&Sample) -> Result<f64> + Sync,
{
    let points: Vec<SampleRecord> = samples
        .par_iter()
        .map(|s| match eval(s) {
            Ok(r) => SampleRecord::ok(s.index, s.x.clone(), s.y.clone(), r),
            Err(e) => SampleRecord::failed(s.index, s.x.clone(), s.y.clone(), &e),
        })
        .collect();
    CheckRecord::from_samples(name, tol, Some(sampler.seed), points)
}

fn draw(f: &dyn FinslerFunction, sampler: &Sampler) -> Result<Vec<Sample>> {
    sampler.draw(f.dim(), |x, y| f.admissible(x, y))
}

/// Samples the Douglas tensor; the residual per sample is
/// `max |D| / (1 + max |G|)`.
pub fn is_douglas(f: &dyn FinslerFunction, sampler: &Sampler, tol: f64) -> Result<CheckRecord> {
    is_douglas_with(f, sampler, tol, DouglasPath::Ad)
}

pub fn is_douglas_with(f: &dyn FinslerFunction, sampler: &Sampler, tol: f64, path: DouglasPath) -> Result<CheckRecord> {
    let samples = draw(f, sampler)?;
    Ok(douglas_on(f, sampler, &samples, tol, path))
}

fn douglas_on(f: &dyn FinslerFunction, sampler: &Sampler, samples: &[Sample], tol: f64, path: DouglasPath) -> CheckRecord {
    let name = match path {
        DouglasPath::Ad => "douglas",
        DouglasPath::Fd => "douglas_fd",
    };
    run_samples(name, tol, sampler, samples, |s| {
        let d = match path {
            DouglasPath::Ad => douglas_tensor(f, &s.x, &s.y)?,
            DouglasPath::Fd => douglas_tensor_fd(f, &s.x, &s.y, DEFAULT_DOUGLAS_FD_STEP)?,
        };
        Ok(d.normalized())
    })
}

/// Samples the third `y`-derivatives of `G^i` (no trace correction),
/// normalized like [`is_douglas`].
pub fn is_berwald(f: &dyn FinslerFunction, sampler: &Sampler, tol: f64) -> Result<CheckRecord> {
    let samples = draw(f, sampler)?;
    Ok(run_samples("berwald", tol, sampler, &samples, |s| {
        let (b, g) = berwald_tensor(f, &s.x, &s.y)?;
        let max_b = b.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let max_g = g.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        Ok(max_b / (1.0 + max_g))
    }))
}

/// Both residual streams of the Li-Shen-Shen criterion on the same samples.
#[derive(Debug, Clone, PartialEq)]
pub struct LssReport {
    /// Residual of `b_{i|j} = tau {(1 + k1 b^2) a_ij + (k3 + k2 b^2) b_i b_j}`.
    pub condition: CheckRecord,
    /// [`is_douglas`] on the assembled metric with `phi` solving the ODE.
    pub douglas: CheckRecord,
}

impl LssReport {
    /// The two verdicts coincide.
    pub fn agree(&self) -> bool {
        self.condition.pass == self.douglas.pass
    }

    pub fn records(&self) -> Vec<CheckRecord> {
        let agree = CheckRecord::from_residuals("lss_agreement", 0.5, &[if self.agree() { 0.0 } else { 1.0 }]);
        let mut douglas = self.douglas.clone();
        douglas.name = "lss_douglas".into();
        vec![self.condition.clone(), douglas, agree]
    }
}

/// Checks the 1-form condition at sampled points and cross-validates it
/// against the Douglas tensor of `alpha phi(beta / alpha)`, with `phi` the
/// series solution for `p`.
pub fn lss_criterion(a: MetricRef, b: OneFormRef, p: &PhiParams, sampler: &Sampler, tol: f64) -> Result<LssReport> {
    if p.is_randers() {
        return Err(Error::Precondition(format!(
            "Randers-type constants (k2 = k1 k3): ({}, {}, {})",
            p.k1, p.k2, p.k3
        )));
    }
    let phi = series_from_params(p, DEFAULT_TRUNCATION);
    let m = AbMetric::with_params(a.clone(), b.clone(), std::sync::Arc::new(phi), p)?;
    let samples = draw(&m, sampler)?;
    let mut parallel = true;
    for s in &samples {
        if covariant_derivative(&*b, &*a, &s.x)?.max_abs_full() > 1e-12 {
            parallel = false;
            break;
        }
    }
    if parallel {
        return Err(Error::Precondition("beta is parallel at every sample".into()));
    }
    let condition = run_samples("lss_condition", tol, sampler, &samples, |s| {
        Ok(check_douglas_condition(&*a, &*b, p.k1, p.k2, p.k3, &s.x, tol)?.residual)
    });
    let douglas = douglas_on(&m, sampler, &samples, tol, DouglasPath::Ad);
    Ok(LssReport { condition, douglas })
}

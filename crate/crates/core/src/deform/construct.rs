//! Douglas data `(alpha, beta)` from a seed `(alpha_bar, beta_bar)` with
//! `beta_bar` closed and conformal, by rescalings depending on `bbar^2`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::eta::eta_jet;
use crate::abmetric::Sampler;
use crate::diffkit::{constants, Jet};
use crate::error::{domain, Error, Result};
use crate::geometry::{check_conformal, norm_sq_jet, MetricField, MetricRef, OneFormField, OneFormRef};

/// Which reduced family a classification scaling belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Theorem1Case {
    /// `(1 - bbar^2)^{-sigma - 1/2}`
    A,
    /// `e^{sigma bbar^2}`
    B,
    /// `exp(-sigma / (2 sqrt(1 - sigma^2)) arctan((sigma + bbar^2) / sqrt(1 - sigma^2)))
    ///  / (1 + 2 sigma bbar^2 + bbar^4)^{1/4}`
    C,
}

/// How `(alpha, beta)` is obtained from the seed and `bbar^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum BarScaling {
    /// `alpha = eta sqrt(abar^2 - (k1 + k3 + k2 t) / D(t) bbar^2)`,
    /// `beta = eta / sqrt(D(t)) bbar`, with `D(t) = 1 + (k1 + k3) t + k2 t^2`.
    Thm2 { k1: f64, k2: f64, k3: f64 },
    /// `alpha = eta abar`, `beta = eta bbar`.
    Thm3 { k1: f64, k2: f64, k3: f64 },
    /// Both scaled by the classification factor.
    Thm1 { case: Theorem1Case, sigma: f64 },
}

/// The classification scaling factor on a jet `t = bbar^2`, kept exactly
/// as printed (case C is not normalized to 1 at `t = 0`).
pub fn theorem1_factor(case: Theorem1Case, sigma: f64, t: &Jet) -> Result<Jet> {
    match case {
        Theorem1Case::A => {
            let w = 1.0 - t;
            if !(w.value() > 0.0) {
                return Err(domain(format!("bbar^2 = {} must be below 1", t.value())));
            }
            w.powf(-sigma - 0.5)
        }
        Theorem1Case::B => Ok((t * sigma).exp()),
        Theorem1Case::C => {
            let r = (1.0 - sigma * sigma).sqrt();
            let arg = (&(t + sigma) / r).atan();
            let num = (arg * (-sigma / (2.0 * r))).exp();
            let den = &(&t.square() + &(t * (2.0 * sigma))) + 1.0;
            Ok(&num / &den.powf(0.25)?)
        }
    }
}

fn validate_sigma(case: Theorem1Case, sigma: f64) -> Result<()> {
    let ok = match case {
        Theorem1Case::A => sigma != 0.0 && sigma != -0.5 && sigma.is_finite(),
        Theorem1Case::B => sigma == 1.0 || sigma == -1.0,
        Theorem1Case::C => sigma.abs() < 1.0,
    };
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("sigma = {sigma} not allowed in case {case:?}")))
    }
}

impl BarScaling {
    fn denominator(k1: f64, k2: f64, k3: f64, t: &Jet) -> Result<Jet> {
        let d = &(&(&t.square() * k2) + &(t * (k1 + k3))) + 1.0;
        if !(d.value() > 0.0) {
            return Err(domain(format!("1 + (k1 + k3) t + k2 t^2 = {} is not positive", d.value())));
        }
        Ok(d)
    }

    /// `(a_ij, b_i)` from the seed components.
    fn apply(&self, ab: &[Jet], bb: &[Jet]) -> Result<(Vec<Jet>, Vec<Jet>)> {
        let t = norm_sq_jet(ab, bb)?;
        let n = bb.len();
        match *self {
            BarScaling::Thm2 { k1, k2, k3 } => {
                let d = Self::denominator(k1, k2, k3, &t)?;
                let eta = eta_jet(k1, k2, k3, &t)?;
                let e2 = eta.square();
                let c = &(&(&t * k2) + (k1 + k3)) / &d;
                let mut a = Vec::with_capacity(n * n);
                for i in 0..n {
                    for j in 0..n {
                        a.push(&e2 * &(&ab[i * n + j] - &(&c * &(&bb[i] * &bb[j]))));
                    }
                }
                let scale = &eta / &d.sqrt()?;
                Ok((a, bb.iter().map(|v| &scale * v).collect()))
            }
            BarScaling::Thm3 { k1, k2, k3 } => {
                Self::denominator(k1, k2, k3, &t)?;
                let eta = eta_jet(k1, k2, k3, &t)?;
                Ok(scale_both(&eta, ab, bb))
            }
            BarScaling::Thm1 { case, sigma } => Ok(scale_both(&theorem1_factor(case, sigma, &t)?, ab, bb)),
        }
    }
}

fn scale_both(f: &Jet, ab: &[Jet], bb: &[Jet]) -> (Vec<Jet>, Vec<Jet>) {
    let f2 = f.square();
    (ab.iter().map(|v| &f2 * v).collect(), bb.iter().map(|v| f * v).collect())
}

#[derive(Debug)]
struct ScaledInner {
    abar: MetricRef,
    bbar: OneFormRef,
    rule: BarScaling,
}

impl ScaledInner {
    fn contains(&self, x: &[f64]) -> bool {
        if !self.abar.contains(x) || !self.bbar.contains(x) {
            return false;
        }
        let xc = constants(x);
        match (self.abar.components(&xc), self.bbar.components(&xc)) {
            (Ok(a), Ok(b)) => self.rule.apply(&a, &b).is_ok(),
            _ => false,
        }
    }

    fn eval(&self, x: &[Jet]) -> Result<(Vec<Jet>, Vec<Jet>)> {
        self.rule.apply(&self.abar.components(x)?, &self.bbar.components(x)?)
    }
}

#[derive(Debug, Clone)]
pub struct ScaledMetric(Arc<ScaledInner>);

#[derive(Debug, Clone)]
pub struct ScaledForm(Arc<ScaledInner>);

impl MetricField for ScaledMetric {
    fn dim(&self) -> usize {
        self.0.abar.dim()
    }

    fn components(&self, x: &[Jet]) -> Result<Vec<Jet>> {
        Ok(self.0.eval(x)?.0)
    }

    fn contains(&self, x: &[f64]) -> bool {
        self.0.contains(x)
    }
}

impl OneFormField for ScaledForm {
    fn dim(&self) -> usize {
        self.0.abar.dim()
    }

    fn components(&self, x: &[Jet]) -> Result<Vec<Jet>> {
        Ok(self.0.eval(x)?.1)
    }

    fn contains(&self, x: &[f64]) -> bool {
        self.0.contains(x)
    }
}

fn build(abar: MetricRef, bbar: OneFormRef, rule: BarScaling) -> Result<(MetricRef, OneFormRef)> {
    if abar.dim() != bbar.dim() {
        return Err(Error::InvalidParameter("metric and 1-form dimensions differ".into()));
    }
    let inner = Arc::new(ScaledInner { abar, bbar, rule });
    Ok((Arc::new(ScaledMetric(inner.clone())), Arc::new(ScaledForm(inner))))
}

/// Points at which seeds are probed for closedness and conformality.
const PROBES: usize = 5;
const CONFORMAL_TOL: f64 = 1e-7;

fn require_conformal(abar: &dyn MetricField, bbar: &dyn OneFormField) -> Result<()> {
    let probes = Sampler::new(PROBES, 0).draw(abar.dim(), |x, _| abar.contains(x) && bbar.contains(x))?;
    for p in probes {
        let fit = check_conformal(abar, bbar, &p.x, CONFORMAL_TOL)?;
        if !fit.passes(CONFORMAL_TOL) {
            return Err(Error::Precondition(format!(
                "seed 1-form is not closed and conformal at {:?} (max |s| = {:.3e}, residual = {:.3e})",
                p.x, fit.max_s, fit.residual
            )));
        }
    }
    Ok(())
}

/// Douglas data with the `kappa = -(k1 + k3 + k2 b^2)` deformation.
pub fn construct_thm2(abar: MetricRef, bbar: OneFormRef, k1: f64, k2: f64, k3: f64) -> Result<(MetricRef, OneFormRef)> {
    require_conformal(&*abar, &*bbar)?;
    build(abar, bbar, BarScaling::Thm2 { k1, k2, k3 })
}

/// Douglas data by the conformal scaling `(eta abar, eta bbar)`.
pub fn construct_thm3(abar: MetricRef, bbar: OneFormRef, k1: f64, k2: f64, k3: f64) -> Result<(MetricRef, OneFormRef)> {
    require_conformal(&*abar, &*bbar)?;
    build(abar, bbar, BarScaling::Thm3 { k1, k2, k3 })
}

/// The classification scalings; pair with the matching reduced family.
pub fn theorem1_scaling(case: Theorem1Case, sigma: f64, abar: MetricRef, bbar: OneFormRef) -> Result<(MetricRef, OneFormRef)> {
    validate_sigma(case, sigma)?;
    build(abar, bbar, BarScaling::Thm1 { case, sigma })
}

//! Profile functions `phi(s)`: the Douglas ODE, its reduced families, and
//! the transformation group generated by `g_u` and `h_v`.

mod params;
mod series;

use std::fmt::Debug;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::diffkit::Jet;
use crate::error::{domain, Result};

pub use params::{invariants_pq, regularity_radius, transform_params_gu, transform_params_hv, Invariant, PhiParams};
pub use series::{
    phi_neg, phi_pos, phi_zero, series_from_params, FamilyCase, PhiFamily, PhiSeries, DEFAULT_TRUNCATION,
};

/// A smooth profile `phi` evaluable on jets.
pub trait PhiFunction: Send + Sync + Debug {
    fn eval_jet(&self, s: &Jet) -> Result<Jet>;

    fn eval(&self, s: f64) -> Result<f64> {
        Ok(self.eval_jet(&Jet::constant(s))?.value())
    }

    /// `[phi, phi', phi'']` at `s`.
    fn derivs(&self, s: f64) -> Result<[f64; 3]> {
        let j = self.eval_jet(&(&(&Jet::constant(s) + &Jet::tag(0)) + &Jet::tag(1)))?;
        Ok([j.value(), j.coeff(0b01), j.coeff(0b11)])
    }

    /// Open disk `|s| < radius` on which `phi` is defined.
    fn radius(&self) -> f64 {
        f64::INFINITY
    }
}

pub type PhiRef = Arc<dyn PhiFunction>;

/// Wraps a closure on jets, for profiles with a closed form.
pub struct JetFn<F> {
    f: F,
    radius: f64,
    label: &'static str,
}

impl<F> JetFn<F>
where
    F: Fn(&Jet) -> Result<Jet> + Send + Sync,
{
    pub fn new(label: &'static str, radius: f64, f: F) -> Self {
        JetFn { f, radius, label }
    }
}

impl<F> Debug for JetFn<F> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "JetFn({})", self.label)
    }
}

impl<F> PhiFunction for JetFn<F>
where
    F: Fn(&Jet) -> Result<Jet> + Send + Sync,
{
    fn eval_jet(&self, s: &Jet) -> Result<Jet> {
        (self.f)(s)
    }

    fn radius(&self) -> f64 {
        self.radius
    }
}

/// `{1 + (k1 + k3) s^2 + k2 s^4} phi'' - (k1 + k2 s^2)(phi - s phi')`
pub fn ode_residual(phi: &dyn PhiFunction, k1: f64, k2: f64, k3: f64, s: f64) -> Result<f64> {
    let [p, dp, ddp] = phi.derivs(s)?;
    let s2 = s * s;
    Ok((1.0 + (k1 + k3) * s2 + k2 * s2 * s2) * ddp - (k1 + k2 * s2) * (p - s * dp))
}

/// `(g_u phi)(s) = sqrt(1 + u s^2) phi(s / sqrt(1 + u s^2))`
#[derive(Debug, Clone)]
pub struct GuTransform {
    inner: PhiRef,
    u: f64,
}

impl PhiFunction for GuTransform {
    fn eval_jet(&self, s: &Jet) -> Result<Jet> {
        let w = &(&s.square() * self.u) + 1.0;
        if !(w.value() > 0.0) {
            return Err(domain(format!("1 + u s^2 = {} is not positive", w.value())));
        }
        let r = w.sqrt()?;
        let inner = self.inner.eval_jet(&(s / &r))?;
        Ok(&r * &inner)
    }

    fn radius(&self) -> f64 {
        let r = self.inner.radius();
        let u = self.u;
        let from_inner = if r.is_infinite() || 1.0 - u * r * r <= 0.0 {
            f64::INFINITY
        } else {
            r / (1.0 - u * r * r).sqrt()
        };
        if u < 0.0 {
            from_inner.min(1.0 / (-u).sqrt())
        } else {
            from_inner
        }
    }
}

/// `(h_v phi)(s) = phi(v s)`
#[derive(Debug, Clone)]
pub struct HvTransform {
    inner: PhiRef,
    v: f64,
}

impl PhiFunction for HvTransform {
    fn eval_jet(&self, s: &Jet) -> Result<Jet> {
        self.inner.eval_jet(&(s * self.v))
    }

    fn radius(&self) -> f64 {
        self.inner.radius() / self.v.abs()
    }
}

pub fn apply_gu(phi: PhiRef, u: f64) -> PhiRef {
    Arc::new(GuTransform { inner: phi, u })
}

pub fn apply_hv(phi: PhiRef, v: f64) -> Result<PhiRef> {
    if v == 0.0 || !v.is_finite() {
        return Err(crate::error::Error::InvalidParameter(format!(
            "h_v needs a finite non-zero v, got {v}"
        )));
    }
    Ok(Arc::new(HvTransform { inner: phi, v }))
}

/// Declarative description of a profile, as it appears in run configs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum PhiSpec {
    /// Series solution of the general ODE with these constants.
    Params(PhiParams),
    Family(PhiFamily),
    /// `1 + s`
    Randers,
    /// `(1 + s)^2`
    Square,
    /// `1`
    Riemannian,
}

impl PhiSpec {
    pub fn build(&self) -> Result<PhiRef> {
        Ok(match self {
            PhiSpec::Params(p) => Arc::new(series_from_params(p, DEFAULT_TRUNCATION)),
            PhiSpec::Family(f) => Arc::new(f.series()?),
            PhiSpec::Randers => Arc::new(PhiSeries::randers()),
            PhiSpec::Square => Arc::new(PhiSeries::square()),
            PhiSpec::Riemannian => Arc::new(PhiSeries::riemannian()),
        })
    }

    /// ODE constants satisfied by this profile.
    pub fn params(&self) -> PhiParams {
        match self {
            PhiSpec::Params(p) => *p,
            PhiSpec::Family(f) => f.params(),
            PhiSpec::Randers => PhiParams::new(0.0, 0.0, 0.0, 1.0),
            PhiSpec::Square => PhiParams::new(2.0, 0.0, -3.0, 2.0),
            PhiSpec::Riemannian => PhiParams::new(0.0, 0.0, 0.0, 0.0),
        }
    }
}

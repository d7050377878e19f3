//! Scalar functions of one variable (`b^2` or `|x|^2`) evaluable on jets.

use std::fmt::Debug;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::eta::eta_jet;
use crate::diffkit::Jet;
use crate::error::{domain, Error, Result};

pub trait Profile: Send + Sync + Debug {
    fn eval_jet(&self, t: &Jet) -> Result<Jet>;

    fn value(&self, t: f64) -> Result<f64> {
        Ok(self.eval_jet(&Jet::constant(t))?.value())
    }

    /// First derivative, exact through a one-tag jet.
    fn derivative(&self, t: f64) -> Result<f64> {
        Ok(self.eval_jet(&Jet::variable(t, 0))?.coeff(1))
    }
}

pub type ProfileRef = Arc<dyn Profile>;

/// Named presets, as used in run configs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ProfileSpec {
    Constant {
        value: f64,
    },
    /// `sum c_k t^k`
    Poly {
        coeffs: Vec<f64>,
    },
    /// `mu / (1 + mu t)`
    Mobius {
        mu: f64,
    },
    /// `-1/2 ln(1 + mu t)`, i.e. `e^{2 rho} = 1 / (1 + mu t)`
    LogConformal {
        mu: f64,
    },
    /// `scale * exp(rate t)`
    Exp {
        scale: f64,
        rate: f64,
    },
    /// `int_0^t (k3 + k2 u) / (2 {1 + (k1 + k3) u + k2 u^2}) du = -ln eta(t)`
    RhoIntegral {
        k1: f64,
        k2: f64,
        k3: f64,
    },
    /// `-(k1 + k3 + k2 t)`
    KappaDouglas {
        k1: f64,
        k2: f64,
        k3: f64,
    },
    /// `C sqrt(1 - t kappa) e^{2 rho}`
    NuConformal {
        kappa: Box<ProfileSpec>,
        rho: Box<ProfileSpec>,
        c: f64,
    },
    /// `C sqrt(1 - t kappa) e^{2 rho} eta(t)`
    NuDouglas {
        k1: f64,
        k2: f64,
        k3: f64,
        kappa: Box<ProfileSpec>,
        rho: Box<ProfileSpec>,
        c: f64,
    },
}

impl ProfileSpec {
    pub fn constant(value: f64) -> Self {
        ProfileSpec::Constant { value }
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    pub fn build(&self) -> ProfileRef {
        Arc::new(self.clone())
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ProfileSpec::Poly { coeffs } if coeffs.is_empty() => {
                Err(Error::InvalidParameter("polynomial profile needs coefficients".into()))
            }
            ProfileSpec::NuConformal { c, kappa, rho } | ProfileSpec::NuDouglas { c, kappa, rho, .. } => {
                if *c == 0.0 {
                    return Err(Error::InvalidParameter("C must be non-zero".into()));
                }
                kappa.validate()?;
                rho.validate()
            }
            _ => Ok(()),
        }
    }
}

/// `C sqrt(1 - t kappa(t)) e^{2 rho(t)}` on jets.
pub(crate) fn nu_core(kappa: &dyn Profile, rho: &dyn Profile, c: f64, t: &Jet) -> Result<Jet> {
    let k = kappa.eval_jet(t)?;
    let w = 1.0 - &(t * &k);
    if !(w.value() > 0.0) {
        return Err(domain(format!("1 - kappa b^2 = {} is not positive", w.value())));
    }
    Ok(&w.sqrt()? * &rho.eval_jet(t)?.scale(2.0).exp() * c)
}

impl Profile for ProfileSpec {
    fn eval_jet(&self, t: &Jet) -> Result<Jet> {
        match self {
            ProfileSpec::Constant { value } => Ok(Jet::constant(*value)),
            ProfileSpec::Poly { coeffs } => {
                let mut acc = Jet::constant(*coeffs.last().unwrap_or(&0.0));
                for c in coeffs.iter().rev().skip(1) {
                    acc = &(&acc * t) + *c;
                }
                Ok(acc)
            }
            ProfileSpec::Mobius { mu } => {
                let d = &(t * *mu) + 1.0;
                if d.value() == 0.0 {
                    return Err(domain("1 + mu t vanishes"));
                }
                Ok(d.recip() * *mu)
            }
            ProfileSpec::LogConformal { mu } => Ok((&(t * *mu) + 1.0).ln()?.scale(-0.5)),
            ProfileSpec::Exp { scale, rate } => Ok((t * *rate).exp() * *scale),
            ProfileSpec::RhoIntegral { k1, k2, k3 } => Ok(eta_jet(*k1, *k2, *k3, t)?.ln()?.scale(-1.0)),
            ProfileSpec::KappaDouglas { k1, k2, k3 } => Ok(&(t * -*k2) - (k1 + k3)),
            ProfileSpec::NuConformal { kappa, rho, c } => nu_core(&**kappa, &**rho, *c, t),
            ProfileSpec::NuDouglas {
                k1,
                k2,
                k3,
                kappa,
                rho,
                c,
            } => Ok(&nu_core(&**kappa, &**rho, *c, t)? * &eta_jet(*k1, *k2, *k3, t)?),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_and_derivatives() {
        let m = ProfileSpec::Mobius { mu: 2.0 };
        assert!((m.value(0.5).unwrap() - 1.0).abs() < 1e-15);
        assert!((m.derivative(0.5).unwrap() + 1.0).abs() < 1e-15); // -mu^2 / (1 + mu t)^2
        let l = ProfileSpec::LogConformal { mu: 1.0 };
        assert!((l.derivative(1.0).unwrap() + 0.25).abs() < 1e-15);
        let p = ProfileSpec::Poly { coeffs: vec![1.0, 0.0, 3.0] };
        assert_eq!(p.value(2.0).unwrap(), 13.0);
        assert_eq!(p.derivative(2.0).unwrap(), 12.0);
        let k = ProfileSpec::KappaDouglas { k1: 2.0, k2: 0.5, k3: -3.0 };
        assert_eq!(k.value(2.0).unwrap(), 0.0);
    }

    #[test]
    fn spec_serde() {
        let s = ProfileSpec::NuConformal {
            kappa: Box::new(ProfileSpec::Mobius { mu: -1.0 }),
            rho: Box::new(ProfileSpec::zero()),
            c: 1.0,
        };
        let j = serde_json::to_string(&s).unwrap();
        assert!(j.contains("\"kind\":\"nu-conformal\""));
        assert_eq!(serde_json::from_str::<ProfileSpec>(&j).unwrap(), s);
        assert!(ProfileSpec::NuConformal {
            kappa: Box::new(ProfileSpec::zero()),
            rho: Box::new(ProfileSpec::zero()),
            c: 0.0
        }
        .validate()
        .is_err());
    }
}

//! Families addressable by name and parameters, as used in run configs.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::*;
use crate::abmetric::FinslerRef;
use crate::deform::{construct_thm2, theorem1_scaling, Theorem1Case};
use crate::phifun::{series_from_params, FamilyCase, PhiFamily, PhiRef, PhiSpec, DEFAULT_TRUNCATION};

/// Closed conformal seed data `(kappa, rho, C)`. Serialized
/// under the key `base` so it cannot clash with the sampler seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedSpec {
    #[serde(default = "ProfileSpec::zero")]
    pub kappa: ProfileSpec,
    #[serde(default = "ProfileSpec::zero")]
    pub rho: ProfileSpec,
    #[serde(default = "one")]
    pub c: f64,
}

fn one() -> f64 {
    1.0
}

fn randers_closed_scale() -> f64 {
    0.3
}

fn randers_nonclosed_scale() -> f64 {
    0.2
}

impl Default for SeedSpec {
    fn default() -> Self {
        SeedSpec {
            kappa: ProfileSpec::zero(),
            rho: ProfileSpec::zero(),
            c: 1.0,
        }
    }
}

impl SeedSpec {
    pub fn build(&self, n: usize) -> Result<(MetricRef, OneFormRef)> {
        corollary_family(n, self.kappa.clone(), self.rho.clone(), self.c)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum FamilySpec {
    /// The flat Riemannian metric.
    Euclidean,
    /// Berwald's metric as a square metric over an `(alpha, beta)` pair.
    Berwald,
    /// Berwald's metric in its closed form.
    BerwaldExplicit,
    SphericalSquare {
        mu: f64,
    },
    GeneralSquare {
        #[serde(default, rename = "base")]
        seed: SeedSpec,
    },
    /// Euclidean `alpha`, `beta = scale <x,y>` (closed, not parallel).
    RandersClosed {
        #[serde(default = "randers_closed_scale")]
        scale: f64,
    },
    /// Euclidean `alpha`, `beta = scale x^1 dx^2` (not closed).
    RandersNonclosed {
        #[serde(default = "randers_nonclosed_scale")]
        scale: f64,
    },
    /// Euclidean `alpha`, constant `beta`.
    RandersParallel {
        b: Vec<f64>,
    },
    /// `alpha phi(beta / alpha)` over the constant curvature metric and
    /// one of its closed conformal 1-forms.
    ConstantCurvature {
        mu: f64,
        #[serde(default = "one")]
        lambda: f64,
        #[serde(default)]
        a: Option<Vec<f64>>,
        phi: PhiSpec,
    },
    /// A reduced family over the matching scaling of a closed conformal seed.
    Classification {
        case: FamilyCase,
        sigma: f64,
        #[serde(default)]
        eps: f64,
        #[serde(default, rename = "base")]
        seed: SeedSpec,
    },
    /// Douglas data via the `kappa = -(k1 + k3 + k2 b^2)` deformation.
    Theorem2 {
        k1: f64,
        k2: f64,
        k3: f64,
        #[serde(default)]
        eps: f64,
        #[serde(default, rename = "base")]
        seed: SeedSpec,
    },
    /// Douglas data via the conformal scaling `(eta abar, eta bbar)`.
    Theorem3 {
        k1: f64,
        k2: f64,
        k3: f64,
        #[serde(default)]
        eps: f64,
        #[serde(default, rename = "base")]
        seed: SeedSpec,
    },
}

/// An assembled family with whatever structure the checks can use.
#[derive(Debug, Clone)]
pub struct Family {
    pub label: String,
    pub finsler: FinslerRef,
    /// `(alpha, beta)` when `F` is an `(alpha, beta)`-metric.
    pub pair: Option<(MetricRef, OneFormRef)>,
    /// The profile and the ODE constants it satisfies.
    pub phi: Option<(PhiRef, PhiParams)>,
    /// Closed conformal seed the family was built from.
    pub seed: Option<(MetricRef, OneFormRef)>,
}

impl Family {
    fn explicit(label: &str, f: FinslerRef) -> Self {
        Family {
            label: label.into(),
            finsler: f,
            pair: None,
            phi: None,
            seed: None,
        }
    }

    fn ab(label: &str, m: AbMetric, params: PhiParams, seed: Option<(MetricRef, OneFormRef)>) -> Self {
        Family {
            label: label.into(),
            pair: Some((m.a.clone(), m.b.clone())),
            phi: Some((m.phi.clone(), params)),
            finsler: Arc::new(m),
            seed,
        }
    }
}

fn theorem1_case(case: FamilyCase) -> Theorem1Case {
    match case {
        FamilyCase::Pos => Theorem1Case::A,
        FamilyCase::Zero => Theorem1Case::B,
        FamilyCase::Neg => Theorem1Case::C,
    }
}

fn randers_params() -> PhiParams {
    PhiSpec::Randers.params()
}

impl FamilySpec {
    pub fn name(&self) -> &'static str {
        match self {
            FamilySpec::Euclidean => "euclidean",
            FamilySpec::Berwald => "berwald",
            FamilySpec::BerwaldExplicit => "berwald-explicit",
            FamilySpec::SphericalSquare { .. } => "spherical-square",
            FamilySpec::GeneralSquare { .. } => "general-square",
            FamilySpec::RandersClosed { .. } => "randers-closed",
            FamilySpec::RandersNonclosed { .. } => "randers-nonclosed",
            FamilySpec::RandersParallel { .. } => "randers-parallel",
            FamilySpec::ConstantCurvature { .. } => "constant-curvature",
            FamilySpec::Classification { .. } => "classification",
            FamilySpec::Theorem2 { .. } => "theorem2",
            FamilySpec::Theorem3 { .. } => "theorem3",
        }
    }

    /// Whether the family is expected to be Douglas.
    pub fn expect_douglas(&self) -> bool {
        !matches!(self, FamilySpec::RandersNonclosed { .. })
    }

    pub fn build(&self, n: usize) -> Result<Family> {
        check_dim(n)?;
        let name = self.name();
        Ok(match self {
            FamilySpec::Euclidean => {
                let a = euclidean(n)?;
                let b: OneFormRef = Arc::new(ConstantForm(vec![0.0; n]));
                let m = AbMetric::new(a, b, Arc::new(PhiSeries::riemannian()))?;
                Family::ab(name, m, PhiSpec::Riemannian.params(), None)
            }
            FamilySpec::Berwald => Family::ab(name, berwald_metric(n)?, PhiSpec::Square.params(), None),
            FamilySpec::BerwaldExplicit => Family::explicit(name, Arc::new(berwald_explicit(n)?)),
            FamilySpec::SphericalSquare { mu } => Family::explicit(name, Arc::new(spherically_symmetric_square(n, *mu)?)),
            FamilySpec::GeneralSquare { seed } => {
                let f = general_square_family(n, seed.kappa.clone(), seed.rho.clone(), seed.c)?;
                let mut fam = Family::explicit(name, Arc::new(f));
                fam.seed = Some(seed.build(n)?);
                fam
            }
            FamilySpec::RandersClosed { scale } => {
                let m = randers(euclidean(n)?, Arc::new(PositionForm { n, scale: *scale }))?;
                Family::ab(name, m, randers_params(), None)
            }
            FamilySpec::RandersNonclosed { scale } => {
                let m = randers(euclidean(n)?, Arc::new(RotationForm { n, scale: *scale }))?;
                Family::ab(name, m, randers_params(), None)
            }
            FamilySpec::RandersParallel { b } => {
                if b.len() != n {
                    return Err(Error::InvalidParameter(format!("b has length {}, expected {n}", b.len())));
                }
                let m = randers(euclidean(n)?, Arc::new(ConstantForm(b.clone())))?;
                Family::ab(name, m, randers_params(), None)
            }
            FamilySpec::ConstantCurvature { mu, lambda, a, phi } => {
                let h = constant_curvature(n, *mu)?;
                let w: OneFormRef = Arc::new(conformal_oneform(n, *mu, *lambda, a.clone())?);
                let p = phi.params();
                let m = AbMetric::with_params(h.clone(), w.clone(), phi.build()?, &p)?;
                Family::ab(name, m, p, Some((h, w)))
            }
            FamilySpec::Classification { case, sigma, eps, seed } => {
                let fam = PhiFamily::new(*case, *sigma, *eps)?;
                let (abar, bbar) = seed.build(n)?;
                let (a, b) = theorem1_scaling(theorem1_case(*case), *sigma, abar.clone(), bbar.clone())?;
                let p = fam.params();
                let m = AbMetric::with_params(a, b, Arc::new(fam.series()?), &p)?;
                Family::ab(name, m, p, Some((abar, bbar)))
            }
            FamilySpec::Theorem2 { k1, k2, k3, eps, seed } | FamilySpec::Theorem3 { k1, k2, k3, eps, seed } => {
                let p = PhiParams::new(*k1, *k2, *k3, *eps);
                let (abar, bbar) = seed.build(n)?;
                let (a, b) = if matches!(self, FamilySpec::Theorem2 { .. }) {
                    construct_thm2(abar.clone(), bbar.clone(), *k1, *k2, *k3)?
                } else {
                    construct_thm3(abar.clone(), bbar.clone(), *k1, *k2, *k3)?
                };
                let m = AbMetric::with_params(a, b, Arc::new(series_from_params(&p, DEFAULT_TRUNCATION)), &p)?;
                Family::ab(name, m, p, Some((abar, bbar)))
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_serde() {
        let s: FamilySpec = serde_json::from_str(r#"{"family": "berwald"}"#).unwrap();
        assert_eq!(s, FamilySpec::Berwald);
        let s: FamilySpec = serde_json::from_str(r#"{"family": "randers-nonclosed"}"#).unwrap();
        assert_eq!(s, FamilySpec::RandersNonclosed { scale: 0.2 });
        let s: FamilySpec = serde_json::from_str(
            r#"{"family": "classification", "case": "pos", "sigma": 1.0,
                "base": {"kappa": {"kind": "mobius", "mu": 0.5}, "c": 0.8}}"#,
        )
        .unwrap();
        let back: FamilySpec = serde_json::from_str(&serde_json::to_string(&s).unwrap()).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn every_family_builds() {
        let specs = [
            FamilySpec::Euclidean,
            FamilySpec::Berwald,
            FamilySpec::BerwaldExplicit,
            FamilySpec::SphericalSquare { mu: 1.0 },
            FamilySpec::GeneralSquare { seed: SeedSpec::default() },
            FamilySpec::RandersClosed { scale: 0.3 },
            FamilySpec::RandersNonclosed { scale: 0.2 },
            FamilySpec::RandersParallel { b: vec![0.1, 0.2, 0.0] },
            FamilySpec::ConstantCurvature {
                mu: -1.0,
                lambda: 1.0,
                a: None,
                phi: PhiSpec::Square,
            },
            FamilySpec::Classification {
                case: FamilyCase::Neg,
                sigma: 0.0,
                eps: 0.5,
                seed: SeedSpec::default(),
            },
            FamilySpec::Theorem2 {
                k1: 1.0,
                k2: 1.0,
                k3: 1.0,
                eps: 0.0,
                seed: SeedSpec::default(),
            },
        ];
        for s in specs {
            let f = s.build(3).unwrap_or_else(|e| panic!("{}: {e}", s.name()));
            assert_eq!(f.finsler.dim(), 3);
        }
    }
}

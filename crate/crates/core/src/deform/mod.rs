//! Beta-deformations `(alpha, beta) -> (alpha_bar, beta_bar)` driven by
//! three functions `(kappa, rho, nu)` of `b^2`, and the constructions of
//! Douglas data from closed conformal seeds.

mod construct;
mod eta;
mod profile;
pub mod quadrature;

use std::sync::Arc;

use ndarray::Array2;

use crate::diffkit::{constants, Jet};
use crate::error::{domain, Error, Result};
use crate::geometry::{covariant_derivative, norm_sq_jet, MetricField, MetricRef, OneFormField, OneFormRef};

pub use construct::{
    construct_thm2, construct_thm3, theorem1_factor, theorem1_scaling, BarScaling, ScaledForm, ScaledMetric,
    Theorem1Case,
};
pub use eta::{eta, eta_case, eta_jet, eta_quadrature, EtaCase};
pub use profile::{Profile, ProfileRef, ProfileSpec};

/// `(kappa, rho, nu)` as functions of `b^2`.
#[derive(Debug, Clone)]
pub struct DeformationFactors {
    pub kappa: ProfileRef,
    pub rho: ProfileRef,
    pub nu: ProfileRef,
}

/// Values of the factors and their first derivatives at one `b^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FactorValues {
    pub kappa: f64,
    pub rho: f64,
    pub nu: f64,
    pub dkappa: f64,
    pub drho: f64,
    pub dnu: f64,
}

impl DeformationFactors {
    pub fn new(kappa: ProfileRef, rho: ProfileRef, nu: ProfileRef) -> Self {
        DeformationFactors { kappa, rho, nu }
    }

    pub fn identity() -> Self {
        Self::from_specs(&ProfileSpec::zero(), &ProfileSpec::zero(), &ProfileSpec::constant(1.0))
    }

    pub fn from_specs(kappa: &ProfileSpec, rho: &ProfileSpec, nu: &ProfileSpec) -> Self {
        Self::new(kappa.build(), rho.build(), nu.build())
    }

    pub fn at(&self, b2: f64) -> Result<FactorValues> {
        Ok(FactorValues {
            kappa: self.kappa.value(b2)?,
            rho: self.rho.value(b2)?,
            nu: self.nu.value(b2)?,
            dkappa: self.kappa.derivative(b2)?,
            drho: self.rho.derivative(b2)?,
            dnu: self.nu.derivative(b2)?,
        })
    }

    /// `1 - kappa b^2 > 0` and `nu > 0` at `b2`.
    pub fn admissible_at(&self, b2: f64) -> bool {
        match (self.kappa.value(b2), self.nu.value(b2)) {
            (Ok(k), Ok(nu)) => 1.0 - k * b2 > 0.0 && nu > 0.0,
            _ => false,
        }
    }

    /// Checks the factor invariants on a grid of `[0, b2_max]`.
    pub fn validate(&self, b2_max: f64) -> Result<()> {
        for i in 0..=100 {
            let t = b2_max * i as f64 / 100.0;
            if !self.admissible_at(t) {
                return Err(Error::InvalidParameter(format!(
                    "deformation factors violate 1 - kappa b^2 > 0 or nu > 0 at b^2 = {t}"
                )));
            }
        }
        Ok(())
    }

    /// `bbar^2 = nu^2 e^{-2 rho} b^2 / (1 - kappa b^2)` on jets.
    pub fn bbar2_jet(&self, b2: &Jet) -> Result<Jet> {
        let k = self.kappa.eval_jet(b2)?;
        let w = 1.0 - &(b2 * &k);
        if !(w.value() > 0.0) {
            return Err(domain(format!("1 - kappa b^2 = {} is not positive", w.value())));
        }
        let nu = self.nu.eval_jet(b2)?;
        let e = self.rho.eval_jet(b2)?.scale(-2.0).exp();
        Ok(&(&(&nu.square() * &e) * b2) / &w)
    }

    pub fn bbar2(&self, b2: f64) -> Result<f64> {
        Ok(self.bbar2_jet(&Jet::constant(b2))?.value())
    }
}

#[derive(Debug)]
struct DeformInner {
    a: MetricRef,
    b: OneFormRef,
    f: DeformationFactors,
}

impl DeformInner {
    fn contains(&self, x: &[f64]) -> bool {
        self.a.contains(x)
            && self.b.contains(x)
            && norm_sq_jet(
                &self.a.components(&constants(x)).unwrap_or_default(),
                &self.b.components(&constants(x)).unwrap_or_default(),
            )
            .map(|b2| self.f.admissible_at(b2.value()))
            .unwrap_or(false)
    }
}

/// `a_bar = e^{2 rho} (a - kappa b b)`.
#[derive(Debug, Clone)]
pub struct DeformedMetric(Arc<DeformInner>);

/// `b_bar = nu b`.
#[derive(Debug, Clone)]
pub struct DeformedForm(Arc<DeformInner>);

impl MetricField for DeformedMetric {
    fn dim(&self) -> usize {
        self.0.a.dim()
    }

    fn components(&self, x: &[Jet]) -> Result<Vec<Jet>> {
        let inner = &self.0;
        let a = inner.a.components(x)?;
        let b = inner.b.components(x)?;
        let b2 = norm_sq_jet(&a, &b)?;
        let k = inner.f.kappa.eval_jet(&b2)?;
        let e = inner.f.rho.eval_jet(&b2)?.scale(2.0).exp();
        let n = b.len();
        let mut out = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                out.push(&e * &(&a[i * n + j] - &(&k * &(&b[i] * &b[j]))));
            }
        }
        Ok(out)
    }

    fn contains(&self, x: &[f64]) -> bool {
        self.0.contains(x)
    }
}

impl OneFormField for DeformedForm {
    fn dim(&self) -> usize {
        self.0.a.dim()
    }

    fn components(&self, x: &[Jet]) -> Result<Vec<Jet>> {
        let inner = &self.0;
        let a = inner.a.components(x)?;
        let b = inner.b.components(x)?;
        let nu = inner.f.nu.eval_jet(&norm_sq_jet(&a, &b)?)?;
        Ok(b.iter().map(|bi| &nu * bi).collect())
    }

    fn contains(&self, x: &[f64]) -> bool {
        self.0.contains(x)
    }
}

/// Result of a deformation; keeps the source data for inversion.
#[derive(Debug, Clone)]
pub struct DeformedPair {
    pub abar: MetricRef,
    pub bbar: OneFormRef,
    pub factors: DeformationFactors,
}

impl DeformedPair {
    /// `bbar^2` as a function of `b^2`.
    pub fn bbar2(&self, b2: f64) -> Result<f64> {
        self.factors.bbar2(b2)
    }
}

pub fn deform(a: MetricRef, b: OneFormRef, f: DeformationFactors) -> Result<DeformedPair> {
    if a.dim() != b.dim() {
        return Err(Error::InvalidParameter("metric and 1-form dimensions differ".into()));
    }
    if !f.admissible_at(0.0) {
        return Err(Error::InvalidParameter("nu(0) must be positive".into()));
    }
    let inner = Arc::new(DeformInner { a, b, f: f.clone() });
    Ok(DeformedPair {
        abar: Arc::new(DeformedMetric(inner.clone())),
        bbar: Arc::new(DeformedForm(inner)),
        factors: f,
    })
}

const BISECTION_STEPS: usize = 80;

#[derive(Debug)]
struct InverseInner {
    abar: MetricRef,
    bbar: OneFormRef,
    f: DeformationFactors,
    b2_max: f64,
}

impl InverseInner {
    /// `b^2` with `bbar2(b^2) = target`: bisection on the value, then
    /// chord steps in jet arithmetic to carry the derivatives.
    fn solve_b2(&self, target: &Jet) -> Result<Jet> {
        let tv = target.value();
        let (mut lo, mut hi) = (0.0, self.b2_max);
        if tv < 0.0 || tv > self.f.bbar2(hi)? {
            return Err(domain(format!("bbar^2 = {tv} outside the invertible range")));
        }
        for _ in 0..BISECTION_STEPS {
            let mid = 0.5 * (lo + hi);
            if self.f.bbar2(mid)? < tv {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let t0 = 0.5 * (lo + hi);
        let slope = self.f.bbar2_jet(&Jet::variable(t0, 0))?.coeff(1);
        if slope == 0.0 {
            return Err(Error::Degenerate("bbar^2 has zero slope".into()));
        }
        let mut t = Jet::constant(t0);
        for _ in 0..=target.tags() + 1 {
            let r = &self.f.bbar2_jet(&t)? - target;
            t = &t - &(&r / slope);
        }
        Ok(t)
    }

    /// `(a_ij, b_i)` on jets.
    fn recover(&self, x: &[Jet]) -> Result<(Vec<Jet>, Vec<Jet>)> {
        let ab = self.abar.components(x)?;
        let bb = self.bbar.components(x)?;
        let b2 = self.solve_b2(&norm_sq_jet(&ab, &bb)?)?;
        let k = self.f.kappa.eval_jet(&b2)?;
        let e = self.f.rho.eval_jet(&b2)?.scale(-2.0).exp();
        let nu = self.f.nu.eval_jet(&b2)?;
        let b: Vec<Jet> = bb.iter().map(|v| v / &nu).collect();
        let n = b.len();
        let mut a = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                a.push(&(&e * &ab[i * n + j]) + &(&k * &(&b[i] * &b[j])));
            }
        }
        Ok((a, b))
    }
}

#[derive(Debug, Clone)]
pub struct InvertedMetric(Arc<InverseInner>);

#[derive(Debug, Clone)]
pub struct InvertedForm(Arc<InverseInner>);

impl MetricField for InvertedMetric {
    fn dim(&self) -> usize {
        self.0.abar.dim()
    }

    fn components(&self, x: &[Jet]) -> Result<Vec<Jet>> {
        Ok(self.0.recover(x)?.0)
    }

    fn contains(&self, x: &[f64]) -> bool {
        self.0.abar.contains(x) && self.0.bbar.contains(x)
    }
}

impl OneFormField for InvertedForm {
    fn dim(&self) -> usize {
        self.0.abar.dim()
    }

    fn components(&self, x: &[Jet]) -> Result<Vec<Jet>> {
        Ok(self.0.recover(x)?.1)
    }

    fn contains(&self, x: &[f64]) -> bool {
        self.0.abar.contains(x) && self.0.bbar.contains(x)
    }
}

/// Recovers `(a, b)` from a deformed pair, assuming `b^2 <= b2_max`.
///
/// Fails unless `bbar^2(b^2)` is strictly increasing on `[0, b2_max]`.
pub fn invert_deform(pair: &DeformedPair, b2_max: f64) -> Result<(MetricRef, OneFormRef)> {
    let f = &pair.factors;
    f.validate(b2_max)?;
    let mut prev = f.bbar2(0.0)?;
    for i in 1..=200 {
        let t = b2_max * i as f64 / 200.0;
        let v = f.bbar2(t)?;
        if !(v > prev) || f.bbar2_jet(&Jet::variable(t, 0))?.coeff(1) <= 0.0 {
            return Err(Error::Precondition(format!(
                "bbar^2(b^2) is not strictly increasing near b^2 = {t}; the deformation is not reversible"
            )));
        }
        prev = v;
    }
    let inner = Arc::new(InverseInner {
        abar: pair.abar.clone(),
        bbar: pair.bbar.clone(),
        f: f.clone(),
        b2_max,
    });
    Ok((Arc::new(InvertedMetric(inner.clone())), Arc::new(InvertedForm(inner))))
}

/// Symmetrized covariant derivative `r_bar_ij` of the deformed pair,
/// computed from the undeformed data and the factor derivatives alone.
pub fn rbar_formula(a: &dyn MetricField, b: &dyn OneFormField, f: &DeformationFactors, x: &[f64]) -> Result<Array2<f64>> {
    let nb = covariant_derivative(b, a, x)?;
    let av = crate::diffkit::linalg::values(&a.components(&constants(x))?, a.dim());
    let v = f.at(nb.b2)?;
    let w = 1.0 - v.kappa * nb.b2;
    if !(w > 0.0) {
        return Err(domain("1 - kappa b^2 is not positive"));
    }
    let n = a.dim();
    let c_mixed = v.dkappa * v.nu * nb.b2 / w - 2.0 * v.drho * v.nu + v.dnu;
    let bi = &nb.b;
    let rs = &nb.r_vec + &nb.s_vec;
    Ok(Array2::from_shape_fn((n, n), |(i, j)| {
        v.nu / w * nb.r[[i, j]] + v.kappa * v.nu / w * (bi[i] * nb.s_vec[j] + bi[j] * nb.s_vec[i])
            - v.dkappa * v.nu / w * nb.r_scalar * bi[i] * bi[j]
            + 2.0 * v.drho * v.nu / w * nb.r_scalar * (av[[i, j]] - v.kappa * bi[i] * bi[j])
            + c_mixed * (bi[i] * rs[j] + bi[j] * rs[i])
    }))
}

/// `nu = C sqrt(1 - b^2 kappa) e^{2 rho} eta(b^2)`, which makes the
/// deformation of data satisfying the Douglas 1-form condition closed and
/// conformal.
pub fn nu_for_douglas_seed(k1: f64, k2: f64, k3: f64, kappa: ProfileSpec, rho: ProfileSpec, c: f64) -> Result<ProfileSpec> {
    let spec = ProfileSpec::NuDouglas {
        k1,
        k2,
        k3,
        kappa: Box::new(kappa),
        rho: Box::new(rho),
        c,
    };
    spec.validate()?;
    Ok(spec)
}

/// `nu = C sqrt(1 - b^2 kappa) e^{2 rho}`, which keeps a closed conformal
/// 1-form closed and conformal.
pub fn nu_conformal_preserving(kappa: ProfileSpec, rho: ProfileSpec, c: f64) -> Result<ProfileSpec> {
    let spec = ProfileSpec::NuConformal {
        kappa: Box::new(kappa),
        rho: Box::new(rho),
        c,
    };
    spec.validate()?;
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_factors() {
        let f = DeformationFactors::identity();
        let v = f.at(0.3).unwrap();
        assert_eq!((v.kappa, v.rho, v.nu, v.dkappa, v.drho, v.dnu), (0.0, 0.0, 1.0, 0.0, 0.0, 0.0));
        assert_eq!(f.bbar2(0.3).unwrap(), 0.3);
    }

    #[test]
    fn nu_examples() {
        let nu = nu_for_douglas_seed(1.0, 0.0, -1.0, ProfileSpec::zero(), ProfileSpec::zero(), 1.0).unwrap();
        assert!((nu.value(0.4).unwrap() - (0.2f64).exp()).abs() < 1e-15);
        assert_eq!(nu.value(0.0).unwrap(), 1.0);
        let nu = nu_conformal_preserving(ProfileSpec::zero(), ProfileSpec::zero(), 1.0).unwrap();
        assert_eq!(nu.value(0.7).unwrap(), 1.0);
        assert!(nu_conformal_preserving(ProfileSpec::zero(), ProfileSpec::zero(), 0.0).is_err());
        // kappa = -1 / (1 - t) gives nu = 1 / sqrt(1 - t)
        let k = ProfileSpec::Mobius { mu: -1.0 };
        let nu = nu_conformal_preserving(k, ProfileSpec::zero(), 1.0).unwrap();
        let t: f64 = 0.36;
        assert!((nu.value(t).unwrap() - 1.0 / (1.0 - t).sqrt()).abs() < 1e-14);
    }

    #[test]
    fn validate_rejects_bad_kappa() {
        let f = DeformationFactors::from_specs(&ProfileSpec::constant(4.0), &ProfileSpec::zero(), &ProfileSpec::constant(1.0));
        assert!(f.validate(0.1).is_ok());
        assert!(f.validate(0.5).is_err());
    }
}

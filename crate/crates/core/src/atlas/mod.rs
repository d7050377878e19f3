//! Concrete metrics, 1-forms and Finsler families: constant curvature
//! metrics with their closed conformal 1-forms, the closed conformal seeds,
//! Berwald's metric and the spherically symmetric square metrics.

mod family;

use std::sync::Arc;

use crate::abmetric::{AbMetric, FinslerFunction};
use crate::deform::{construct_thm3, Profile, ProfileSpec};
use crate::diffkit::{dot, Jet};
use crate::error::{domain, Error, Result};
use crate::geometry::{MetricField, MetricRef, OneFormField, OneFormRef};
use crate::phifun::{PhiParams, PhiSeries};

pub use family::{Family, FamilySpec, SeedSpec};

fn check_dim(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("dimension must be at least 2, got {n}")));
    }
    Ok(())
}

fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

/// `delta_ij` scaled by `p` minus `q x_i x_j`, row-major.
fn delta_minus_xx(x: &[Jet], p: &Jet, q: &Jet) -> Vec<Jet> {
    let n = x.len();
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let xx = q * &(&x[i] * &x[j]);
            out.push(if i == j { p - &xx } else { -&xx });
        }
    }
    out
}

#[derive(Debug, Clone)]
pub struct Euclidean {
    pub n: usize,
}

impl MetricField for Euclidean {
    fn dim(&self) -> usize {
        self.n
    }

    fn components(&self, _x: &[Jet]) -> Result<Vec<Jet>> {
        let n = self.n;
        Ok((0..n * n).map(|k| Jet::constant(if k / n == k % n { 1.0 } else { 0.0 })).collect())
    }
}

pub fn euclidean(n: usize) -> Result<MetricRef> {
    check_dim(n)?;
    Ok(Arc::new(Euclidean { n }))
}

/// `h^2 = ((1 + mu |x|^2) |y|^2 - mu <x,y>^2) / (1 + mu |x|^2)^2`.
#[derive(Debug, Clone)]
pub struct ConstantCurvature {
    pub n: usize,
    pub mu: f64,
}

impl MetricField for ConstantCurvature {
    fn dim(&self) -> usize {
        self.n
    }

    fn components(&self, x: &[Jet]) -> Result<Vec<Jet>> {
        let w = &(&dot(x, x) * self.mu) + 1.0;
        if !(w.value() > 0.0) {
            return Err(domain("1 + mu |x|^2 is not positive"));
        }
        let inv2 = w.square().recip();
        Ok(delta_minus_xx(x, &w, &Jet::constant(self.mu))
            .into_iter()
            .map(|v| &v * &inv2)
            .collect())
    }

    fn contains(&self, x: &[f64]) -> bool {
        1.0 + self.mu * norm2(x) > 0.0
    }
}

pub fn constant_curvature(n: usize, mu: f64) -> Result<MetricRef> {
    check_dim(n)?;
    Ok(Arc::new(ConstantCurvature { n, mu }))
}

/// `W^flat = (lambda <x,y> + (1 + mu |x|^2) <a,y> - mu <a,x> <x,y>) / (1 + mu |x|^2)^{3/2}`,
/// closed and conformal for the constant curvature metric with the same `mu`.
#[derive(Debug, Clone)]
pub struct ConformalOneForm {
    pub mu: f64,
    pub lambda: f64,
    pub a: Vec<f64>,
}

impl ConformalOneForm {
    /// `W = sqrt(1 + mu |x|^2) (lambda x + a)`.
    pub fn dual_field(&self, x: &[f64]) -> Vec<f64> {
        let w = (1.0 + self.mu * norm2(x)).sqrt();
        x.iter().zip(&self.a).map(|(xi, ai)| w * (self.lambda * xi + ai)).collect()
    }
}

impl OneFormField for ConformalOneForm {
    fn dim(&self) -> usize {
        self.a.len()
    }

    fn components(&self, x: &[Jet]) -> Result<Vec<Jet>> {
        let w = &(&dot(x, x) * self.mu) + 1.0;
        if !(w.value() > 0.0) {
            return Err(domain("1 + mu |x|^2 is not positive"));
        }
        let ax: Jet = x.iter().zip(&self.a).map(|(xi, ai)| xi * *ai).fold(Jet::zero(), |s, v| &s + &v);
        let scale = w.powf(-1.5)?;
        let lin = &Jet::constant(self.lambda) - &(&ax * self.mu);
        Ok(x
            .iter()
            .zip(&self.a)
            .map(|(xi, ai)| &(&(&lin * xi) + &(&w * *ai)) * &scale)
            .collect())
    }

    fn contains(&self, x: &[f64]) -> bool {
        1.0 + self.mu * norm2(x) > 0.0
    }
}

pub fn conformal_oneform(n: usize, mu: f64, lambda: f64, a: Option<Vec<f64>>) -> Result<ConformalOneForm> {
    check_dim(n)?;
    let a = a.unwrap_or_else(|| vec![0.0; n]);
    if a.len() != n {
        return Err(Error::InvalidParameter(format!("constant vector has length {}, expected {n}", a.len())));
    }
    Ok(ConformalOneForm { mu, lambda, a })
}

/// `scale <x, y>`.
#[derive(Debug, Clone)]
pub struct PositionForm {
    pub n: usize,
    pub scale: f64,
}

impl OneFormField for PositionForm {
    fn dim(&self) -> usize {
        self.n
    }

    fn components(&self, x: &[Jet]) -> Result<Vec<Jet>> {
        Ok(x.iter().map(|v| v * self.scale).collect())
    }
}

/// `scale x^1 dx^2`, neither closed nor conformal.
#[derive(Debug, Clone)]
pub struct RotationForm {
    pub n: usize,
    pub scale: f64,
}

impl OneFormField for RotationForm {
    fn dim(&self) -> usize {
        self.n
    }

    fn components(&self, x: &[Jet]) -> Result<Vec<Jet>> {
        let mut out = vec![Jet::zero(); self.n];
        out[1] = &x[0] * self.scale;
        Ok(out)
    }
}

#[derive(Debug, Clone)]
pub struct ConstantForm(pub Vec<f64>);

impl OneFormField for ConstantForm {
    fn dim(&self) -> usize {
        self.0.len()
    }

    fn components(&self, _x: &[Jet]) -> Result<Vec<Jet>> {
        Ok(self.0.iter().map(|v| Jet::constant(*v)).collect())
    }
}

#[derive(Debug)]
struct CorollaryInner {
    n: usize,
    kappa: ProfileSpec,
    rho: ProfileSpec,
    c: f64,
}

impl CorollaryInner {
    /// `(kappa, e^{2 rho}, 1 - kappa |x|^2)` at `t = |x|^2`.
    fn factors(&self, t: &Jet) -> Result<(Jet, Jet, Jet)> {
        let k = self.kappa.eval_jet(t)?;
        let e2r = self.rho.eval_jet(t)?.scale(2.0).exp();
        let w = 1.0 - &(&k * t);
        if !(w.value() > 0.0) {
            return Err(domain(format!("1 - kappa |x|^2 = {} is not positive", w.value())));
        }
        Ok((k, e2r, w))
    }

    fn contains(&self, x: &[f64]) -> bool {
        let t = Jet::constant(norm2(x));
        self.factors(&t).is_ok()
    }
}

/// `alpha_bar^2 = e^{2 rho} (|y|^2 - kappa <x,y>^2)`.
#[derive(Debug, Clone)]
pub struct CorollaryMetric(Arc<CorollaryInner>);

/// `beta_bar = C sqrt(1 - kappa |x|^2) e^{2 rho} <x,y>`.
#[derive(Debug, Clone)]
pub struct CorollaryForm(Arc<CorollaryInner>);

impl MetricField for CorollaryMetric {
    fn dim(&self) -> usize {
        self.0.n
    }

    fn components(&self, x: &[Jet]) -> Result<Vec<Jet>> {
        let (k, e2r, _) = self.0.factors(&dot(x, x))?;
        Ok(delta_minus_xx(x, &Jet::one(), &k).into_iter().map(|v| &v * &e2r).collect())
    }

    fn contains(&self, x: &[f64]) -> bool {
        self.0.contains(x)
    }
}

impl OneFormField for CorollaryForm {
    fn dim(&self) -> usize {
        self.0.n
    }

    fn components(&self, x: &[Jet]) -> Result<Vec<Jet>> {
        let (_, e2r, w) = self.0.factors(&dot(x, x))?;
        let scale = &(&w.sqrt()? * &e2r) * self.0.c;
        Ok(x.iter().map(|v| &scale * v).collect())
    }

    fn contains(&self, x: &[f64]) -> bool {
        self.0.contains(x)
    }
}

/// The seed pair with `kappa`, `rho` functions of `|x|^2`; `beta_bar` is
/// closed and conformal for `alpha_bar` whenever `1 - kappa |x|^2 > 0`.
pub fn corollary_family(n: usize, kappa: ProfileSpec, rho: ProfileSpec, c: f64) -> Result<(MetricRef, OneFormRef)> {
    check_dim(n)?;
    kappa.validate()?;
    rho.validate()?;
    if c == 0.0 || !c.is_finite() {
        return Err(Error::InvalidParameter("C must be a non-zero finite number".into()));
    }
    let inner = Arc::new(CorollaryInner { n, kappa, rho, c });
    Ok((Arc::new(CorollaryMetric(inner.clone())), Arc::new(CorollaryForm(inner))))
}

/// `bbar^2 = C^2 e^{2 rho} |x|^2`.
pub fn corollary_bbar2(rho: &ProfileSpec, c: f64, x: &[f64]) -> Result<f64> {
    let t = norm2(x);
    Ok(c * c * (2.0 * rho.value(t)?).exp() * t)
}

/// `F = (alpha + beta)^2 / alpha` over `a_ij`, `b_i` of the unit ball.
#[derive(Debug, Clone)]
struct BerwaldA(usize);

#[derive(Debug, Clone)]
struct BerwaldB(usize);

fn unit_ball(x: &[f64]) -> bool {
    norm2(x) < 1.0
}

impl MetricField for BerwaldA {
    fn dim(&self) -> usize {
        self.0
    }

    // ((1 - |x|^2) delta_ij + x_i x_j) / (1 - |x|^2)^4
    fn components(&self, x: &[Jet]) -> Result<Vec<Jet>> {
        let w = 1.0 - &dot(x, x);
        if !(w.value() > 0.0) {
            return Err(domain("outside the unit ball"));
        }
        let inv = w.powi(4).recip();
        Ok(delta_minus_xx(x, &w, &Jet::constant(-1.0)).into_iter().map(|v| &v * &inv).collect())
    }

    fn contains(&self, x: &[f64]) -> bool {
        unit_ball(x)
    }
}

impl OneFormField for BerwaldB {
    fn dim(&self) -> usize {
        self.0
    }

    fn components(&self, x: &[Jet]) -> Result<Vec<Jet>> {
        let w = 1.0 - &dot(x, x);
        if !(w.value() > 0.0) {
            return Err(domain("outside the unit ball"));
        }
        let inv = w.square().recip();
        Ok(x.iter().map(|v| v * &inv).collect())
    }

    fn contains(&self, x: &[f64]) -> bool {
        unit_ball(x)
    }
}

fn square_metric(a: MetricRef, b: OneFormRef) -> Result<AbMetric> {
    AbMetric::with_params(a, b, Arc::new(PhiSeries::square()), &PhiParams::new(2.0, 0.0, -3.0, 2.0))
}

/// Berwald's metric as the square metric of an `(alpha, beta)` pair with
/// `b^2 = |x|^2`.
pub fn berwald_metric(n: usize) -> Result<AbMetric> {
    check_dim(n)?;
    square_metric(Arc::new(BerwaldA(n)), Arc::new(BerwaldB(n)))
}

/// `F = (sqrt(q) + <x,y>)^2 / ((1 - |x|^2)^2 sqrt(q))`, `q = (1 - |x|^2)|y|^2 + <x,y>^2`.
#[derive(Debug, Clone)]
pub struct BerwaldExplicit {
    pub n: usize,
}

impl FinslerFunction for BerwaldExplicit {
    fn dim(&self) -> usize {
        self.n
    }

    fn eval_sq(&self, x: &[Jet], y: &[Jet]) -> Result<Jet> {
        let t = dot(x, x);
        let xy = dot(x, y);
        let w = 1.0 - &t;
        let q = &(&w * &dot(y, y)) + &xy.square();
        if !(w.value() > 0.0 && q.value() > 0.0) {
            return Err(domain("outside the unit ball or y = 0"));
        }
        let num = (&q.sqrt()? + &xy).powi(4);
        Ok(&num / &(&w.powi(4) * &q))
    }

    fn admissible(&self, x: &[f64], y: &[f64]) -> bool {
        unit_ball(x) && norm2(y) > 0.0
    }
}

pub fn berwald_explicit(n: usize) -> Result<BerwaldExplicit> {
    check_dim(n)?;
    Ok(BerwaldExplicit { n })
}

/// `F = (sqrt(q) + <x,y>)^2 / (sqrt((1 + mu |x|^2)(1 - |x|^2)^3) sqrt(q))`,
/// `q = (1 + mu |x|^2)|y|^2 - mu <x,y>^2`.
#[derive(Debug, Clone)]
pub struct SphericalSquare {
    pub n: usize,
    pub mu: f64,
}

impl FinslerFunction for SphericalSquare {
    fn dim(&self) -> usize {
        self.n
    }

    fn eval_sq(&self, x: &[Jet], y: &[Jet]) -> Result<Jet> {
        let t = dot(x, x);
        let xy = dot(x, y);
        let p = &(&t * self.mu) + 1.0;
        let w = 1.0 - &t;
        let q = &(&p * &dot(y, y)) - &(&xy.square() * self.mu);
        if !(p.value() > 0.0 && w.value() > 0.0 && q.value() > 0.0) {
            return Err(domain("outside the chart of the spherically symmetric square metric"));
        }
        let num = (&q.sqrt()? + &xy).powi(4);
        Ok(&num / &(&(&p * &w.powi(3)) * &q))
    }

    fn admissible(&self, x: &[f64], y: &[f64]) -> bool {
        let t = norm2(x);
        let p = 1.0 + self.mu * t;
        let xy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
        p > 0.0 && t < 1.0 && p * norm2(y) - self.mu * xy * xy > 0.0
    }
}

pub fn spherically_symmetric_square(n: usize, mu: f64) -> Result<SphericalSquare> {
    check_dim(n)?;
    Ok(SphericalSquare { n, mu })
}

/// `F = (A + B)^2 / ((1 - C^2 e^{2 rho} |x|^2)^{3/2} A)` with
/// `A = e^rho sqrt(|y|^2 - kappa <x,y>^2)`, `B = C e^{2 rho} sqrt(1 - kappa |x|^2) <x,y>`.
#[derive(Debug)]
pub struct GeneralSquare {
    inner: CorollaryInner,
}

impl GeneralSquare {
    fn parts(&self, x: &[Jet], y: &[Jet]) -> Result<(Jet, Jet, Jet)> {
        let t = dot(x, x);
        let (k, e2r, w) = self.inner.factors(&t)?;
        let xy = dot(x, y);
        let a2 = &e2r * &(&dot(y, y) - &(&k * &xy.square()));
        let bbar2 = &(&e2r * &t) * (self.inner.c * self.inner.c);
        let den = 1.0 - &bbar2;
        if !(a2.value() > 0.0) {
            return Err(domain("alpha_bar vanishes"));
        }
        if !(den.value() > 0.0) {
            return Err(domain(format!("C^2 e^(2 rho) |x|^2 = {} is not below 1", bbar2.value())));
        }
        let b = &(&(&w.sqrt()? * &e2r) * &xy) * self.inner.c;
        Ok((a2, b, den))
    }
}

impl FinslerFunction for GeneralSquare {
    fn dim(&self) -> usize {
        self.inner.n
    }

    fn eval_sq(&self, x: &[Jet], y: &[Jet]) -> Result<Jet> {
        let (a2, b, den) = self.parts(x, y)?;
        let num = (&a2.sqrt()? + &b).powi(4);
        Ok(&num / &(&den.powi(3) * &a2))
    }

    fn admissible(&self, x: &[f64], y: &[f64]) -> bool {
        let xs: Vec<Jet> = x.iter().map(|v| Jet::constant(*v)).collect();
        let ys: Vec<Jet> = y.iter().map(|v| Jet::constant(*v)).collect();
        self.parts(&xs, &ys).is_ok()
    }
}

pub fn general_square_family(n: usize, kappa: ProfileSpec, rho: ProfileSpec, c: f64) -> Result<GeneralSquare> {
    check_dim(n)?;
    kappa.validate()?;
    rho.validate()?;
    if c == 0.0 || !c.is_finite() {
        return Err(Error::InvalidParameter("C must be a non-zero finite number".into()));
    }
    Ok(GeneralSquare {
        inner: CorollaryInner { n, kappa, rho, c },
    })
}

/// The same metric assembled as a square metric over the conformal
/// scaling of the closed conformal seed with `(k1, k2, k3) = (2, 0, -3)`.
pub fn general_square_pair(n: usize, kappa: ProfileSpec, rho: ProfileSpec, c: f64) -> Result<AbMetric> {
    let (abar, bbar) = corollary_family(n, kappa, rho, c)?;
    let (a, b) = construct_thm3(abar, bbar, 2.0, 0.0, -3.0)?;
    square_metric(a, b)
}

/// `F = alpha + beta`; `|s|` is kept below 1.
pub fn randers(a: MetricRef, b: OneFormRef) -> Result<AbMetric> {
    Ok(AbMetric::new(a, b, Arc::new(PhiSeries::randers()))?.with_s_limit(1.0))
}

//! Finsler functions `F = alpha phi(beta / alpha)`, their sprays, the
//! Douglas and Berwald tensors, and sampled predicates built on them.

mod checks;
mod sampler;
mod tensors;

use std::fmt::Debug;
use std::sync::Arc;

use ndarray::Array2;

use crate::diffkit::{base_tags, constants, dot, linalg, Jet};
use crate::error::{domain, Error, Result};
use crate::geometry::{quadratic_form, MetricRef, OneFormRef, ScaledOneForm, ShiftedMetric};
use crate::phifun::{apply_gu, apply_hv, PhiParams, PhiRef};

pub use checks::{is_berwald, is_douglas, is_douglas_with, lss_criterion, DouglasPath, LssReport};
pub use sampler::{Sample, Sampler};
pub use tensors::{
    berwald_tensor, douglas_tensor, douglas_tensor_fd, projective_spray, DouglasTensor, DEFAULT_DOUGLAS_FD_STEP,
};

/// Fraction of the admissible `|s|` range the sampler may use.
pub const S_MARGIN: f64 = 0.9;

/// A Finsler metric given through `L = F^2` on jets.
pub trait FinslerFunction: Send + Sync + Debug {
    fn dim(&self) -> usize;

    /// `F(x, y)^2`.
    fn eval_sq(&self, x: &[Jet], y: &[Jet]) -> Result<Jet>;

    /// Whether `(x, y)` lies well inside the regular domain.
    fn admissible(&self, _x: &[f64], _y: &[f64]) -> bool {
        true
    }
}

pub type FinslerRef = Arc<dyn FinslerFunction>;

/// `F = alpha phi(s)`, `s = beta / alpha`.
#[derive(Debug, Clone)]
pub struct AbMetric {
    pub a: MetricRef,
    pub b: OneFormRef,
    pub phi: PhiRef,
    s_limit: f64,
}

impl AbMetric {
    /// `|s|` is limited by the radius of `phi` only.
    pub fn new(a: MetricRef, b: OneFormRef, phi: PhiRef) -> Result<Self> {
        if a.dim() != b.dim() {
            return Err(Error::InvalidParameter(format!(
                "metric has dimension {}, 1-form has {}",
                a.dim(),
                b.dim()
            )));
        }
        if a.dim() < 2 {
            return Err(Error::InvalidParameter("dimension must be at least 2".into()));
        }
        let s_limit = phi.radius();
        Ok(AbMetric { a, b, phi, s_limit })
    }

    /// Also limits `|s|` by the regularity radius of the ODE constants.
    pub fn with_params(a: MetricRef, b: OneFormRef, phi: PhiRef, p: &PhiParams) -> Result<Self> {
        let mut m = Self::new(a, b, phi)?;
        m.s_limit = m.s_limit.min(p.regularity_radius(f64::INFINITY));
        Ok(m)
    }

    /// Caps `|s|` further, e.g. at 1 for Randers metrics.
    pub fn with_s_limit(mut self, limit: f64) -> Self {
        self.s_limit = self.s_limit.min(limit);
        self
    }

    /// The same `F` as `sqrt(alpha^2 - u beta^2) (g_u phi)(beta / ...)`.
    pub fn reparametrize_gu(&self, u: f64) -> Result<AbMetric> {
        let a: MetricRef = Arc::new(ShiftedMetric(self.a.clone(), self.b.clone(), u));
        AbMetric::new(a, self.b.clone(), apply_gu(self.phi.clone(), u))
    }

    /// The same `F` as `alpha (h_v phi)(beta / (v alpha))`.
    pub fn reparametrize_hv(&self, v: f64) -> Result<AbMetric> {
        let phi = apply_hv(self.phi.clone(), v)?;
        let b: OneFormRef = Arc::new(ScaledOneForm(self.b.clone(), 1.0 / v));
        AbMetric::new(self.a.clone(), b, phi)
    }

    pub fn s_limit(&self) -> f64 {
        self.s_limit
    }

    /// `(alpha^2, beta)` on jets.
    fn alpha_beta(&self, x: &[Jet], y: &[Jet]) -> Result<(Jet, Jet)> {
        let a = self.a.components(x)?;
        let b = self.b.components(x)?;
        Ok((quadratic_form(&a, y), dot(&b, y)))
    }

    /// `s = beta / alpha` at a plain point.
    pub fn s_value(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        let (a2, b) = self.alpha_beta(&constants(x), &constants(y))?;
        if !(a2.value() > 0.0) {
            return Err(domain("alpha vanishes"));
        }
        Ok(b.value() / a2.value().sqrt())
    }
}

impl FinslerFunction for AbMetric {
    fn dim(&self) -> usize {
        self.a.dim()
    }

    fn eval_sq(&self, x: &[Jet], y: &[Jet]) -> Result<Jet> {
        let (a2, b) = self.alpha_beta(x, y)?;
        if !(a2.value() > 0.0) {
            return Err(domain(format!("alpha^2 = {} is not positive", a2.value())));
        }
        let alpha = a2.sqrt()?;
        let s = &b / &alpha;
        let phi = self.phi.eval_jet(&s)?;
        Ok(&a2 * &phi.square())
    }

    fn admissible(&self, x: &[f64], y: &[f64]) -> bool {
        if !self.a.contains(x) || !self.b.contains(x) {
            return false;
        }
        match self.s_value(x, y) {
            Ok(s) => s.abs() < S_MARGIN * self.s_limit,
            Err(_) => false,
        }
    }
}

fn check_point(f: &dyn FinslerFunction, x: &[f64], y: usize) -> Result<()> {
    let n = f.dim();
    if x.len() != n || y != n {
        return Err(Error::InvalidParameter(format!(
            "expected points of dimension {n}, got {} and {y}",
            x.len()
        )));
    }
    Ok(())
}

/// `F(x, y)`.
pub fn f_eval(f: &dyn FinslerFunction, x: &[f64], y: &[f64]) -> Result<f64> {
    check_point(f, x, y.len())?;
    let l = f.eval_sq(&constants(x), &constants(y))?.value();
    if !(l > 0.0) {
        return Err(domain(format!("F^2 = {l} is not positive")));
    }
    Ok(l.sqrt())
}

/// Hessian of `L = F^2` in `y` on jets (each entry keeps the tags of `y`).
fn hessian_jet(f: &dyn FinslerFunction, x: &[Jet], y: &[Jet]) -> Result<Vec<Jet>> {
    let n = y.len();
    let b = base_tags(y.iter().chain(x));
    let mut h = vec![Jet::zero(); n * n];
    for i in 0..n {
        for j in i..n {
            let mut yy = y.to_vec();
            yy[i] = &yy[i] + &Jet::tag(b);
            yy[j] = &yy[j] + &Jet::tag(b + 1);
            let v = f.eval_sq(x, &yy)?.component(b, 0b11 << b);
            h[j * n + i] = v.clone();
            h[i * n + j] = v;
        }
    }
    Ok(h)
}

/// `g_ij = [F^2 / 2]_{y^i y^j}`, required to be positive definite.
pub fn fundamental_tensor(f: &dyn FinslerFunction, x: &[f64], y: &[f64]) -> Result<Array2<f64>> {
    check_point(f, x, y.len())?;
    let n = f.dim();
    let h = hessian_jet(f, &constants(x), &constants(y))?;
    let g = linalg::values(&h, n) * 0.5;
    if !linalg::is_positive_definite(&g) {
        return Err(Error::Degenerate(format!(
            "fundamental tensor is not positive definite at x = {x:?}, y = {y:?}"
        )));
    }
    Ok(g)
}

/// Spray coefficients with `y` carrying jet tags, so that derivatives of
/// `G^i` in `y` come out of the same evaluation.
///
/// `G^i = 1/4 g^{il} {[F^2]_{x^k y^l} y^k - [F^2]_{x^l}}`; the three fresh
/// tags above those of `y` seed `d/dy^l`, the directional `y^k d/dx^k` and
/// `d/dx^l` respectively.
pub fn spray_jet(f: &dyn FinslerFunction, x: &[f64], y: &[Jet]) -> Result<Vec<Jet>> {
    check_point(f, x, y.len())?;
    let n = f.dim();
    let b = base_tags(y);
    let xc = constants(x);
    let h = hessian_jet(f, &xc, y)?;
    let mut rhs = Vec::with_capacity(n);
    for l in 0..n {
        let mut yy = y.to_vec();
        yy[l] = &yy[l] + &Jet::tag(b);
        let xs: Vec<Jet> = (0..n)
            .map(|k| {
                let mut v = &xc[k] + &(&y[k] * &Jet::tag(b + 1));
                if k == l {
                    v += &Jet::tag(b + 2);
                }
                v
            })
            .collect();
        let val = f.eval_sq(&xs, &yy)?;
        rhs.push(&val.component(b, 0b011 << b) - &val.component(b, 0b100 << b));
    }
    // g = H / 2, so G = 1/4 g^{-1} rhs = 1/2 H^{-1} rhs
    let sol = linalg::solve(&h, n, &rhs)?;
    Ok(sol.into_iter().map(|v| v.scale(0.5)).collect())
}

/// `G^i(x, y)`.
pub fn spray(f: &dyn FinslerFunction, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
    Ok(spray_jet(f, x, &constants(y))?.iter().map(Jet::value).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{MetricField, OneFormField};
    use crate::phifun::PhiSeries;

    #[derive(Debug)]
    struct Euclid;
    impl MetricField for Euclid {
        fn dim(&self) -> usize {
            3
        }
        fn components(&self, _x: &[Jet]) -> Result<Vec<Jet>> {
            Ok((0..9).map(|k| Jet::constant(if k % 4 == 0 { 1.0 } else { 0.0 })).collect())
        }
    }

    #[derive(Debug)]
    struct ConstForm(f64);
    impl OneFormField for ConstForm {
        fn dim(&self) -> usize {
            3
        }
        fn components(&self, _x: &[Jet]) -> Result<Vec<Jet>> {
            Ok(constants(&[self.0, 0.0, 0.0]))
        }
    }

    /// Conformally flat e^{|x|^2} delta_ij, to get a non-trivial spray.
    #[derive(Debug)]
    struct Conformal;
    impl MetricField for Conformal {
        fn dim(&self) -> usize {
            3
        }
        fn components(&self, x: &[Jet]) -> Result<Vec<Jet>> {
            let f = dot(x, x).exp();
            Ok((0..9).map(|k| if k % 4 == 0 { f.clone() } else { Jet::zero() }).collect())
        }
    }

    fn randers(b: f64) -> AbMetric {
        AbMetric::new(Arc::new(Euclid), Arc::new(ConstForm(b)), Arc::new(PhiSeries::randers())).unwrap()
    }

    #[test]
    fn randers_value_and_homogeneity() {
        let m = randers(0.1);
        let (x, y) = ([0.1, 0.2, 0.3], [1.0, 2.0, -2.0]);
        assert!((f_eval(&m, &x, &y).unwrap() - 3.1).abs() < 1e-15);
        let y2: Vec<f64> = y.iter().map(|v| 2.0 * v).collect();
        assert!((f_eval(&m, &x, &y2).unwrap() - 6.2).abs() < 1e-14);
    }

    #[test]
    fn riemannian_fundamental_tensor_is_metric() {
        let m = AbMetric::new(Arc::new(Conformal), Arc::new(ConstForm(0.3)), Arc::new(PhiSeries::riemannian())).unwrap();
        let x = [0.2, -0.1, 0.3];
        let g = fundamental_tensor(&m, &x, &[0.3, 0.4, 0.5]).unwrap();
        let e = (0.14f64).exp();
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { e } else { 0.0 };
                assert!((g[[i, j]] - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn randers_g_positive_and_scale_invariant() {
        let m = randers(0.1);
        let x = [0.0; 3];
        let g1 = fundamental_tensor(&m, &x, &[0.3, -0.5, 0.2]).unwrap();
        let g2 = fundamental_tensor(&m, &x, &[0.9, -1.5, 0.6]).unwrap();
        for (a, b) in g1.iter().zip(g2.iter()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn euclidean_spray_vanishes() {
        let m = randers(0.0);
        let g = spray(&m, &[0.1, 0.2, 0.3], &[1.0, 0.5, -0.5]).unwrap();
        assert!(g.iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn spray_matches_christoffel() {
        let m = AbMetric::new(Arc::new(Conformal), Arc::new(ConstForm(0.0)), Arc::new(PhiSeries::riemannian())).unwrap();
        let (x, y) = ([0.2, -0.1, 0.3], [0.3, 0.4, 0.5]);
        let want = crate::geometry::riemann_spray(&Conformal, &x, &y).unwrap();
        let got = spray(&m, &x, &y).unwrap();
        for i in 0..3 {
            assert!((want[i] - got[i]).abs() < 1e-12, "{want:?} vs {got:?}");
        }
        let y2: Vec<f64> = y.iter().map(|v| 2.0 * v).collect();
        let g2 = spray(&m, &x, &y2).unwrap();
        for i in 0..3 {
            assert!((g2[i] - 4.0 * got[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn dimension_mismatch() {
        #[derive(Debug)]
        struct Plane;
        impl OneFormField for Plane {
            fn dim(&self) -> usize {
                2
            }
            fn components(&self, _x: &[Jet]) -> Result<Vec<Jet>> {
                Ok(constants(&[0.0, 0.0]))
            }
        }
        assert!(AbMetric::new(Arc::new(Euclid), Arc::new(Plane), Arc::new(PhiSeries::randers())).is_err());
    }

    #[test]
    fn reparametrization_keeps_f() {
        let m = AbMetric::new(Arc::new(Euclid), Arc::new(ConstForm(0.3)), Arc::new(PhiSeries::square())).unwrap();
        let (x, y) = ([0.1, 0.2, -0.1], [0.4, -0.3, 0.8]);
        let f0 = f_eval(&m, &x, &y).unwrap();
        for u in [-0.7, 0.4, 2.0] {
            let g = m.reparametrize_gu(u).unwrap();
            assert!((f_eval(&g, &x, &y).unwrap() - f0).abs() < 1e-12);
        }
        let h = m.reparametrize_hv(-1.7).unwrap();
        assert!((f_eval(&h, &x, &y).unwrap() - f0).abs() < 1e-12);
    }
}

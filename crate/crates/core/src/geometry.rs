//! Riemannian side: metric fields, 1-form fields, Christoffel symbols, the
//! Riemannian spray, and the covariant derivative of a 1-form split into its
//! symmetric and antisymmetric parts.

use std::fmt::Debug;
use std::sync::Arc;

use ndarray::{Array1, Array2, Array3};

use crate::diffkit::{constants, dot, linalg, Jet};
use crate::error::{domain, Error, Result};

/// A Riemannian metric `a_ij(x)` given in closed form.
///
/// `components` returns the row-major `n x n` matrix evaluated on jets, so
/// every x-derivative is exact.
pub trait MetricField: Send + Sync + Debug {
    fn dim(&self) -> usize;

    fn components(&self, x: &[Jet]) -> Result<Vec<Jet>>;

    /// Chart predicate: points where the closed form may be evaluated.
    fn contains(&self, _x: &[f64]) -> bool {
        true
    }
}

/// A 1-form `b_i(x)` given in closed form.
pub trait OneFormField: Send + Sync + Debug {
    fn dim(&self) -> usize;

    fn components(&self, x: &[Jet]) -> Result<Vec<Jet>>;

    fn contains(&self, _x: &[f64]) -> bool {
        true
    }
}

pub type MetricRef = Arc<dyn MetricField>;
pub type OneFormRef = Arc<dyn OneFormField>;

/// `alpha^2 = a_ij y^i y^j` on jets.
pub fn quadratic_form(a: &[Jet], y: &[Jet]) -> Jet {
    let n = y.len();
    let mut acc = Jet::zero();
    for i in 0..n {
        let mut row = Jet::zero();
        for j in 0..n {
            row += &a[i * n + j] * &y[j];
        }
        acc += &row * &y[i];
    }
    acc
}

/// `b^2 = a^ij b_i b_j` on jets.
pub fn norm_sq_jet(a: &[Jet], b: &[Jet]) -> Result<Jet> {
    let raised = linalg::solve(a, b.len(), b)?;
    Ok(dot(&raised, b))
}

/// `b^2 = ||beta||_alpha^2` as a jet in the point.
pub fn b_norm_sq(a: &dyn MetricField, b: &dyn OneFormField, x: &[Jet]) -> Result<Jet> {
    let am = a.components(x)?;
    let bv = b.components(x)?;
    norm_sq_jet(&am, &bv)
}

fn ensure_admissible(a: &dyn MetricField, x: &[f64]) -> Result<()> {
    if x.len() != a.dim() {
        return Err(Error::InvalidParameter(format!(
            "point has dimension {}, metric has {}",
            x.len(),
            a.dim()
        )));
    }
    if !a.contains(x) {
        return Err(domain(format!("point {x:?} outside the metric chart")));
    }
    Ok(())
}

fn metric_values(a: &dyn MetricField, x: &[f64]) -> Result<Array2<f64>> {
    let n = a.dim();
    Ok(linalg::values(&a.components(&constants(x))?, n))
}

/// `a^{ij}(x)`.
pub fn metric_inverse(a: &dyn MetricField, x: &[f64]) -> Result<Array2<f64>> {
    ensure_admissible(a, x)?;
    let n = a.dim();
    let inv = linalg::inverse(&a.components(&constants(x))?, n)?;
    Ok(linalg::values(&inv, n))
}

/// `d_m a_ij` as `[m][i][j]`.
fn metric_gradient(a: &dyn MetricField, x: &[f64]) -> Result<Array3<f64>> {
    let n = a.dim();
    let mut out = Array3::zeros((n, n, n));
    for m in 0..n {
        let mut xj = constants(x);
        xj[m] = &xj[m] + &Jet::tag(0);
        let comps = a.components(&xj)?;
        for i in 0..n {
            for j in 0..n {
                out[[m, i, j]] = comps[i * n + j].coeff(1);
            }
        }
    }
    Ok(out)
}

/// Christoffel symbols of the second kind, indexed `[i][j][k] = Gamma^i_jk`.
pub fn christoffel(a: &dyn MetricField, x: &[f64]) -> Result<Array3<f64>> {
    let inv = metric_inverse(a, x)?;
    let da = metric_gradient(a, x)?;
    let n = a.dim();
    // first kind: Gamma_ljk = 1/2 (d_j a_lk + d_k a_jl - d_l a_jk)
    let mut first = Array3::zeros((n, n, n));
    for l in 0..n {
        for j in 0..n {
            for k in j..n {
                let v = 0.5 * (da[[j, l, k]] + da[[k, j, l]] - da[[l, j, k]]);
                first[[l, j, k]] = v;
                first[[l, k, j]] = v;
            }
        }
    }
    let mut gamma = Array3::zeros((n, n, n));
    for i in 0..n {
        for j in 0..n {
            for k in j..n {
                let mut s = 0.0;
                for l in 0..n {
                    s += inv[[i, l]] * first[[l, j, k]];
                }
                gamma[[i, j, k]] = s;
                gamma[[i, k, j]] = s;
            }
        }
    }
    Ok(gamma)
}

/// Geodesic spray of a Riemannian metric, `G^i = 1/2 Gamma^i_jk y^j y^k`.
pub fn riemann_spray(a: &dyn MetricField, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
    let gamma = christoffel(a, x)?;
    let n = a.dim();
    Ok((0..n)
        .map(|i| {
            let mut s = 0.0;
            for j in 0..n {
                for k in 0..n {
                    s += gamma[[i, j, k]] * y[j] * y[k];
                }
            }
            0.5 * s
        })
        .collect())
}

/// Covariant derivative `b_{i|j}` of a 1-form and the usual abbreviations
/// built from it.
#[derive(Debug, Clone)]
pub struct NablaBeta {
    /// `b_{i|j}`, indexed `[i][j]`.
    pub full: Array2<f64>,
    pub r: Array2<f64>,
    pub s: Array2<f64>,
    /// `r_i = b^j r_ji`
    pub r_vec: Array1<f64>,
    /// `s_i = b^j s_ji`
    pub s_vec: Array1<f64>,
    /// `r = b^i r_i`
    pub r_scalar: f64,
    pub b2: f64,
    /// `b_i`
    pub b: Array1<f64>,
    /// `b^i = a^ij b_j`
    pub b_up: Array1<f64>,
}

impl NablaBeta {
    pub fn max_abs_s(&self) -> f64 {
        self.s.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max_abs_full(&self) -> f64 {
        self.full.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

fn oneform_values(b: &dyn OneFormField, x: &[f64]) -> Result<Array1<f64>> {
    Ok(b.components(&constants(x))?.iter().map(Jet::value).collect())
}

/// `b_{i|j} = d_j b_i - Gamma^k_ij b_k` with its `r`/`s` decomposition.
pub fn covariant_derivative(b: &dyn OneFormField, a: &dyn MetricField, x: &[f64]) -> Result<NablaBeta> {
    if b.dim() != a.dim() {
        return Err(Error::InvalidParameter("1-form and metric dimensions differ".into()));
    }
    ensure_admissible(a, x)?;
    if !b.contains(x) {
        return Err(domain(format!("point {x:?} outside the 1-form chart")));
    }
    let n = a.dim();
    let gamma = christoffel(a, x)?;
    let inv = metric_inverse(a, x)?;
    let bv = oneform_values(b, x)?;
    let mut db = Array2::zeros((n, n)); // [i][j] = d_j b_i
    for j in 0..n {
        let mut xj = constants(x);
        xj[j] = &xj[j] + &Jet::tag(0);
        let comps = b.components(&xj)?;
        for i in 0..n {
            db[[i, j]] = comps[i].coeff(1);
        }
    }
    let mut full = Array2::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            let mut s = db[[i, j]];
            for k in 0..n {
                s -= gamma[[k, i, j]] * bv[k];
            }
            full[[i, j]] = s;
        }
    }
    let r = Array2::from_shape_fn((n, n), |(i, j)| 0.5 * (full[[i, j]] + full[[j, i]]));
    let s = Array2::from_shape_fn((n, n), |(i, j)| 0.5 * (full[[i, j]] - full[[j, i]]));
    let b_up = inv.dot(&bv);
    let r_vec = Array1::from_shape_fn(n, |i| (0..n).map(|j| b_up[j] * r[[j, i]]).sum());
    let s_vec = Array1::from_shape_fn(n, |i| (0..n).map(|j| b_up[j] * s[[j, i]]).sum());
    let r_scalar = b_up.dot(&r_vec);
    let b2 = b_up.dot(&bv);
    Ok(NablaBeta {
        full,
        r,
        s,
        r_vec,
        s_vec,
        r_scalar,
        b2,
        b: bv,
        b_up,
    })
}

/// Outcome of fitting `r_ij = c a_ij`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConformalFit {
    pub c: f64,
    pub residual: f64,
    pub closed: bool,
    pub max_s: f64,
}

impl ConformalFit {
    /// Closed and conformal within `tol` (on both the fit and `s_ij`).
    pub fn passes(&self, tol: f64) -> bool {
        self.closed && self.residual < tol
    }
}

fn frobenius(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

/// Least-squares projection of `r_ij` onto `a_ij`; closedness from `s_ij`.
pub fn check_conformal(a: &dyn MetricField, b: &dyn OneFormField, x: &[f64], tol: f64) -> Result<ConformalFit> {
    let nb = covariant_derivative(b, a, x)?;
    let av = metric_values(a, x)?;
    let c = frobenius(&nb.r, &av) / frobenius(&av, &av);
    let residual = nb
        .r
        .iter()
        .zip(av.iter())
        .fold(0.0_f64, |m, (r, a)| m.max((r - c * a).abs()));
    let max_s = nb.max_abs_s();
    Ok(ConformalFit {
        c,
        residual,
        closed: max_s < tol,
        max_s,
    })
}

/// Outcome of fitting `b_{i|j} = tau {(1 + k1 b^2) a_ij + (k3 + k2 b^2) b_i b_j}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DouglasConditionFit {
    pub tau: f64,
    pub residual: f64,
    pub pass: bool,
}

pub fn check_douglas_condition(
    a: &dyn MetricField,
    b: &dyn OneFormField,
    k1: f64,
    k2: f64,
    k3: f64,
    x: &[f64],
    tol: f64,
) -> Result<DouglasConditionFit> {
    let nb = covariant_derivative(b, a, x)?;
    let av = metric_values(a, x)?;
    let n = a.dim();
    let b2 = nb.b2;
    let model = Array2::from_shape_fn((n, n), |(i, j)| {
        (1.0 + k1 * b2) * av[[i, j]] + (k3 + k2 * b2) * nb.b[i] * nb.b[j]
    });
    let denom = frobenius(&model, &model);
    let tau = if denom > 0.0 { frobenius(&nb.full, &model) / denom } else { 0.0 };
    let residual = nb
        .full
        .iter()
        .zip(model.iter())
        .fold(0.0_f64, |m, (v, w)| m.max((v - tau * w).abs()));
    Ok(DouglasConditionFit {
        tau,
        residual,
        pass: residual < tol,
    })
}

/// Sum of two 1-forms.
#[derive(Debug, Clone)]
pub struct SumOneForm(pub OneFormRef, pub OneFormRef);

impl OneFormField for SumOneForm {
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn components(&self, x: &[Jet]) -> Result<Vec<Jet>> {
        let a = self.0.components(x)?;
        let b = self.1.components(x)?;
        Ok(a.iter().zip(&b).map(|(p, q)| p + q).collect())
    }

    fn contains(&self, x: &[f64]) -> bool {
        self.0.contains(x) && self.1.contains(x)
    }
}

/// Constant multiple of a 1-form.
#[derive(Debug, Clone)]
pub struct ScaledOneForm(pub OneFormRef, pub f64);

impl OneFormField for ScaledOneForm {
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn components(&self, x: &[Jet]) -> Result<Vec<Jet>> {
        Ok(self.0.components(x)?.iter().map(|v| v.scale(self.1)).collect())
    }

    fn contains(&self, x: &[f64]) -> bool {
        self.0.contains(x)
    }
}

/// `a_ij - u b_i b_j`, i.e. `alpha^2 - u beta^2`.
#[derive(Debug, Clone)]
pub struct ShiftedMetric(pub MetricRef, pub OneFormRef, pub f64);

impl MetricField for ShiftedMetric {
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn components(&self, x: &[Jet]) -> Result<Vec<Jet>> {
        let a = self.0.components(x)?;
        let b = self.1.components(x)?;
        let n = b.len();
        Ok((0..n * n).map(|k| &a[k] - &(&(&b[k / n] * &b[k % n]) * self.2)).collect())
    }

    fn contains(&self, x: &[f64]) -> bool {
        self.0.contains(x) && self.1.contains(x)
    }
}

//! Power-series profiles: the three reduced families and the general
//! series solution of the Douglas ODE.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::params::PhiParams;
use super::PhiFunction;
use crate::diffkit::Jet;
use crate::error::{domain, Error, Result};

/// Default number of even terms kept.
pub const DEFAULT_TRUNCATION: usize = 200;

const TERM_CUTOFF: f64 = 1e-16;

/// `phi(s) = sum_m c_m s^m` with a finite coefficient list.
#[derive(Debug, Clone)]
pub struct PhiSeries {
    coeffs: Arc<[f64]>,
    radius: f64,
    label: String,
}

impl PhiSeries {
    /// `radius` is the open disk on which evaluation is allowed.
    pub fn new(coeffs: Vec<f64>, radius: f64, label: impl Into<String>) -> Self {
        let mut coeffs = coeffs;
        while coeffs.len() > 1 && coeffs[coeffs.len() - 1] == 0.0 {
            coeffs.pop();
        }
        PhiSeries {
            coeffs: coeffs.into(),
            radius,
            label: label.into(),
        }
    }

    pub fn polynomial(coeffs: Vec<f64>, label: impl Into<String>) -> Self {
        Self::new(coeffs, f64::INFINITY, label)
    }

    /// `phi = 1 + s`.
    pub fn randers() -> Self {
        Self::polynomial(vec![1.0, 1.0], "randers")
    }

    /// `phi = (1 + s)^2`.
    pub fn square() -> Self {
        Self::polynomial(vec![1.0, 2.0, 1.0], "square")
    }

    /// `phi = 1`.
    pub fn riemannian() -> Self {
        Self::polynomial(vec![1.0], "riemannian")
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    fn check(&self, s: f64) -> Result<()> {
        if !(s.abs() < self.radius) {
            return Err(domain(format!(
                "|s| = {} outside the disk of radius {} for {}",
                s.abs(),
                self.radius,
                self.label
            )));
        }
        Ok(())
    }

    /// `phi^(k)(s) / k!` summed termwise; stops once two consecutive
    /// non-zero terms fall below the cutoff.
    fn taylor_at(&self, s: f64, k: usize) -> f64 {
        let c = &self.coeffs;
        if k >= c.len() {
            return 0.0;
        }
        let mut sum = 0.0;
        let mut binom = 1.0; // C(m, k)
        let mut pow = 1.0; // s^(m-k)
        let mut small = 0;
        for m in k..c.len() {
            if m > k {
                binom *= m as f64 / (m - k) as f64;
                pow *= s;
            }
            if c[m] == 0.0 {
                continue;
            }
            let term = c[m] * binom * pow;
            sum += term;
            if m > k + 3 && term.abs() < TERM_CUTOFF {
                small += 1;
                if small >= 2 {
                    break;
                }
            } else {
                small = 0;
            }
        }
        sum
    }
}

impl PhiFunction for PhiSeries {
    fn eval(&self, s: f64) -> Result<f64> {
        self.check(s)?;
        Ok(self.taylor_at(s, 0))
    }

    fn derivs(&self, s: f64) -> Result<[f64; 3]> {
        self.check(s)?;
        Ok([self.taylor_at(s, 0), self.taylor_at(s, 1), 2.0 * self.taylor_at(s, 2)])
    }

    fn eval_jet(&self, s: &Jet) -> Result<Jet> {
        let s0 = s.value();
        self.check(s0)?;
        let taylor: Vec<f64> = (0..=s.tags()).map(|k| self.taylor_at(s0, k)).collect();
        Ok(s.compose(&taylor))
    }

    fn radius(&self) -> f64 {
        self.radius
    }
}

/// Which reduced equation a family solves (by the sign of `Delta1`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FamilyCase {
    /// `Delta1 > 0`: `(1 - s^2) phi'' = 2 sigma (phi - s phi')`
    Pos,
    /// `Delta1 = 0`: `phi'' = 2 sigma (phi - s phi')`
    Zero,
    /// `Delta1 < 0`: `(1 + 2 sigma s^2 + s^4) phi'' = s^2 (phi - s phi')`
    Neg,
}

/// One-parameter normal form `(case, sigma, eps)` of a Douglas profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhiFamily {
    pub case: FamilyCase,
    pub sigma: f64,
    #[serde(default)]
    pub eps: f64,
    #[serde(default = "default_truncation")]
    pub truncation: usize,
}

fn default_truncation() -> usize {
    DEFAULT_TRUNCATION
}

impl PhiFamily {
    pub fn new(case: FamilyCase, sigma: f64, eps: f64) -> Result<Self> {
        let f = PhiFamily {
            case,
            sigma,
            eps,
            truncation: DEFAULT_TRUNCATION,
        };
        f.validate()?;
        Ok(f)
    }

    pub fn validate(&self) -> Result<()> {
        let s = self.sigma;
        let ok = match self.case {
            FamilyCase::Pos => s != 0.0 && s != -0.5 && s.is_finite(),
            FamilyCase::Zero => s == 1.0 || s == -1.0,
            FamilyCase::Neg => s.abs() < 1.0,
        };
        if !ok {
            return Err(Error::InvalidParameter(format!(
                "sigma = {s} not allowed for the {:?} family",
                self.case
            )));
        }
        if self.truncation == 0 {
            return Err(Error::InvalidParameter("truncation must be positive".into()));
        }
        Ok(())
    }

    /// `(k1, k2, k3, eps)` of the general equation this family solves.
    pub fn params(&self) -> PhiParams {
        let s = self.sigma;
        match self.case {
            FamilyCase::Pos => PhiParams::new(2.0 * s, 0.0, -1.0 - 2.0 * s, self.eps),
            FamilyCase::Zero => PhiParams::new(2.0 * s, 0.0, -2.0 * s, self.eps),
            FamilyCase::Neg => PhiParams::new(0.0, 1.0, 2.0 * s, self.eps),
        }
    }

    pub fn series(&self) -> Result<PhiSeries> {
        self.validate()?;
        let n = self.truncation;
        let s = self.sigma;
        let mut c = vec![0.0; 2 * n + 1];
        c[0] = 1.0;
        c[1] = self.eps;
        let (radius, label) = match self.case {
            FamilyCase::Pos => {
                // prod_{k=1}^{n} (k - sigma - 1)(2k - 3) / (k (2k - 1))
                let mut a = 1.0;
                for k in 1..=n {
                    let kf = k as f64;
                    a *= (kf - s - 1.0) * (2.0 * kf - 3.0) / (kf * (2.0 * kf - 1.0));
                    c[2 * k] = a;
                }
                (1.0, format!("pos(sigma={s}, eps={})", self.eps))
            }
            FamilyCase::Zero => {
                // 2 (-1)^j sigma^{j+1} / ((2j + 2)(2j + 1) j!) for s^{2j+2},
                // generated by its term ratio to avoid overflowing j!.
                let mut a = s; // j = 0: 2 sigma / 2
                c[2] = a;
                for j in 1..n {
                    let jf = j as f64;
                    a *= -s * (2.0 * jf) * (2.0 * jf - 1.0) / ((2.0 * jf + 2.0) * (2.0 * jf + 1.0) * jf);
                    c[2 * j + 2] = a;
                }
                (f64::INFINITY, format!("zero(sigma={s}, eps={})", self.eps))
            }
            FamilyCase::Neg => {
                // a_{2n+2} = -2 sigma 2n(2n-1)/((2n+2)(2n+1)) a_{2n}
                //            - (2n-1)(2n-3)/((2n+2)(2n+1)) a_{2n-2}
                let mut prev = 1.0; // a_0
                let mut cur = 0.0; // a_2
                for k in 1..n {
                    let m = 2.0 * k as f64;
                    let den = (m + 2.0) * (m + 1.0);
                    let next = -2.0 * s * m * (m - 1.0) / den * cur - (m - 1.0) * (m - 3.0) / den * prev;
                    c[2 * k + 2] = next;
                    prev = cur;
                    cur = next;
                }
                (1.0, format!("neg(sigma={s}, eps={})", self.eps))
            }
        };
        Ok(PhiSeries::new(c, radius, label))
    }

    /// Residual of the reduced equation at `s`.
    pub fn reduced_residual(&self, phi: &dyn PhiFunction, s: f64) -> Result<f64> {
        let [p, dp, ddp] = phi.derivs(s)?;
        let sigma = self.sigma;
        let w = p - s * dp;
        Ok(match self.case {
            FamilyCase::Pos => (1.0 - s * s) * ddp - 2.0 * sigma * w,
            FamilyCase::Zero => ddp - 2.0 * sigma * w,
            FamilyCase::Neg => (1.0 + 2.0 * sigma * s * s + s.powi(4)) * ddp - s * s * w,
        })
    }
}

fn family_eval(case: FamilyCase, sigma: f64, eps: f64, s: f64) -> Result<f64> {
    PhiFamily::new(case, sigma, eps)?.series()?.eval(s)
}

/// Solution of the reduced equation for `Delta1 > 0`.
pub fn phi_pos(sigma: f64, eps: f64, s: f64) -> Result<f64> {
    family_eval(FamilyCase::Pos, sigma, eps, s)
}

/// Solution of the reduced equation for `Delta1 = 0` (entire).
pub fn phi_zero(sigma: f64, eps: f64, s: f64) -> Result<f64> {
    family_eval(FamilyCase::Zero, sigma, eps, s)
}

/// Solution of the reduced equation for `Delta1 < 0`.
pub fn phi_neg(sigma: f64, eps: f64, s: f64) -> Result<f64> {
    family_eval(FamilyCase::Neg, sigma, eps, s)
}

/// Power-series solution of the full three-constant equation with
/// `phi(0) = 1`, `phi'(0) = eps`.
///
/// Substituting `phi = sum c_m s^m` gives
/// `c_{m+2} = (1 - m) [(k1 + (k1 + k3) m) c_m + k2 (m - 3) c_{m-2}] / ((m + 2)(m + 1))`.
pub fn series_from_params(p: &PhiParams, truncation: usize) -> PhiSeries {
    let deg = 2 * truncation + 1;
    let mut c = vec![0.0; deg + 1];
    c[0] = 1.0;
    c[1] = p.eps;
    let sum = p.k1 + p.k3;
    for m in 0..deg - 1 {
        let mf = m as f64;
        let back = if m >= 2 { c[m - 2] } else { 0.0 };
        c[m + 2] = (1.0 - mf) * ((p.k1 + sum * mf) * c[m] + p.k2 * (mf - 3.0) * back) / ((mf + 2.0) * (mf + 1.0));
    }
    PhiSeries::new(
        c,
        p.series_radius(),
        format!("ode(k1={}, k2={}, k3={}, eps={})", p.k1, p.k2, p.k3, p.eps),
    )
}

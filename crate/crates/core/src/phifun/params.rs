use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Constants `(k1, k2, k3)` of the Douglas ODE together with `eps = phi'(0)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhiParams {
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
    #[serde(default)]
    pub eps: f64,
}

impl PhiParams {
    pub fn new(k1: f64, k2: f64, k3: f64, eps: f64) -> Self {
        PhiParams { k1, k2, k3, eps }
    }

    /// `(k1 + k3)^2 - 4 k2`
    pub fn delta1(&self) -> f64 {
        let s = self.k1 + self.k3;
        s * s - 4.0 * self.k2
    }

    /// `4 (k1 k3 - k2)`
    pub fn delta2(&self) -> f64 {
        4.0 * (self.k1 * self.k3 - self.k2)
    }

    /// `k1 - k3`
    pub fn delta3(&self) -> f64 {
        self.k1 - self.k3
    }

    /// Absolute threshold under which a discriminant is treated as zero.
    pub fn zero_tolerance(&self) -> f64 {
        1e-12 * (1.0 + self.k1 * self.k1 + self.k3 * self.k3 + self.k2.abs())
    }

    /// Randers type exactly when `Delta2 = 0`.
    pub fn is_randers(&self) -> bool {
        self.delta2().abs() <= self.zero_tolerance()
    }

    /// Largest `b <= b_max` keeping `1 + k1 s^2` and
    /// `1 + (k1 + k3) s^2 + k2 s^4` positive for every `|s| < b`.
    pub fn regularity_radius(&self, b_max: f64) -> f64 {
        regularity_radius(self, b_max)
    }

    /// Radius of convergence of the power-series solution about `s = 0`:
    /// the nearest complex zero of `1 + (k1 + k3) s^2 + k2 s^4`.
    pub fn series_radius(&self) -> f64 {
        let s = self.k1 + self.k3;
        let k2 = self.k2;
        // roots z of 1 + s z + k2 z^2, with z = s^2
        let zmin = if k2 == 0.0 {
            if s == 0.0 {
                return f64::INFINITY;
            }
            (1.0 / s).abs()
        } else {
            let disc = Complex64::new(s * s - 4.0 * k2, 0.0).sqrt();
            let r1 = (-s + disc) / (2.0 * k2);
            let r2 = (-s - disc) / (2.0 * k2);
            r1.norm().min(r2.norm())
        };
        zmin.sqrt()
    }

    /// `1 + (k1 + k3) t + k2 t^2`, the leading coefficient of the ODE at `t = s^2`.
    pub fn denominator(&self, s2: f64) -> f64 {
        1.0 + (self.k1 + self.k3) * s2 + self.k2 * s2 * s2
    }
}

/// Parameters after `g_u`: `(k1 + u, k2 + (k1 + k3) u + u^2, k3 + u, eps)`.
pub fn transform_params_gu(p: PhiParams, u: f64) -> PhiParams {
    PhiParams {
        k1: p.k1 + u,
        k2: p.k2 + (p.k1 + p.k3) * u + u * u,
        k3: p.k3 + u,
        eps: p.eps,
    }
}

/// Parameters after `h_v`: `(v^2 k1, v^4 k2, v^2 k3, v eps)`.
pub fn transform_params_hv(p: PhiParams, v: f64) -> Result<PhiParams> {
    if v == 0.0 || !v.is_finite() {
        return Err(Error::InvalidParameter(format!("h_v needs a finite non-zero v, got {v}")));
    }
    let v2 = v * v;
    Ok(PhiParams {
        k1: v2 * p.k1,
        k2: v2 * v2 * p.k2,
        k3: v2 * p.k3,
        eps: v * p.eps,
    })
}

/// One of the two group invariants, with the special values encoded as tags.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Invariant {
    Zero,
    Finite(Complex64),
    Infinity,
    ImaginaryInfinity,
}

impl Invariant {
    /// Tag-first comparison; finite values compared to a relative tolerance.
    pub fn approx_eq(&self, other: &Invariant, tol: f64) -> bool {
        match (self, other) {
            (Invariant::Zero, Invariant::Zero)
            | (Invariant::Infinity, Invariant::Infinity)
            | (Invariant::ImaginaryInfinity, Invariant::ImaginaryInfinity) => true,
            (Invariant::Finite(a), Invariant::Finite(b)) => (a - b).norm() <= tol * (1.0 + a.norm().max(b.norm())),
            _ => false,
        }
    }
}

/// `(p, q) = (sqrt(Delta2) / Delta3, eps^4 / Delta2)` with the special cases
/// `p = 0` (Delta2 = 0), `p = inf` / `i inf` (Delta3 = 0, by the sign of
/// Delta2), `q = 0` (eps = 0) and `q = inf` (eps != 0, Delta2 = 0).
pub fn invariants_pq(p: PhiParams) -> (Invariant, Invariant) {
    let tol = p.zero_tolerance();
    let d2 = p.delta2();
    let d3 = p.delta3();
    let d2_zero = d2.abs() <= tol;
    let pinv = if d2_zero {
        Invariant::Zero
    } else if d3.abs() <= tol {
        if d2 > 0.0 {
            Invariant::Infinity
        } else {
            Invariant::ImaginaryInfinity
        }
    } else {
        Invariant::Finite(Complex64::new(d2, 0.0).sqrt() / d3)
    };
    let qinv = if p.eps == 0.0 {
        Invariant::Zero
    } else if d2_zero {
        Invariant::Infinity
    } else {
        Invariant::Finite(Complex64::new(p.eps.powi(4) / d2, 0.0))
    };
    (pinv, qinv)
}

/// Smallest positive root of `1 + a t + c t^2` (strict positivity boundary).
fn first_positive_root(a: f64, c: f64) -> Option<f64> {
    if c == 0.0 {
        return if a < 0.0 { Some(-1.0 / a) } else { None };
    }
    let disc = a * a - 4.0 * c;
    if disc < 0.0 {
        return None;
    }
    let q = -0.5 * (a + a.signum() * disc.sqrt());
    let q = if q == 0.0 { -0.5 * disc.sqrt() } else { q };
    let mut roots = Vec::with_capacity(2);
    if q != 0.0 {
        roots.push(q / c);
        roots.push(1.0 / q);
    }
    roots.into_iter().filter(|t| *t > 0.0).reduce(f64::min)
}

pub fn regularity_radius(p: &PhiParams, b_max: f64) -> f64 {
    let mut t_max = b_max * b_max;
    if let Some(t) = first_positive_root(p.k1, 0.0) {
        t_max = t_max.min(t);
    }
    if let Some(t) = first_positive_root(p.k1 + p.k3, p.k2) {
        t_max = t_max.min(t);
    }
    t_max.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deltas_for_square_metric() {
        let p = PhiParams::new(2.0, 0.0, -3.0, 2.0);
        assert_eq!(p.delta1(), 1.0);
        assert_eq!(p.delta2(), -24.0);
        assert_eq!(p.delta3(), 5.0);
        assert_eq!(p.delta1() - p.delta2(), p.delta3().powi(2));
        assert!(!p.is_randers());
        assert!(PhiParams::new(0.0, 0.0, 4.0, 1.0).is_randers());
    }

    #[test]
    fn gu_and_hv_examples() {
        let p = PhiParams::new(2.0, 0.0, -3.0, 2.0);
        assert_eq!(transform_params_gu(p, 1.0), PhiParams::new(3.0, 0.0, -2.0, 2.0));
        assert_eq!(transform_params_gu(p, 0.0), p);
        assert_eq!(transform_params_hv(p, 2.0).unwrap(), PhiParams::new(8.0, 0.0, -12.0, 4.0));
        assert_eq!(transform_params_hv(p, 1.0).unwrap(), p);
        assert!(transform_params_hv(p, 0.0).is_err());
    }

    #[test]
    fn square_metric_invariants() {
        let (p, q) = invariants_pq(PhiParams::new(2.0, 0.0, -3.0, 2.0));
        assert!(p.approx_eq(&Invariant::Finite(Complex64::new(0.0, 24f64.sqrt() / 5.0)), 1e-15));
        assert!(q.approx_eq(&Invariant::Finite(Complex64::new(-2.0 / 3.0, 0.0)), 1e-15));
    }

    #[test]
    fn invariant_special_cases() {
        let (_, q) = invariants_pq(PhiParams::new(2.0, 0.0, -3.0, 0.0));
        assert_eq!(q, Invariant::Zero);
        // Riemannian and Randers
        assert_eq!(invariants_pq(PhiParams::new(0.0, 0.0, 0.0, 0.0)), (Invariant::Zero, Invariant::Zero));
        assert_eq!(invariants_pq(PhiParams::new(0.0, 0.0, 0.0, 1.0)), (Invariant::Zero, Invariant::Infinity));
        // Delta3 = 0
        assert_eq!(invariants_pq(PhiParams::new(1.0, 0.0, 1.0, 0.0)).0, Invariant::Infinity);
        assert_eq!(invariants_pq(PhiParams::new(1.0, 2.0, 1.0, 0.0)).0, Invariant::ImaginaryInfinity);
        assert!(!Invariant::Zero.approx_eq(&Invariant::Infinity, 1.0));
    }

    #[test]
    fn regularity_radius_examples() {
        assert_eq!(regularity_radius(&PhiParams::new(2.0, 0.0, -3.0, 0.0), 5.0), 1.0);
        assert_eq!(regularity_radius(&PhiParams::new(2.0, 0.0, -3.0, 0.0), 0.5), 0.5);
        assert_eq!(regularity_radius(&PhiParams::new(0.0, 0.0, 0.0, 0.0), 3.0), 3.0);
        assert_eq!(regularity_radius(&PhiParams::new(1.0, 1.0, 0.0, 0.0), 3.0), 3.0);
        // 1 - 4 s^2 > 0  ->  1/2
        assert!((regularity_radius(&PhiParams::new(-4.0, 0.0, 0.0, 0.0), 3.0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn series_radius_examples() {
        assert_eq!(PhiParams::new(2.0, 0.0, -3.0, 0.0).series_radius(), 1.0);
        assert_eq!(PhiParams::new(2.0, 0.0, -2.0, 0.0).series_radius(), f64::INFINITY);
        assert!((PhiParams::new(0.0, 1.0, 0.4, 0.0).series_radius() - 1.0).abs() < 1e-12);
    }
}

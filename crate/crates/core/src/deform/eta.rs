//! The scaling function `eta(t) = exp(-int_0^t (k3 + k2 u) / (2 {1 + (k1 + k3) u + k2 u^2}) du)`
//! in closed form (five cases) and by quadrature.

use serde::{Deserialize, Serialize};

use super::quadrature::adaptive_simpson;
use crate::diffkit::Jet;
use crate::error::{domain, Result};

/// Which closed form applies to `(k1, k2, k3)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EtaCase {
    /// `k2 = 0`, `k1 + k3 = 0`
    Exponential,
    /// `k2 = 0`, `k1 + k3 != 0`
    Power,
    /// `k2 != 0`, `Delta1 > 0`
    Ratio,
    /// `k2 != 0`, `Delta1 = 0`
    Double,
    /// `k2 != 0`, `Delta1 < 0`
    Arctan,
}

fn tolerance(k1: f64, k2: f64, k3: f64) -> f64 {
    1e-12 * (1.0 + k1 * k1 + k3 * k3 + k2.abs())
}

pub fn eta_case(k1: f64, k2: f64, k3: f64) -> EtaCase {
    let tol = tolerance(k1, k2, k3);
    let s = k1 + k3;
    if k2.abs() <= tol {
        if s.abs() <= tol {
            EtaCase::Exponential
        } else {
            EtaCase::Power
        }
    } else {
        let d1 = s * s - 4.0 * k2;
        if d1.abs() <= tol {
            EtaCase::Double
        } else if d1 > 0.0 {
            EtaCase::Ratio
        } else {
            EtaCase::Arctan
        }
    }
}

/// `eta` on a jet argument.
///
/// In the `Delta1 > 0` case the radical covers `Delta1` alone:
/// the first factor is `(sqrt(Delta1) + k1 + k3) / (sqrt(Delta1) - k1 - k3)`.
/// This is the grouping for which `eta'/eta` equals the integrand.
pub fn eta_jet(k1: f64, k2: f64, k3: f64, t: &Jet) -> Result<Jet> {
    let s = k1 + k3;
    let den = &(&(&t.square() * k2) + &(t * s)) + 1.0;
    if !(den.value() > 0.0) {
        return Err(domain(format!(
            "1 + (k1 + k3) t + k2 t^2 = {} is not positive at t = {}",
            den.value(),
            t.value()
        )));
    }
    Ok(match eta_case(k1, k2, k3) {
        EtaCase::Exponential => (t * (-k3 / 2.0)).exp(),
        EtaCase::Power => (&(t * s) + 1.0).powf(-k3 / (2.0 * s))?,
        EtaCase::Ratio => {
            let r = (s * s - 4.0 * k2).sqrt();
            let lin = &(t * (2.0 * k2)) + s;
            let ratio = &(r - &lin) / &(r + &lin) * ((r + s) / (r - s));
            &ratio.powf((k1 - k3) / (4.0 * r))? / &den.powf(0.25)?
        }
        EtaCase::Double => {
            let w = &(t * s) + 2.0;
            let expo = &(&w.recip() - 0.5) * ((k3 - k1) / s);
            &expo.exp() * &w.sqrt()?.recip() * std::f64::consts::SQRT_2
        }
        EtaCase::Arctan => {
            let r = (4.0 * k2 - s * s).sqrt();
            let arg = (&(&(t * (2.0 * k2)) + s) / r).atan();
            let expo = &(arg - (s / r).atan()) * ((k1 - k3) / (2.0 * r));
            &expo.exp() / &den.powf(0.25)?
        }
    })
}

/// `eta(bbar2)` by the closed forms.
pub fn eta(k1: f64, k2: f64, k3: f64, bbar2: f64) -> Result<f64> {
    Ok(eta_jet(k1, k2, k3, &Jet::constant(bbar2))?.value())
}

/// `eta(t)` by adaptive Simpson on the exponent (absolute tolerance 1e-12).
pub fn eta_quadrature(k1: f64, k2: f64, k3: f64, t: f64) -> Result<f64> {
    let s = k1 + k3;
    let den = |u: f64| 1.0 + s * u + k2 * u * u;
    // den is quadratic, so its minimum on [0, t] is at an end or the vertex
    let mut lo = den(0.0).min(den(t));
    if k2 != 0.0 {
        let v = -s / (2.0 * k2);
        if v > 0.0 && v < t {
            lo = lo.min(den(v));
        }
    }
    if !(lo > 0.0) {
        return Err(domain(format!("1 + (k1 + k3) u + k2 u^2 vanishes on [0, {t}]")));
    }
    let integral = adaptive_simpson(|u| (k3 + k2 * u) / (2.0 * den(u)), 0.0, t, 1e-12);
    Ok((-integral).exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn case_dispatch() {
        assert_eq!(eta_case(1.0, 0.0, -1.0), EtaCase::Exponential);
        assert_eq!(eta_case(2.0, 0.0, -3.0), EtaCase::Power);
        assert_eq!(eta_case(2.0, 1.0, 1.0), EtaCase::Ratio);
        assert_eq!(eta_case(1.0, 1.0, 1.0), EtaCase::Double);
        assert_eq!(eta_case(0.0, 1.0, 0.5), EtaCase::Arctan);
    }

    #[test]
    fn exponential_case() {
        let t = 0.37;
        assert!((eta(1.0, 0.0, -1.0, t).unwrap() - (t / 2.0).exp()).abs() < 1e-15);
    }

    #[test]
    fn square_metric_exponent() {
        let t: f64 = 0.3;
        assert!((eta(2.0, 0.0, -3.0, t).unwrap() - (1.0 - t).powf(-1.5)).abs() < 1e-14);
    }

    #[test]
    fn normalized_at_zero() {
        for (k1, k2, k3) in [(1.0, 0.0, -1.0), (2.0, 0.0, -3.0), (2.0, 1.0, 1.0), (1.0, 1.0, 1.0), (0.0, 1.0, 0.5)] {
            assert!((eta(k1, k2, k3, 0.0).unwrap() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn closed_forms_match_quadrature() {
        for (k1, k2, k3) in [(0.7, 0.0, -0.7), (2.0, 0.0, -3.0), (2.0, 1.0, 1.0), (-3.0, 2.0, 0.5), (1.0, 1.0, 1.0), (0.0, 1.0, 0.5)] {
            for t in [0.1, 0.25, 0.5] {
                let a = eta(k1, k2, k3, t).unwrap();
                let b = eta_quadrature(k1, k2, k3, t).unwrap();
                assert!(((a - b) / b).abs() < 1e-10, "({k1},{k2},{k3}) t={t}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn derivative_relation() {
        // d/dt ln eta = -(k3 + k2 t) / (2 den)
        let (k1, k2, k3, t) = (-3.0, 2.0, 0.5, 0.2);
        let j = eta_jet(k1, k2, k3, &Jet::variable(t, 0)).unwrap();
        let want = -(k3 + k2 * t) / (2.0 * (1.0 + (k1 + k3) * t + k2 * t * t));
        assert!((j.coeff(1) / j.value() - want).abs() < 1e-13);
    }

    #[test]
    fn out_of_range() {
        assert!(eta(2.0, 0.0, -3.0, 1.0).is_err());
        assert!(eta_quadrature(2.0, 0.0, -3.0, 1.5).is_err());
    }
}

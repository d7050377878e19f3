//! Truncated multivariate Taylor arithmetic over nilpotent tags.
//!
//! A [`Jet`] with `k` tags is a polynomial in the infinitesimals
//! `e_0, ..., e_{k-1}` with `e_t * e_t = 0`. Every monomial is a product of
//! distinct tags, so it is identified by a bitmask and the jet stores one
//! coefficient per subset: `coeffs[mask]`. The coefficient of the monomial
//! `e_a e_b e_c` is the mixed partial along the directions seeded on those
//! tags. Because a monomial is a set, permuting tags cannot produce a second
//! copy of the same partial.
//!
//! Jets with different tag counts combine freely: a jet with `k` tags is the
//! same as a jet with `k' > k` tags whose extra coefficients are zero. Code
//! that needs fresh tags for an inner differentiation takes the tags above
//! the highest one already present in its inputs (see [`base_tags`]).

use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use crate::error::{domain, Result};

/// Upper bound on the number of live tags in one jet (2^12 coefficients).
pub const MAX_TAGS: usize = 12;

#[derive(Clone, PartialEq)]
pub struct Jet {
    coeffs: Vec<f64>,
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.len() == 1 {
            write!(f, "Jet({})", self.coeffs[0])
        } else {
            f.debug_struct("Jet")
                .field("tags", &self.tags())
                .field("coeffs", &self.coeffs)
                .finish()
        }
    }
}

impl Default for Jet {
    fn default() -> Self {
        Jet::constant(0.0)
    }
}

impl From<f64> for Jet {
    fn from(v: f64) -> Self {
        Jet::constant(v)
    }
}

impl Jet {
    pub fn constant(v: f64) -> Self {
        Jet { coeffs: vec![v] }
    }

    pub fn zero() -> Self {
        Jet::constant(0.0)
    }

    pub fn one() -> Self {
        Jet::constant(1.0)
    }

    /// The bare infinitesimal `e_tag`.
    pub fn tag(tag: usize) -> Self {
        assert!(tag < MAX_TAGS, "tag {tag} exceeds MAX_TAGS");
        let mut coeffs = vec![0.0; 1 << (tag + 1)];
        coeffs[1 << tag] = 1.0;
        Jet { coeffs }
    }

    /// `value + e_tag`: a variable seeded for differentiation on `tag`.
    pub fn variable(value: f64, tag: usize) -> Self {
        let mut j = Jet::tag(tag);
        j.coeffs[0] = value;
        j
    }

    /// Builds a jet from raw coefficients; the length must be a power of two.
    pub fn from_coeffs(coeffs: Vec<f64>) -> Self {
        assert!(
            !coeffs.is_empty() && coeffs.len().is_power_of_two(),
            "jet coefficient count must be a power of two"
        );
        assert!(coeffs.len() <= 1 << MAX_TAGS);
        Jet { coeffs }
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    /// Number of tag slots carried (highest tag + 1).
    #[inline]
    pub fn tags(&self) -> usize {
        self.coeffs.len().trailing_zeros() as usize
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Coefficient of the monomial identified by `mask`.
    #[inline]
    pub fn coeff(&self, mask: usize) -> f64 {
        self.coeffs.get(mask).copied().unwrap_or(0.0)
    }

    /// Mixed partial along the given distinct tags.
    pub fn partial(&self, tags: &[usize]) -> f64 {
        let mut mask = 0usize;
        for &t in tags {
            assert!(mask & (1 << t) == 0, "repeated tag {t} in partial()");
            mask |= 1 << t;
        }
        self.coeff(mask)
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_finite())
    }

    /// Drops every tag `>= tags` (sets those infinitesimals to zero).
    pub fn truncate(&self, tags: usize) -> Jet {
        let len = (1usize << tags).min(self.coeffs.len());
        Jet {
            coeffs: self.coeffs[..len].to_vec(),
        }
    }

    /// The coefficient of the high monomial `high_mask` viewed as a jet over
    /// the `low` lowest tags. `high_mask` must not use any of the low tags.
    pub fn component(&self, low: usize, high_mask: usize) -> Jet {
        debug_assert_eq!(high_mask & ((1 << low) - 1), 0);
        let width = 1usize << low;
        if high_mask >= self.coeffs.len() {
            return Jet::zero();
        }
        let end = (high_mask + width).min(self.coeffs.len());
        let mut coeffs = self.coeffs[high_mask..end].to_vec();
        coeffs.resize(width.max(1), 0.0);
        Jet { coeffs }
    }

    /// Evaluates `sum_k taylor[k] * d^k` where `d = self - value`. `taylor[k]`
    /// must be `f^(k)(value) / k!`; at least `tags + 1` entries are used.
    pub fn compose(&self, taylor: &[f64]) -> Jet {
        let order = self.tags();
        assert!(!taylor.is_empty());
        if order == 0 || taylor.len() == 1 {
            return Jet::constant(taylor[0]);
        }
        let mut delta = self.clone();
        delta.coeffs[0] = 0.0;
        let top = order.min(taylor.len() - 1);
        let mut acc = Jet::constant(taylor[top]);
        for k in (0..top).rev() {
            acc = &acc * &delta;
            acc.coeffs[0] += taylor[k];
        }
        acc
    }

    pub fn scale(&self, s: f64) -> Jet {
        Jet {
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    pub fn square(&self) -> Jet {
        self * self
    }

    pub fn recip(&self) -> Jet {
        let x0 = self.value();
        let n = self.tags();
        let mut t = Vec::with_capacity(n + 1);
        let inv = 1.0 / x0;
        let mut term = inv;
        for _ in 0..=n {
            t.push(term);
            term *= -inv;
        }
        self.compose(&t)
    }

    pub fn exp(&self) -> Jet {
        let e = self.value().exp();
        let n = self.tags();
        let mut t = Vec::with_capacity(n + 1);
        let mut fact = 1.0;
        for k in 0..=n {
            if k > 0 {
                fact *= k as f64;
            }
            t.push(e / fact);
        }
        self.compose(&t)
    }

    pub fn ln(&self) -> Result<Jet> {
        let x0 = self.value();
        if !(x0 > 0.0) {
            return Err(domain(format!("logarithm of non-positive value {x0}")));
        }
        let n = self.tags();
        let mut t = vec![x0.ln()];
        let inv = 1.0 / x0;
        let mut p = 1.0;
        for k in 1..=n {
            p *= inv;
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            t.push(sign * p / k as f64);
        }
        Ok(self.compose(&t))
    }

    /// Real power of a strictly positive jet.
    pub fn powf(&self, p: f64) -> Result<Jet> {
        let x0 = self.value();
        if !(x0 > 0.0) {
            return Err(domain(format!("real power {p} of non-positive value {x0}")));
        }
        Ok(self.compose(&binomial_taylor(x0, x0.powf(p), p, self.tags())))
    }

    /// Square root; the value must be strictly positive.
    pub fn sqrt(&self) -> Result<Jet> {
        let x0 = self.value();
        if !(x0 > 0.0) {
            return Err(domain(format!("square root of non-positive value {x0}")));
        }
        Ok(self.compose(&binomial_taylor(x0, x0.sqrt(), 0.5, self.tags())))
    }

    pub fn powi(&self, n: i32) -> Jet {
        if n < 0 {
            return self.powi(-n).recip();
        }
        let mut base = self.clone();
        let mut acc = Jet::one();
        let mut e = n as u32;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    pub fn atan(&self) -> Jet {
        let x0 = self.value();
        let n = self.tags();
        // 1/(1 + (x0 + h)^2) as a series in h, then integrate termwise.
        let q = [1.0 + x0 * x0, 2.0 * x0, 1.0];
        let mut r = vec![0.0; n.max(1)];
        r[0] = 1.0 / q[0];
        for k in 1..r.len() {
            let mut s = q[1] * r[k - 1];
            if k >= 2 {
                s += q[2] * r[k - 2];
            }
            r[k] = -s / q[0];
        }
        let mut t = vec![x0.atan()];
        for k in 1..=n {
            t.push(r[k - 1] / k as f64);
        }
        self.compose(&t)
    }
}

/// Taylor coefficients of `x^p` at `x0`, given `x0^p` precomputed.
fn binomial_taylor(x0: f64, head: f64, p: f64, order: usize) -> Vec<f64> {
    let mut t = Vec::with_capacity(order + 1);
    t.push(head);
    let inv = 1.0 / x0;
    let mut c = head;
    for k in 1..=order {
        c *= (p - (k as f64 - 1.0)) / k as f64 * inv;
        t.push(c);
    }
    t
}

/// Highest tag count among the given jets; fresh tags start here.
pub fn base_tags<'a>(jets: impl IntoIterator<Item = &'a Jet>) -> usize {
    jets.into_iter().map(Jet::tags).max().unwrap_or(0)
}

fn mul_coeffs(a: &[f64], b: &[f64]) -> Vec<f64> {
    if a.len() == 1 {
        let s = a[0];
        return b.iter().map(|v| v * s).collect();
    }
    if b.len() == 1 {
        let s = b[0];
        return a.iter().map(|v| v * s).collect();
    }
    let n = a.len().max(b.len());
    let amask = a.len() - 1;
    let bmask = b.len() - 1;
    let mut out = vec![0.0; n];
    for (c, slot) in out.iter_mut().enumerate() {
        // Subset convolution: sum over sub ⊆ c of a[sub] * b[c \ sub].
        let avail = c & amask;
        let mut sub = avail;
        let mut s = 0.0;
        loop {
            let rest = c ^ sub;
            if rest & !bmask == 0 {
                s += a[sub] * b[rest];
            }
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & avail;
        }
        *slot = s;
    }
    out
}

fn add_coeffs(a: &[f64], b: &[f64], sign: f64) -> Vec<f64> {
    let n = a.len().max(b.len());
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let x = a.get(i).copied().unwrap_or(0.0);
        let y = b.get(i).copied().unwrap_or(0.0);
        out.push(x + sign * y);
    }
    out
}

impl<'a> Add<&'a Jet> for &'a Jet {
    type Output = Jet;
    fn add(self, rhs: &'a Jet) -> Jet {
        Jet {
            coeffs: add_coeffs(&self.coeffs, &rhs.coeffs, 1.0),
        }
    }
}

impl<'a> Sub<&'a Jet> for &'a Jet {
    type Output = Jet;
    fn sub(self, rhs: &'a Jet) -> Jet {
        Jet {
            coeffs: add_coeffs(&self.coeffs, &rhs.coeffs, -1.0),
        }
    }
}

impl<'a> Mul<&'a Jet> for &'a Jet {
    type Output = Jet;
    fn mul(self, rhs: &'a Jet) -> Jet {
        Jet {
            coeffs: mul_coeffs(&self.coeffs, &rhs.coeffs),
        }
    }
}

impl<'a> Div<&'a Jet> for &'a Jet {
    type Output = Jet;
    fn div(self, rhs: &'a Jet) -> Jet {
        if rhs.coeffs.len() == 1 {
            return self.scale(1.0 / rhs.coeffs[0]);
        }
        self * &rhs.recip()
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(mut self) -> Jet {
        for c in &mut self.coeffs {
            *c = -*c;
        }
        self
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr<Jet> for Jet {
            type Output = Jet;
            fn $m(self, rhs: Jet) -> Jet {
                (&self).$m(&rhs)
            }
        }
        impl<'a> $tr<&'a Jet> for Jet {
            type Output = Jet;
            fn $m(self, rhs: &'a Jet) -> Jet {
                (&self).$m(rhs)
            }
        }
        impl<'a> $tr<Jet> for &'a Jet {
            type Output = Jet;
            fn $m(self, rhs: Jet) -> Jet {
                self.$m(&rhs)
            }
        }
        impl $tr<f64> for Jet {
            type Output = Jet;
            fn $m(self, rhs: f64) -> Jet {
                (&self).$m(&Jet::constant(rhs))
            }
        }
        impl<'a> $tr<f64> for &'a Jet {
            type Output = Jet;
            fn $m(self, rhs: f64) -> Jet {
                self.$m(&Jet::constant(rhs))
            }
        }
        impl $tr<Jet> for f64 {
            type Output = Jet;
            fn $m(self, rhs: Jet) -> Jet {
                (&Jet::constant(self)).$m(&rhs)
            }
        }
        impl<'a> $tr<&'a Jet> for f64 {
            type Output = Jet;
            fn $m(self, rhs: &'a Jet) -> Jet {
                (&Jet::constant(self)).$m(rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
forward_owned!(Div, div);

impl AddAssign<&Jet> for Jet {
    fn add_assign(&mut self, rhs: &Jet) {
        if rhs.coeffs.len() > self.coeffs.len() {
            self.coeffs.resize(rhs.coeffs.len(), 0.0);
        }
        for (a, b) in self.coeffs.iter_mut().zip(&rhs.coeffs) {
            *a += b;
        }
    }
}

impl AddAssign<Jet> for Jet {
    fn add_assign(&mut self, rhs: Jet) {
        *self += &rhs;
    }
}

impl SubAssign<&Jet> for Jet {
    fn sub_assign(&mut self, rhs: &Jet) {
        if rhs.coeffs.len() > self.coeffs.len() {
            self.coeffs.resize(rhs.coeffs.len(), 0.0);
        }
        for (a, b) in self.coeffs.iter_mut().zip(&rhs.coeffs) {
            *a -= b;
        }
    }
}

impl MulAssign<f64> for Jet {
    fn mul_assign(&mut self, rhs: f64) {
        for c in &mut self.coeffs {
            *c *= rhs;
        }
    }
}

/// `sum_i a[i] * b[i]` over jets.
pub fn dot(a: &[Jet], b: &[Jet]) -> Jet {
    let mut acc = Jet::zero();
    for (x, y) in a.iter().zip(b) {
        acc += x * y;
    }
    acc
}

/// Lifts a real vector to constant jets.
pub fn constants(v: &[f64]) -> Vec<Jet> {
    v.iter().copied().map(Jet::constant).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_arithmetic_matches_reals() {
        let a = Jet::constant(1.5);
        let b = Jet::constant(-0.25);
        assert_eq!((&a * &b).value(), 1.5 * -0.25);
        assert_eq!((&a / &b).value(), 1.5 / -0.25);
        assert_eq!((&a + &b).value(), 1.5 + -0.25);
        assert_eq!(a.sqrt().unwrap().value(), 1.5f64.sqrt());
        assert_eq!(a.exp().value(), 1.5f64.exp());
        assert_eq!(b.atan().value(), (-0.25f64).atan());
    }

    #[test]
    fn third_derivative_of_cube() {
        let x = &(&Jet::variable(0.7, 0) + &Jet::tag(1)) + &Jet::tag(2);
        let c = x.powi(3);
        assert!((c.coeff(0b111) - 6.0).abs() < 1e-14);
        assert!((c.coeff(0b011) - 6.0 * 0.7).abs() < 1e-14);
        assert!((c.coeff(0b001) - 3.0 * 0.49).abs() < 1e-14);
    }

    #[test]
    fn elementary_functions_match_closed_form_derivatives() {
        let x0: f64 = 0.6;
        let x = &(&Jet::variable(x0, 0) + &Jet::tag(1)) + &Jet::tag(2);
        let s = x.sqrt().unwrap();
        // d^3/dx^3 sqrt(x) = 3/8 x^{-5/2}
        assert!((s.coeff(7) - 0.375 * x0.powf(-2.5)).abs() < 1e-12);
        let l = x.ln().unwrap();
        assert!((l.coeff(7) - 2.0 / x0.powi(3)).abs() < 1e-12);
        let a = x.atan();
        // atan''' = (6x^2 - 2)/(1+x^2)^3
        let expect = (6.0 * x0 * x0 - 2.0) / (1.0 + x0 * x0).powi(3);
        assert!((a.coeff(7) - expect).abs() < 1e-12);
        let r = x.recip();
        assert!((r.coeff(7) + 6.0 / x0.powi(4)).abs() < 1e-10);
        let p = x.powf(-1.5).unwrap();
        let expect = -1.5 * -2.5 * -3.5 * x0.powf(-4.5);
        assert!((p.coeff(7) - expect).abs() < 1e-10);
    }

    #[test]
    fn sqrt_rejects_nonpositive() {
        assert!(Jet::constant(0.0).sqrt().is_err());
        assert!(Jet::constant(-1.0).ln().is_err());
    }

    #[test]
    fn component_extracts_inner_coefficient() {
        // f = (x + e0)(y + e1 + e2)   ->   coefficient of e1 e2 is 0; of e0 e1 is 1
        let f = &Jet::variable(2.0, 0) * &(&Jet::variable(3.0, 1) + &Jet::tag(2));
        let c = f.component(1, 0b010);
        assert_eq!(c.coeffs(), &[2.0, 1.0]);
        assert_eq!(f.component(1, 0b110).coeffs(), &[0.0, 0.0]);
    }
}

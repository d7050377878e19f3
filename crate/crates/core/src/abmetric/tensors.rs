use ndarray::Array4;

use super::{check_point, spray_jet, FinslerFunction};
use crate::diffkit::{constants, Jet};
use crate::error::{Error, Result};

/// Central-difference step for the finite-difference Douglas tensor.
pub const DEFAULT_DOUGLAS_FD_STEP: f64 = 1e-3;

/// `D_j^i_kl` at one point, stored as `[j][i][k][l]`, with the spray
/// values used for normalization.
#[derive(Debug, Clone, PartialEq)]
pub struct DouglasTensor {
    pub d: Array4<f64>,
    pub spray: Vec<f64>,
}

impl DouglasTensor {
    pub fn dim(&self) -> usize {
        self.spray.len()
    }

    pub fn max_abs(&self) -> f64 {
        self.d.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max_abs_spray(&self) -> f64 {
        self.spray.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `max |D| / (1 + max |G|)`.
    pub fn normalized(&self) -> f64 {
        self.max_abs() / (1.0 + self.max_abs_spray())
    }

    /// Largest deviation from symmetry in `(j, k, l)`.
    pub fn symmetry_residual(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0_f64;
        for j in 0..n {
            for i in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let v = self.d[[j, i, k, l]];
                        for w in [self.d[[k, i, j, l]], self.d[[l, i, k, j]], self.d[[j, i, l, k]]] {
                            worst = worst.max((v - w).abs());
                        }
                    }
                }
            }
        }
        worst
    }

    /// `max |D_j^i_il|` (upper index contracted with a lower one).
    pub fn trace_residual(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0_f64;
        for j in 0..n {
            for l in 0..n {
                let t: f64 = (0..n).map(|i| self.d[[j, i, i, l]]).sum();
                worst = worst.max(t.abs());
            }
        }
        worst
    }

    /// `max |D_j^i_kl y^l|`.
    pub fn contraction_residual(&self, y: &[f64]) -> f64 {
        let n = self.dim();
        let mut worst = 0.0_f64;
        for j in 0..n {
            for i in 0..n {
                for k in 0..n {
                    let t: f64 = (0..n).map(|l| self.d[[j, i, k, l]] * y[l]).sum();
                    worst = worst.max(t.abs());
                }
            }
        }
        worst
    }
}

fn sorted_triples(n: usize) -> impl Iterator<Item = [usize; 3]> {
    (0..n).flat_map(move |j| (j..n).flat_map(move |k| (k..n).map(move |l| [j, k, l])))
}

fn permutations([a, b, c]: [usize; 3]) -> [[usize; 3]; 6] {
    [[a, b, c], [a, c, b], [b, a, c], [b, c, a], [c, a, b], [c, b, a]]
}

fn seeded(y: &[f64], idx: [usize; 3]) -> Vec<Jet> {
    let mut yj = constants(y);
    for (tag, &i) in idx.iter().enumerate() {
        yj[i] = &yj[i] + &Jet::tag(tag);
    }
    yj
}

/// Third `y`-derivatives of the trace-corrected spray
/// `G^i - (d G^m / d y^m) y^i / (n + 1)`, exact through jets.
///
/// Each sorted index triple is evaluated once and copied to its
/// permutations, so the result is symmetric bit for bit.
pub fn douglas_tensor(f: &dyn FinslerFunction, x: &[f64], y: &[f64]) -> Result<DouglasTensor> {
    check_point(f, x, y.len())?;
    let n = f.dim();
    let mut d = Array4::zeros((n, n, n, n));
    let mut spray = Vec::new();
    for idx in sorted_triples(n) {
        let yj = seeded(y, idx);
        let mut trace = Jet::zero();
        let mut g = Vec::new();
        for m in 0..n {
            let mut ym = yj.clone();
            ym[m] = &ym[m] + &Jet::tag(3);
            let gm = spray_jet(f, x, &ym)?;
            trace += &gm[m].component(3, 0b1000);
            if m == 0 {
                g = gm.iter().map(|v| v.truncate(3)).collect();
            }
        }
        if spray.is_empty() {
            spray = g.iter().map(Jet::value).collect();
        }
        let scale = 1.0 / (n + 1) as f64;
        for i in 0..n {
            let h = &g[i] - &(&trace * &yj[i]).scale(scale);
            let v = h.coeff(0b111);
            for [a, b, c] in permutations(idx) {
                d[[a, i, b, c]] = v;
            }
        }
    }
    Ok(DouglasTensor { d, spray })
}

/// `G^i - (d G^m / d y^m) y^i / (n + 1)` at a plain point, with `G` and
/// its trace from jets.
pub fn projective_spray(f: &dyn FinslerFunction, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
    let n = f.dim();
    let mut trace = 0.0;
    let mut g = Vec::new();
    for m in 0..n {
        let mut ym = constants(y);
        ym[m] = Jet::variable(y[m], 0);
        let gm = spray_jet(f, x, &ym)?;
        trace += gm[m].coeff(1);
        if m == 0 {
            g = gm.iter().map(Jet::value).collect();
        }
    }
    let scale = trace / (n + 1) as f64;
    Ok(g.iter().zip(y).map(|(gi, yi)| gi - scale * yi).collect())
}

/// The Douglas tensor by nested central differences of
/// [`projective_spray`]. Used only as an independent cross-check.
pub fn douglas_tensor_fd(f: &dyn FinslerFunction, x: &[f64], y: &[f64], step: f64) -> Result<DouglasTensor> {
    check_point(f, x, y.len())?;
    if !(step > 0.0) {
        return Err(Error::InvalidParameter(format!("step must be positive, got {step}")));
    }
    let n = f.dim();
    let mut d = Array4::zeros((n, n, n, n));
    let eval = |yy: &[f64]| {
        projective_spray(f, x, yy).map_err(|e| match e {
            Error::Domain(m) => Error::Domain(format!("finite-difference stencil left the domain: {m}")),
            other => other,
        })
    };
    for idx in sorted_triples(n) {
        let mut acc = vec![0.0; n];
        for signs in 0..8u32 {
            let mut yy = y.to_vec();
            let mut sign = 1.0;
            for (t, &i) in idx.iter().enumerate() {
                let s = if signs >> t & 1 == 1 { -1.0 } else { 1.0 };
                yy[i] += s * step;
                sign *= s;
            }
            for (a, v) in acc.iter_mut().zip(eval(&yy)?) {
                *a += sign * v;
            }
        }
        let denom = 8.0 * step * step * step;
        for i in 0..n {
            for [a, b, c] in permutations(idx) {
                d[[a, i, b, c]] = acc[i] / denom;
            }
        }
    }
    let spray = projective_spray(f, x, y)?;
    Ok(DouglasTensor { d, spray })
}

/// `B^i_jkl = d^3 G^i / dy^j dy^k dy^l`, stored as `[i][j][k][l]`.
pub fn berwald_tensor(f: &dyn FinslerFunction, x: &[f64], y: &[f64]) -> Result<(Array4<f64>, Vec<f64>)> {
    check_point(f, x, y.len())?;
    let n = f.dim();
    let mut out = Array4::zeros((n, n, n, n));
    let mut spray = Vec::new();
    for idx in sorted_triples(n) {
        let g = spray_jet(f, x, &seeded(y, idx))?;
        if spray.is_empty() {
            spray = g.iter().map(Jet::value).collect();
        }
        for i in 0..n {
            let v = g[i].coeff(0b111);
            for [a, b, c] in permutations(idx) {
                out[[i, a, b, c]] = v;
            }
        }
    }
    Ok((out, spray))
}

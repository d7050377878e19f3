//! Small dense linear algebra over jets (row-major, n x n).

use ndarray::Array2;

use super::jet::Jet;
use crate::error::{Error, Result};

/// Solves `a * x = b` by Gaussian elimination with partial pivoting on the
/// real parts. `a` is row-major `n x n`.
pub fn solve(a: &[Jet], n: usize, b: &[Jet]) -> Result<Vec<Jet>> {
    assert_eq!(a.len(), n * n);
    assert_eq!(b.len(), n);
    let mut m: Vec<Jet> = a.to_vec();
    let mut rhs: Vec<Jet> = b.to_vec();
    let scale = a.iter().map(|v| v.value().abs()).fold(0.0, f64::max);
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| {
                m[i * n + col]
                    .value()
                    .abs()
                    .total_cmp(&m[j * n + col].value().abs())
            })
            .unwrap();
        if !(m[pivot * n + col].value().abs() > 1e-14 * scale.max(f64::MIN_POSITIVE)) {
            return Err(Error::Degenerate(format!(
                "singular {n}x{n} system at column {col}"
            )));
        }
        if pivot != col {
            for k in 0..n {
                m.swap(col * n + k, pivot * n + k);
            }
            rhs.swap(col, pivot);
        }
        let inv = m[col * n + col].recip();
        for row in col + 1..n {
            let f = &m[row * n + col] * &inv;
            if f.coeffs().iter().all(|c| *c == 0.0) {
                continue;
            }
            for k in col..n {
                let t = &f * &m[col * n + k];
                m[row * n + k] -= &t;
            }
            let t = &f * &rhs[col];
            rhs[row] -= &t;
        }
    }
    let mut x = vec![Jet::zero(); n];
    for row in (0..n).rev() {
        let mut s = rhs[row].clone();
        for k in row + 1..n {
            s -= &(&m[row * n + k] * &x[k]);
        }
        x[row] = &s / &m[row * n + row];
    }
    Ok(x)
}

/// Inverse of a row-major jet matrix.
pub fn inverse(a: &[Jet], n: usize) -> Result<Vec<Jet>> {
    let mut out = vec![Jet::zero(); n * n];
    for col in 0..n {
        let mut e = vec![Jet::zero(); n];
        e[col] = Jet::one();
        let x = solve(a, n, &e)?;
        for (row, v) in x.into_iter().enumerate() {
            out[row * n + col] = v;
        }
    }
    Ok(out)
}

/// Real parts of a row-major jet matrix.
pub fn values(a: &[Jet], n: usize) -> Array2<f64> {
    Array2::from_shape_fn((n, n), |(i, j)| a[i * n + j].value())
}

/// Cholesky factorization; returns the lower factor or `None` when the
/// matrix is not symmetric positive definite.
pub fn cholesky(a: &Array2<f64>) -> Option<Array2<f64>> {
    let n = a.nrows();
    let mut l = Array2::<f64>::zeros((n, n));
    for i in 0..n {
        for j in 0..=i {
            let mut s = a[[i, j]];
            for k in 0..j {
                s -= l[[i, k]] * l[[j, k]];
            }
            if i == j {
                if !(s > 0.0) {
                    return None;
                }
                l[[i, i]] = s.sqrt();
            } else {
                l[[i, j]] = s / l[[j, j]];
            }
        }
    }
    Some(l)
}

pub fn is_positive_definite(a: &Array2<f64>) -> bool {
    let sym = a
        .indexed_iter()
        .all(|((i, j), v)| (v - a[[j, i]]).abs() <= 1e-10 * (1.0 + v.abs()));
    sym && cholesky(a).is_some()
}

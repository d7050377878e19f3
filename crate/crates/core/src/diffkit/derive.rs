use super::jet::{constants, Jet};
use crate::error::{Error, Result};

/// Maximum number of fiber (y) indices accepted by [`derive_mixed`].
pub const MAX_FIBER_ORDER: usize = 3;

/// Default central-difference step for a derivative of the given total order.
pub fn default_fd_step(order: usize) -> f64 {
    if order >= 3 {
        1e-3
    } else {
        1e-4
    }
}

fn check_request(n: usize, x: &[f64], y: &[f64], y_indices: &[usize], x_index: Option<usize>) -> Result<()> {
    if y_indices.len() > MAX_FIBER_ORDER {
        return Err(Error::InvalidParameter(format!(
            "at most {MAX_FIBER_ORDER} fiber indices supported, got {}",
            y_indices.len()
        )));
    }
    if x.len() != n || y.len() != n {
        return Err(Error::InvalidParameter("point and direction dimensions differ".into()));
    }
    if y_indices.iter().chain(x_index.iter()).any(|&i| i >= n) {
        return Err(Error::InvalidParameter("derivative index out of range".into()));
    }
    Ok(())
}

/// Exact mixed partial `d^k/dy^{i1}..dy^{ik} (d/dx^{m}) f` at `(x, y)`.
///
/// Fiber indices are sorted before seeding so that every ordering of the
/// same multi-index performs the same arithmetic.
pub fn derive_mixed<F>(f: &F, x: &[f64], y: &[f64], y_indices: &[usize], x_index: Option<usize>) -> Result<f64>
where
    F: Fn(&[Jet], &[Jet]) -> Result<Jet> + ?Sized,
{
    let n = x.len();
    check_request(n, x, y, y_indices, x_index)?;
    let mut idx = y_indices.to_vec();
    idx.sort_unstable();
    let mut yj = constants(y);
    for (tag, &i) in idx.iter().enumerate() {
        yj[i] = &yj[i] + &Jet::tag(tag);
    }
    let mut xj = constants(x);
    let mut mask = (1usize << idx.len()) - 1;
    if let Some(m) = x_index {
        let tag = idx.len();
        xj[m] = &xj[m] + &Jet::tag(tag);
        mask |= 1 << tag;
    }
    let v = f(&xj, &yj)?;
    if !v.is_finite() {
        return Err(Error::Domain("non-finite derivative".into()));
    }
    Ok(v.coeff(mask))
}

/// Central finite-difference estimate of the same partial as
/// [`derive_mixed`]. Only used as an independent cross-check.
pub fn fd_derive<F>(
    f: &F,
    x: &[f64],
    y: &[f64],
    y_indices: &[usize],
    x_index: Option<usize>,
    step: f64,
) -> Result<f64>
where
    F: Fn(&[Jet], &[Jet]) -> Result<Jet> + ?Sized,
{
    let n = x.len();
    check_request(n, x, y, y_indices, x_index)?;
    if !(step > 0.0) {
        return Err(Error::InvalidParameter(format!("step must be positive, got {step}")));
    }
    let mut dirs: Vec<(bool, usize)> = y_indices.iter().map(|&i| (false, i)).collect();
    if let Some(m) = x_index {
        dirs.push((true, m));
    }
    let mut xs = x.to_vec();
    let mut ys = y.to_vec();
    fd_rec(f, &mut xs, &mut ys, &dirs, step)
}

fn fd_rec<F>(f: &F, x: &mut [f64], y: &mut [f64], dirs: &[(bool, usize)], h: f64) -> Result<f64>
where
    F: Fn(&[Jet], &[Jet]) -> Result<Jet> + ?Sized,
{
    let Some((&(on_x, i), rest)) = dirs.split_first() else {
        return f(&constants(x), &constants(y))
            .map(|v| v.value())
            .map_err(|e| match e {
                Error::Domain(m) => Error::Domain(format!("finite-difference stencil left the domain: {m}")),
                other => other,
            });
    };
    let slot = |x: &mut [f64], y: &mut [f64], d: f64| {
        if on_x {
            x[i] += d;
        } else {
            y[i] += d;
        }
    };
    slot(x, y, h);
    let plus = fd_rec(f, x, y, rest, h)?;
    slot(x, y, -2.0 * h);
    let minus = fd_rec(f, x, y, rest, h);
    slot(x, y, h);
    Ok((plus - minus?) / (2.0 * h))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffkit::jet::dot;

    fn norm_sq(_x: &[Jet], y: &[Jet]) -> Result<Jet> {
        Ok(dot(y, y))
    }

    fn trilinear(_x: &[Jet], y: &[Jet]) -> Result<Jet> {
        Ok(&(&y[0] * &y[1]) * &y[2])
    }

    fn cube(_x: &[Jet], y: &[Jet]) -> Result<Jet> {
        Ok(y[0].powi(3))
    }

    #[test]
    fn quadratic_form_hessian() {
        let v = derive_mixed(&norm_sq, &[0.3, 0.1, 0.0], &[1.0, 2.0, 3.0], &[0, 0], None).unwrap();
        assert_eq!(v, 2.0);
    }

    #[test]
    fn trilinear_monomial() {
        let v = derive_mixed(&trilinear, &[0.0; 3], &[0.4, -1.0, 2.0], &[0, 1, 2], None).unwrap();
        assert_eq!(v, 1.0);
    }

    #[test]
    fn fd_cubic_and_constant() {
        let v = fd_derive(&cube, &[0.0; 3], &[0.5, 0.0, 0.0], &[0, 0, 0], None, 1e-2).unwrap();
        assert!((v - 6.0).abs() < 1e-6);
        let c = |_x: &[Jet], _y: &[Jet]| -> Result<Jet> { Ok(Jet::constant(3.25)) };
        let v = fd_derive(&c, &[0.1; 3], &[1.0; 3], &[0, 1], Some(2), 1e-3).unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn too_many_fiber_indices_rejected() {
        let r = derive_mixed(&norm_sq, &[0.0; 3], &[1.0; 3], &[0, 1, 2, 0], None);
        assert!(matches!(r, Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn stencil_outside_domain() {
        let f = |_x: &[Jet], y: &[Jet]| y[0].sqrt();
        let r = fd_derive(&f, &[0.0], &[1e-4], &[0], None, 1e-3);
        assert!(matches!(r, Err(Error::Domain(_))));
    }

    #[test]
    fn mixed_base_and_fiber() {
        // f = x0^2 y1^3  ->  d^2/dy1^2 d/dx0 = 2 x0 * 6 y1
        let f = |x: &[Jet], y: &[Jet]| -> Result<Jet> { Ok(&x[0].powi(2) * &y[1].powi(3)) };
        let v = derive_mixed(&f, &[0.7, 0.0], &[0.0, 1.3], &[1, 1], Some(0)).unwrap();
        assert!((v - 2.0 * 0.7 * 6.0 * 1.3).abs() < 1e-12);
    }
}

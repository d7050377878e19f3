//! Drivers behind the CLI subcommands: each turns a [`RunConfig`] into a
//! [`VerificationReport`] (or, for `generate`, a JSON dump).

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::json;

use crate::abmetric::{
    douglas_tensor, douglas_tensor_fd, f_eval, fundamental_tensor, is_berwald, is_douglas, is_douglas_with,
    lss_criterion, spray, DouglasPath, Sample, Sampler, DEFAULT_DOUGLAS_FD_STEP,
};
use crate::atlas::Family;
use crate::config::{CheckKind, RunConfig};
use crate::deform::{deform, eta, eta_quadrature, invert_deform, rbar_formula, DeformationFactors};
use crate::diffkit::{constants, linalg};
use crate::error::{Error, Result};
use crate::geometry::{b_norm_sq, check_conformal, covariant_derivative, MetricRef, OneFormRef};
use crate::phifun::{
    invariants_pq, ode_residual, transform_params_gu, transform_params_hv, Invariant, PhiFunction, PhiParams, PhiRef,
    PhiSpec,
};
use crate::report::{CheckRecord, SampleRecord, VerificationReport};

/// Accumulates checks, notes and timings.
struct Builder {
    checks: Vec<CheckRecord>,
    notes: Vec<String>,
    timings: Vec<(String, f64)>,
}

impl Builder {
    fn new() -> Self {
        Builder {
            checks: Vec::new(),
            notes: Vec::new(),
            timings: Vec::new(),
        }
    }

    fn timed(&mut self, label: &str, run: impl FnOnce(&mut Self) -> Result<()>) -> Result<()> {
        let t0 = Instant::now();
        run(self)?;
        self.timings.push((label.to_string(), t0.elapsed().as_secs_f64() * 1e3));
        Ok(())
    }

    fn finish(self, cfg: &RunConfig) -> Result<VerificationReport> {
        let mut r = VerificationReport::new(serde_json::to_value(cfg)?, self.checks);
        r.notes = self.notes;
        r.meta.elapsed_ms = self.timings;
        Ok(r)
    }
}

fn one_d_check(name: &str, tol: f64, xs: &[f64], eval: impl Fn(f64) -> Result<f64> + Sync) -> CheckRecord {
    let points = xs
        .par_iter()
        .enumerate()
        .map(|(i, s)| match eval(*s) {
            Ok(r) => SampleRecord::ok(i, vec![*s], Vec::new(), r),
            Err(e) => SampleRecord::failed(i, vec![*s], Vec::new(), &e),
        })
        .collect();
    CheckRecord::from_samples(name, tol, None, points)
}

fn sample_check(name: &str, tol: f64, sampler: &Sampler, samples: &[Sample], eval: impl Fn(&Sample) -> Result<f64> + Sync) -> CheckRecord {
    let points = samples
        .par_iter()
        .map(|s| match eval(s) {
            Ok(r) => SampleRecord::ok(s.index, s.x.clone(), s.y.clone(), r),
            Err(e) => SampleRecord::failed(s.index, s.x.clone(), s.y.clone(), &e),
        })
        .collect();
    CheckRecord::from_samples(name, tol, Some(sampler.seed), points)
}

/// `grid` equally spaced points of `[lo, hi]`.
pub fn linspace(lo: f64, hi: f64, grid: usize) -> Vec<f64> {
    (0..grid).map(|i| lo + (hi - lo) * i as f64 / (grid - 1) as f64).collect()
}

/// Half-width of the `s` interval swept for a profile: at most 0.6 and
/// well inside both the series disk and the regularity interval.
fn s_range(phi: &dyn PhiFunction, p: &PhiParams) -> f64 {
    let limit = phi.radius().min(p.regularity_radius(f64::INFINITY));
    0.6_f64.min(0.9 * limit)
}

/// ODE residual normalized by `1 + |phi| + |phi'| + |phi''|`.
pub fn ode_sweep(name: &str, phi: &dyn PhiFunction, p: &PhiParams, grid: usize, tol: f64) -> CheckRecord {
    let h = s_range(phi, p);
    one_d_check(name, tol, &linspace(-h, h, grid), |s| {
        let [v, d, dd] = phi.derivs(s)?;
        Ok(ode_residual(phi, p.k1, p.k2, p.k3, s)?.abs() / (1.0 + v.abs() + d.abs() + dd.abs()))
    })
}

/// Relative gap between the closed-form `eta` and quadrature on
/// `bbar^2 in [0, 0.5]`.
pub fn eta_sweep(name: &str, p: &PhiParams, grid: usize, tol: f64) -> CheckRecord {
    one_d_check(name, tol, &linspace(0.0, 0.5, grid), |t| {
        let a = eta(p.k1, p.k2, p.k3, t)?;
        let b = eta_quadrature(p.k1, p.k2, p.k3, t)?;
        Ok((a - b).abs() / b.abs())
    })
}

/// Distance between two invariant values: 0 for equal special values,
/// relative distance for finite ones, 1 for mismatched kinds.
pub fn invariant_distance(a: &Invariant, b: &Invariant) -> f64 {
    match (a, b) {
        (Invariant::Finite(x), Invariant::Finite(y)) => (x - y).norm() / (1.0 + x.norm().max(y.norm())),
        _ if std::mem::discriminant(a) == std::mem::discriminant(b) => 0.0,
        _ => 1.0,
    }
}

/// `(p, q)` before and after `count` random `h_v o g_u` transformations.
pub fn invariants_check(name: &str, p: &PhiParams, count: usize, seed: u64, tol: f64) -> CheckRecord {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (p0, q0) = invariants_pq(*p);
    let points = (0..count)
        .map(|i| {
            let u: f64 = rng.gen_range(-1.0..1.0);
            let v: f64 = rng.gen_range(0.5..2.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            let res = transform_params_hv(transform_params_gu(*p, u), v).map(|t| {
                let (p1, q1) = invariants_pq(t);
                invariant_distance(&p0, &p1).max(invariant_distance(&q0, &q1))
            });
            match res {
                Ok(r) => SampleRecord::ok(i, vec![u, v], Vec::new(), r),
                Err(e) => SampleRecord::failed(i, vec![u, v], Vec::new(), &e),
            }
        })
        .collect();
    CheckRecord::from_samples(name, tol, Some(seed), points)
}

fn draw_pair(a: &MetricRef, b: &OneFormRef, sampler: &Sampler) -> Result<Vec<Sample>> {
    sampler.draw(a.dim(), |x, _| a.contains(x) && b.contains(x))
}

fn conformal_check(a: &MetricRef, b: &OneFormRef, sampler: &Sampler, tol: f64) -> Result<CheckRecord> {
    let samples = draw_pair(a, b, sampler)?;
    Ok(sample_check("conformal", tol, sampler, &samples, |s| {
        let fit = check_conformal(&**a, &**b, &s.x, tol)?;
        Ok(fit.residual.max(fit.max_s))
    }))
}

fn family_phi(family: &Family) -> Option<(PhiRef, PhiParams)> {
    family.phi.clone()
}

/// Runs the selected predicate suites on the configured family.
pub fn run_suite(cfg: &RunConfig) -> Result<VerificationReport> {
    cfg.validate()?;
    let family = cfg.family.build(cfg.n)?;
    let sampler = cfg.sampler();
    let tols = &cfg.tolerances;
    let mut out = Builder::new();
    let mut seen = Vec::new();
    for kind in &cfg.checks {
        if seen.contains(kind) {
            continue;
        }
        seen.push(*kind);
        let f = &*family.finsler;
        match kind {
            CheckKind::Douglas => out.timed("douglas", |o| {
                o.checks.push(is_douglas(f, &sampler, cfg.tol)?);
                Ok(())
            })?,
            CheckKind::DouglasFd => out.timed("douglas_fd", |o| {
                o.checks.push(is_douglas_with(f, &sampler, tols.fd, DouglasPath::Fd)?);
                Ok(())
            })?,
            CheckKind::Berwald => out.timed("berwald", |o| {
                o.checks.push(is_berwald(f, &sampler, tols.berwald)?);
                Ok(())
            })?,
            CheckKind::Lss => out.timed("lss", |o| {
                let (Some((a, b)), Some((_, p))) = (family.pair.clone(), family_phi(&family)) else {
                    o.notes.push(format!("lss: {} is not given as an (alpha, beta) pair", family.label));
                    return Ok(());
                };
                match lss_criterion(a, b, &p, &sampler, tols.lss) {
                    Ok(r) => o.checks.extend(r.records()),
                    Err(Error::Precondition(msg)) => o.notes.push(format!("lss: not applicable ({msg})")),
                    Err(e) => return Err(e),
                }
                Ok(())
            })?,
            CheckKind::Conformal => out.timed("conformal", |o| {
                match &family.seed {
                    Some((a, b)) => o.checks.push(conformal_check(a, b, &sampler, tols.conformal)?),
                    None => o.notes.push(format!("conformal: {} has no closed conformal seed", family.label)),
                }
                Ok(())
            })?,
            CheckKind::Ode => out.timed("ode", |o| {
                match family_phi(&family) {
                    Some((phi, p)) => o.checks.push(ode_sweep("ode", &*phi, &p, cfg.grid, tols.ode)),
                    None => o.notes.push(format!("ode: {} has no profile", family.label)),
                }
                Ok(())
            })?,
            CheckKind::Eta => out.timed("eta", |o| {
                match family_phi(&family) {
                    Some((_, p)) => o.checks.push(eta_sweep("eta", &p, cfg.grid, tols.eta)),
                    None => o.notes.push(format!("eta: {} has no ODE constants", family.label)),
                }
                Ok(())
            })?,
            CheckKind::Invariants => out.timed("invariants", |o| {
                match family_phi(&family) {
                    Some((_, p)) => o.checks.push(invariants_check("invariants", &p, 100, cfg.seed, tols.invariants)),
                    None => o.notes.push(format!("invariants: {} has no ODE constants", family.label)),
                }
                Ok(())
            })?,
        }
    }
    out.finish(cfg)
}

/// ODE sweeps, normalization and invariants of one profile.
pub fn phi_report(cfg: &RunConfig) -> Result<VerificationReport> {
    cfg.validate()?;
    let (phi, p, family) = match &cfg.phi {
        Some(spec) => (spec.build()?, spec.params(), match spec {
            PhiSpec::Family(f) => Some(*f),
            _ => None,
        }),
        None => {
            let fam = cfg.family.build(cfg.n)?;
            let (phi, p) = family_phi(&fam).ok_or_else(|| Error::Config {
                fields: vec![format!("phi: {} has no profile; give one explicitly", fam.label)],
            })?;
            (phi, p, None)
        }
    };
    let mut out = Builder::new();
    out.timed("phi", |o| {
        o.checks.push(ode_sweep("ode", &*phi, &p, cfg.grid, cfg.tolerances.ode));
        if let Some(fam) = family {
            let h = s_range(&*phi, &p);
            o.checks.push(one_d_check("reduced_ode", cfg.tolerances.ode, &linspace(-h, h, cfg.grid), |s| {
                let [v, d, dd] = phi.derivs(s)?;
                Ok(fam.reduced_residual(&*phi, s)?.abs() / (1.0 + v.abs() + d.abs() + dd.abs()))
            }));
        }
        let [v0, d0, _] = phi.derivs(0.0)?;
        o.checks.push(CheckRecord::from_residuals(
            "normalization",
            cfg.tolerances.ode,
            &[(v0 - 1.0).abs(), (d0 - p.eps).abs()],
        ));
        o.checks.push(invariants_check("invariants", &p, 100, cfg.seed, cfg.tolerances.invariants));
        Ok(())
    })?;
    out.finish(cfg)
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (p, q)| f64::max(m, (p - q).abs()))
}

fn values_at<T: ?Sized>(field: &T, x: &[f64], get: impl Fn(&T, &[crate::diffkit::Jet]) -> Result<Vec<crate::diffkit::Jet>>) -> Result<Vec<f64>> {
    Ok(get(field, &constants(x))?.iter().map(|v| v.value()).collect())
}

/// Applies the configured factors to the family's `(alpha, beta)` (or its
/// seed) and reports the round-trip error and the `r_bar` identity.
pub fn deform_report(cfg: &RunConfig) -> Result<VerificationReport> {
    cfg.validate()?;
    let spec = cfg.deform.as_ref().ok_or_else(|| Error::Config {
        fields: vec!["deform: factors (kappa, rho, nu) are required".into()],
    })?;
    let family = cfg.family.build(cfg.n)?;
    let (a, b) = family.pair.clone().or_else(|| family.seed.clone()).ok_or_else(|| Error::Config {
        fields: vec![format!("family: {} has no (alpha, beta) pair to deform", family.label)],
    })?;
    let factors = DeformationFactors::from_specs(&spec.kappa, &spec.rho, &spec.nu);
    factors.validate(spec.b2_max)?;
    let pair = deform(a.clone(), b.clone(), factors.clone())?;
    let (ia, ib) = invert_deform(&pair, spec.b2_max)?;
    let sampler = cfg.sampler();
    let samples = sampler.draw(cfg.n, |x, _| {
        a.contains(x)
            && b.contains(x)
            && matches!(b_norm_sq(&*a, &*b, &constants(x)), Ok(t) if t.value() <= spec.b2_max)
    })?;
    let tol = cfg.tolerances.deform;
    let mut out = Builder::new();
    out.timed("deform", |o| {
        o.checks.push(sample_check("deform_roundtrip", tol, &sampler, &samples, |s| {
            let a0 = values_at(&*a, &s.x, |f, x| f.components(x))?;
            let a1 = values_at(&*ia, &s.x, |f, x| f.components(x))?;
            let b0 = values_at(&*b, &s.x, |f, x| f.components(x))?;
            let b1 = values_at(&*ib, &s.x, |f, x| f.components(x))?;
            Ok(max_abs_diff(&a0, &a1).max(max_abs_diff(&b0, &b1)))
        }));
        o.checks.push(sample_check("rbar_identity", tol, &sampler, &samples, |s| {
            let formula = rbar_formula(&*a, &*b, &factors, &s.x)?;
            let direct = covariant_derivative(&*pair.bbar, &*pair.abar, &s.x)?;
            Ok((&formula - &direct.r).iter().fold(0.0, |m, v| f64::max(m, v.abs())))
        }));
        Ok(())
    })?;
    out.finish(cfg)
}

/// Automatic differentiation against finite differences, and the closed
/// forms of `eta` against quadrature.
pub fn oracle_report(cfg: &RunConfig) -> Result<VerificationReport> {
    cfg.validate()?;
    let family = cfg.family.build(cfg.n)?;
    let sampler = cfg.sampler();
    let f = &*family.finsler;
    let samples = sampler.draw(cfg.n, |x, y| f.admissible(x, y))?;
    let mut out = Builder::new();
    out.timed("oracle", |o| {
        o.checks.push(sample_check("douglas_ad_vs_fd", cfg.tolerances.fd, &sampler, &samples, |s| {
            let ad = douglas_tensor(f, &s.x, &s.y)?;
            let fd = douglas_tensor_fd(f, &s.x, &s.y, DEFAULT_DOUGLAS_FD_STEP)?;
            let gap = (&ad.d - &fd.d).iter().fold(0.0, |m, v| f64::max(m, v.abs()));
            Ok(gap / (1.0 + ad.max_abs_spray()))
        }));
        match family_phi(&family) {
            Some((_, p)) => o.checks.push(eta_sweep("eta_vs_quadrature", &p, cfg.grid, cfg.tolerances.eta)),
            None => o.notes.push(format!("eta_vs_quadrature: {} has no ODE constants", family.label)),
        }
        Ok(())
    })?;
    out.finish(cfg)
}

/// The family's fields at the sampled points: `F`, the fundamental tensor,
/// the spray and, for `(alpha, beta)`-metrics, `a_ij` and `b_i`.
pub fn generate(cfg: &RunConfig) -> Result<serde_json::Value> {
    cfg.validate()?;
    let family = cfg.family.build(cfg.n)?;
    let f = &*family.finsler;
    let samples = cfg.sampler().draw(cfg.n, |x, y| f.admissible(x, y))?;
    let n = cfg.n;
    let points = samples
        .iter()
        .map(|s| {
            let g = fundamental_tensor(f, &s.x, &s.y)?;
            let mut p = json!({
                "index": s.index,
                "x": s.x,
                "y": s.y,
                "F": f_eval(f, &s.x, &s.y)?,
                "g": g.rows().into_iter().map(|r| r.to_vec()).collect::<Vec<_>>(),
                "spray": spray(f, &s.x, &s.y)?,
            });
            if let Some((a, b)) = &family.pair {
                let am = linalg::values(&a.components(&constants(&s.x))?, n);
                p["a"] = json!(am.rows().into_iter().map(|r| r.to_vec()).collect::<Vec<_>>());
                p["b"] = json!(values_at(&**b, &s.x, |f, x| f.components(x))?);
            }
            Ok(p)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(json!({
        "schema": crate::report::SCHEMA_VERSION,
        "config": serde_json::to_value(cfg)?,
        "family": family.label,
        "points": points,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atlas::FamilySpec;

    fn cfg(family: FamilySpec, checks: Vec<CheckKind>) -> RunConfig {
        RunConfig {
            family,
            checks,
            samples: 6,
            ..RunConfig::default()
        }
    }

    #[test]
    fn berwald_suite_passes() {
        let r = run_suite(&cfg(FamilySpec::Berwald, vec![CheckKind::Douglas, CheckKind::Ode, CheckKind::Eta])).unwrap();
        assert!(r.all_pass(), "{}", r.to_text());
    }

    #[test]
    fn nonclosed_randers_fails() {
        let r = run_suite(&cfg(FamilySpec::RandersNonclosed { scale: 0.2 }, vec![CheckKind::Douglas, CheckKind::Lss]))
            .unwrap();
        assert!(!r.check("douglas").unwrap().pass);
        assert!(!r.all_pass());
        assert_eq!(r.notes.len(), 1, "{:?}", r.notes);
    }

    #[test]
    fn invariant_distance_kinds() {
        assert_eq!(invariant_distance(&Invariant::Zero, &Invariant::Zero), 0.0);
        assert_eq!(invariant_distance(&Invariant::Zero, &Invariant::Infinity), 1.0);
    }
}

//! Cross-checks against closed forms and independent numerics.

use std::sync::Arc;

use statrs::function::erf::erf;

use fdouglas::abmetric::{is_douglas, is_douglas_with, AbMetric, DouglasPath, Sampler};
use fdouglas::atlas::{berwald_explicit, corollary_family, FamilySpec, SeedSpec};
use fdouglas::config::{CheckKind, RunConfig};
use fdouglas::deform::{theorem1_scaling, ProfileSpec, Theorem1Case};
use fdouglas::phifun::{phi_pos, phi_zero, FamilyCase, PhiFamily, PhiFunction};
use fdouglas::suite::run_suite;

#[test]
fn zero_family_matches_erf_closed_form() {
    // phi'' = 2 (phi - s phi') integrates to e^{-s^2} + sqrt(pi) s erf(s).
    // statrs' erf is good to about 1e-11, which bounds the comparison.
    let pi_sqrt = std::f64::consts::PI.sqrt();
    for eps in [0.0, 0.7, -1.3] {
        for i in 0..=40 {
            let s = -2.0 + 0.1 * i as f64;
            let want = (-s * s).exp() + pi_sqrt * s * erf(s) + eps * s;
            let got = phi_zero(1.0, eps, s).unwrap();
            assert!((got - want).abs() < 1e-10 * (1.0 + want.abs()), "s = {s}: {got} vs {want}");
        }
    }
}

#[test]
fn pos_family_polynomial_members() {
    for i in -9..=9 {
        let s = 0.1 * i as f64;
        assert!((phi_pos(1.0, 2.0, s).unwrap() - (1.0 + s).powi(2)).abs() < 1e-13);
        assert!((phi_pos(1.0, 0.0, s).unwrap() - (1.0 + s * s)).abs() < 1e-13);
    }
}

#[test]
fn neg_family_derivatives_match_differences() {
    let phi = PhiFamily::new(FamilyCase::Neg, 0.3, 0.4).unwrap().series().unwrap();
    let h = 1e-4;
    for s in [-0.5, -0.1, 0.2, 0.6] {
        let [_, d, dd] = phi.derivs(s).unwrap();
        let e = |t: f64| phi.eval(t).unwrap();
        assert!((d - (e(s + h) - e(s - h)) / (2.0 * h)).abs() < 1e-7);
        assert!((dd - (e(s + h) - 2.0 * e(s) + e(s - h)) / (h * h)).abs() < 1e-5);
    }
}

fn seed() -> (fdouglas::geometry::MetricRef, fdouglas::geometry::OneFormRef) {
    corollary_family(3, ProfileSpec::Mobius { mu: 0.5 }, ProfileSpec::Poly { coeffs: vec![0.0, 0.3] }, 0.8).unwrap()
}

#[test]
fn matched_scaling_is_douglas() {
    let (abar, bbar) = seed();
    let (a, b) = theorem1_scaling(Theorem1Case::A, 1.5, abar, bbar).unwrap();
    let phi = PhiFamily::new(FamilyCase::Pos, 1.5, 0.5).unwrap().series().unwrap();
    let m = AbMetric::new(a, b, Arc::new(phi)).unwrap();
    let rec = is_douglas(&m, &Sampler::new(10, 4), 1e-8).unwrap();
    assert!(rec.pass, "{}", rec.max_residual);
}

#[test]
fn mismatched_sigma_is_not_douglas() {
    let (abar, bbar) = seed();
    let (a, b) = theorem1_scaling(Theorem1Case::A, 1.5, abar, bbar).unwrap();
    let phi = PhiFamily::new(FamilyCase::Pos, 0.7, 0.5).unwrap().series().unwrap();
    let m = AbMetric::new(a, b, Arc::new(phi)).unwrap();
    let rec = is_douglas(&m, &Sampler::new(10, 4), 1e-6).unwrap();
    assert!(!rec.pass, "{}", rec.max_residual);
    assert!(rec.max_residual > 1e-3);
}

#[test]
fn explicit_berwald_fd_agrees() {
    let f = berwald_explicit(3).unwrap();
    let s = Sampler::new(6, 11);
    let ad = is_douglas_with(&f, &s, 1e-8, DouglasPath::Ad).unwrap();
    let fd = is_douglas_with(&f, &s, 1e-4, DouglasPath::Fd).unwrap();
    assert!(ad.pass, "{}", ad.max_residual);
    assert!(fd.pass, "{}", fd.max_residual);
}

#[test]
fn suite_examples() {
    let cases = [
        (FamilySpec::Berwald, true),
        (FamilySpec::RandersClosed { scale: 0.3 }, true),
        (FamilySpec::RandersNonclosed { scale: 0.2 }, false),
        (
            FamilySpec::Classification {
                case: FamilyCase::Zero,
                sigma: -1.0,
                eps: 0.2,
                seed: SeedSpec::default(),
            },
            true,
        ),
    ];
    for (family, expect) in cases {
        let cfg = RunConfig {
            family: family.clone(),
            samples: 8,
            checks: vec![CheckKind::Douglas, CheckKind::DouglasFd],
            ..RunConfig::default()
        };
        let r = run_suite(&cfg).unwrap();
        assert_eq!(r.summary.all_pass, expect, "{}: {}", family.name(), r.to_text());
        assert_eq!(family.expect_douglas(), expect);
    }
}


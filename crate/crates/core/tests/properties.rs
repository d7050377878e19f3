use std::sync::Arc;

use proptest::prelude::*;

use fdouglas::abmetric::{douglas_tensor, f_eval, fundamental_tensor, spray, AbMetric, FinslerFunction, Sampler};
use fdouglas::atlas::{
    berwald_metric, constant_curvature, corollary_family, euclidean, general_square_family, general_square_pair, randers,
    ConstantForm, PositionForm, RotationForm,
};
use fdouglas::deform::{
    deform, eta_jet, invert_deform, nu_conformal_preserving, nu_for_douglas_seed, DeformationFactors, ProfileSpec,
};
use fdouglas::diffkit::{constants, derive_mixed, fd_derive, Jet};
use fdouglas::geometry::{check_conformal, christoffel, riemann_spray, OneFormRef};
use fdouglas::phifun::{
    apply_gu, invariants_pq, ode_residual, transform_params_gu, transform_params_hv, FamilyCase, PhiFamily,
    PhiFunction, PhiParams, PhiRef, PhiSeries,
};
use fdouglas::report::{CheckRecord, SampleRecord, VerificationReport};
use fdouglas::suite::invariant_distance;

fn cfg(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        failure_persistence: None,
        ..ProptestConfig::default()
    }
}

fn point(r: f64) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-r..r, 3)
}

fn direction() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0..1.0_f64, 3).prop_filter("non-zero", |y| y.iter().map(|v| v * v).sum::<f64>() > 0.05)
}

fn poly(c0: f64, spread: f64) -> impl Strategy<Value = ProfileSpec> {
    prop::collection::vec(-spread..spread, 3).prop_map(move |mut c| {
        c[0] += c0;
        ProfileSpec::Poly { coeffs: c }
    })
}

/// `F^2` of a smooth non-Randers test metric.
fn test_field(x: &[Jet], y: &[Jet]) -> fdouglas::Result<Jet> {
    let a2 = y.iter().fold(Jet::zero(), |s, v| &s + &v.square());
    let alpha = a2.sqrt()?;
    let b = &(&x[0] * 0.3).exp() * &(&y[1] * 0.2);
    Ok((&alpha + &b).square() * (&(&b / &alpha) * 0.5).exp())
}

proptest! {
    #![proptest_config(cfg(48))]

    #[test]
    fn derive_mixed_exact_on_polynomials(x in point(1.0), y in point(1.0)) {
        // y0^3 y1 x0^2 + y1^2 y2 x1
        let f = |x: &[Jet], y: &[Jet]| -> fdouglas::Result<Jet> {
            Ok(&(&(&y[0].powi(3) * &y[1]) * &x[0].square()) + &(&(&y[1].square() * &y[2]) * &x[1]))
        };
        let d = derive_mixed(&f, &x, &y, &[0, 0, 1], Some(0)).unwrap();
        prop_assert!((d - 12.0 * y[0] * x[0]).abs() < 1e-12);
        let d = derive_mixed(&f, &x, &y, &[1, 2, 1], Some(1)).unwrap();
        prop_assert!((d - 2.0).abs() < 1e-12);
    }

    #[test]
    fn derive_mixed_matches_fd(x in point(0.5), y in direction(), i in 0..3usize, j in 0..3usize, m in 0..3usize) {
        let ad = derive_mixed(&test_field, &x, &y, &[i, j], Some(m)).unwrap();
        let fd = fd_derive(&test_field, &x, &y, &[i, j], Some(m), 2e-3).unwrap();
        prop_assert!((ad - fd).abs() / (1.0 + ad.abs()) < 1e-4, "ad {} fd {}", ad, fd);
    }

    #[test]
    fn tag_order_is_irrelevant(x in point(0.5), y in direction(), i in 0..3usize, j in 0..3usize, k in 0..3usize) {
        let a = derive_mixed(&test_field, &x, &y, &[i, j, k], None).unwrap();
        let b = derive_mixed(&test_field, &x, &y, &[k, i, j], None).unwrap();
        let c = derive_mixed(&test_field, &x, &y, &[j, k, i], None).unwrap();
        prop_assert_eq!(a.to_bits(), b.to_bits());
        prop_assert_eq!(a.to_bits(), c.to_bits());
    }

    #[test]
    fn christoffel_symmetric_and_compatible(mu in -0.9..0.9_f64, x in point(0.5)) {
        let h = constant_curvature(3, mu).unwrap();
        let g = christoffel(&*h, &x).unwrap();
        // d_k a_ij = a_lj Gamma^l_ik + a_il Gamma^l_jk
        for k in 0..3 {
            let mut xs = constants(&x);
            xs[k] = Jet::variable(x[k], 0);
            let a = h.components(&xs).unwrap();
            for i in 0..3 {
                for j in 0..3 {
                    prop_assert_eq!(g[[i, j, k]], g[[i, k, j]]);
                    let mut rhs = 0.0;
                    for l in 0..3 {
                        rhs += a[l * 3 + j].value() * g[[l, i, k]] + a[i * 3 + l].value() * g[[l, j, k]];
                    }
                    prop_assert!((a[i * 3 + j].coeff(1) - rhs).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn riemannian_spray_and_metric(mu in -0.9..0.9_f64, x in point(0.5), y in direction()) {
        let h = constant_curvature(3, mu).unwrap();
        let zero: OneFormRef = Arc::new(ConstantForm(vec![0.0; 3]));
        let m = AbMetric::new(h.clone(), zero, Arc::new(PhiSeries::riemannian())).unwrap();
        let g1 = spray(&m, &x, &y).unwrap();
        let g2 = riemann_spray(&*h, &x, &y).unwrap();
        for (p, q) in g1.iter().zip(&g2) {
            prop_assert!((p - q).abs() < 1e-8);
        }
        let g = fundamental_tensor(&m, &x, &y).unwrap();
        let a = h.components(&constants(&x)).unwrap();
        for k in 0..9 {
            prop_assert!((g[[k / 3, k % 3]] - a[k].value()).abs() < 1e-12);
        }
    }

    #[test]
    fn family_normalization_and_reduced_ode(
        which in 0..3usize,
        sigma_pos in 0.1..2.0_f64,
        sigma_neg in -0.9..0.9_f64,
        zero_sign in prop::bool::ANY,
        eps in -2.0..2.0_f64,
        s in -0.6..0.6_f64,
    ) {
        let fam = match which {
            0 => PhiFamily::new(FamilyCase::Pos, sigma_pos, eps),
            1 => PhiFamily::new(FamilyCase::Zero, if zero_sign { 1.0 } else { -1.0 }, eps),
            _ => PhiFamily::new(FamilyCase::Neg, sigma_neg, eps),
        }
        .unwrap();
        let phi = fam.series().unwrap();
        let [v, d, _] = phi.derivs(0.0).unwrap();
        prop_assert!((v - 1.0).abs() < 1e-12 && (d - eps).abs() < 1e-12);
        prop_assert!(fam.reduced_residual(&phi, s).unwrap().abs() < 1e-9);
    }

    #[test]
    fn group_action_preserves_the_equation(u in -0.8..0.8_f64, s in -0.4..0.4_f64) {
        let p = PhiParams::new(2.0, 0.0, -3.0, 2.0);
        let phi: PhiRef = Arc::new(PhiSeries::square());
        let q = transform_params_gu(p, u);
        let g = apply_gu(phi, u);
        prop_assert!(ode_residual(&*g, q.k1, q.k2, q.k3, s).unwrap().abs() < 1e-8);
    }

    #[test]
    fn pq_invariance(k1 in -2.0..2.0_f64, k2 in -2.0..2.0_f64, k3 in -2.0..2.0_f64, eps in -1.0..1.0_f64,
                     u in -1.0..1.0_f64, v in 0.3..3.0_f64, neg in prop::bool::ANY) {
        let p = PhiParams::new(k1, k2, k3, eps);
        let v = if neg { -v } else { v };
        let (p0, q0) = invariants_pq(p);
        for t in [transform_params_gu(p, u), transform_params_hv(p, v).unwrap()] {
            let (p1, q1) = invariants_pq(t);
            prop_assert!(invariant_distance(&p0, &p1) < 1e-12, "{:?} vs {:?}", p0, p1);
            prop_assert!(invariant_distance(&q0, &q1) < 1e-12, "{:?} vs {:?}", q0, q1);
        }
    }
}

proptest! {
    #![proptest_config(cfg(16))]

    #[test]
    fn douglas_tensor_structure(scale in 0.05..0.4_f64, mu in -0.5..0.5_f64, x in point(0.45), y in direction()) {
        let exp_phi: PhiRef = Arc::new(fdouglas::phifun::JetFn::new("exp", f64::INFINITY, |s: &Jet| Ok(s.exp())));
        let m = AbMetric::new(constant_curvature(3, mu).unwrap(), Arc::new(RotationForm { n: 3, scale }), exp_phi).unwrap();
        prop_assume!(m.admissible(&x, &y));
        let d = douglas_tensor(&m, &x, &y).unwrap();
        let sc = 1.0 + d.max_abs();
        prop_assert!(d.symmetry_residual() / sc < 1e-9);
        prop_assert!(d.trace_residual() / sc < 1e-9);
        prop_assert!(d.contraction_residual(&y) / sc < 1e-9);
        let ys: Vec<f64> = y.iter().map(|v| 3.0 * v).collect();
        let d3 = douglas_tensor(&m, &x, &ys).unwrap();
        let hom = (&d3.d * 3.0 - &d.d).iter().fold(0.0_f64, |a, v| a.max(v.abs()));
        prop_assert!(hom / sc < 1e-9);
    }

    #[test]
    fn reparametrization_bridge(u in -0.9..0.9_f64, v in 0.5..2.0_f64, x in point(0.45), y in direction()) {
        let m = berwald_metric(3).unwrap();
        prop_assume!(m.admissible(&x, &y));
        let f0 = f_eval(&m, &x, &y).unwrap();
        let g = m.reparametrize_gu(u).unwrap();
        prop_assert!((f_eval(&g, &x, &y).unwrap() - f0).abs() < 1e-10);
        let h = m.reparametrize_hv(v).unwrap();
        prop_assert!((f_eval(&h, &x, &y).unwrap() - f0).abs() < 1e-10);
    }

    #[test]
    fn corollary_seeds_are_closed_conformal(kappa in poly(0.0, 0.6), rho in poly(0.0, 0.6), c in 0.2..1.5_f64, x in point(0.5)) {
        let (a, b) = corollary_family(3, kappa, rho, c).unwrap();
        prop_assume!(a.contains(&x));
        let fit = check_conformal(&*a, &*b, &x, 1e-8).unwrap();
        prop_assert!(fit.passes(1e-8), "{:?}", fit);
    }

    #[test]
    fn general_square_matches_seed_scaling(kappa in poly(0.0, 0.5), rho in poly(0.0, 0.4), c in 0.3..1.2_f64,
                                           x in point(0.5), y in direction()) {
        let f = general_square_family(3, kappa.clone(), rho.clone(), c).unwrap();
        let g = general_square_pair(3, kappa, rho, c).unwrap();
        prop_assume!(f.admissible(&x, &y) && g.admissible(&x, &y));
        let p = f_eval(&f, &x, &y).unwrap();
        let q = f_eval(&g, &x, &y).unwrap();
        prop_assert!((p - q).abs() < 1e-10 * (1.0 + q.abs()));
    }

    #[test]
    fn conformal_preserving_deformation(kappa in poly(0.0, 0.5), rho in poly(0.0, 0.5), c in 0.5..1.5_f64, x in point(0.5)) {
        let a = euclidean(3).unwrap();
        let b: OneFormRef = Arc::new(PositionForm { n: 3, scale: 1.0 });
        let nu = nu_conformal_preserving(kappa.clone(), rho.clone(), c).unwrap();
        let f = DeformationFactors::from_specs(&kappa, &rho, &nu);
        prop_assume!(f.admissible_at(x.iter().map(|v| v * v).sum()));
        let pair = deform(a, b, f).unwrap();
        prop_assume!(pair.abar.contains(&x));
        let fit = check_conformal(&*pair.abar, &*pair.bbar, &x, 1e-8).unwrap();
        prop_assert!(fit.passes(1e-8), "{:?}", fit);
    }

    #[test]
    fn deform_invert_round_trip(kappa in poly(0.0, 0.3), rho in poly(0.0, 0.3), x in point(0.5)) {
        let a = euclidean(3).unwrap();
        let b: OneFormRef = Arc::new(PositionForm { n: 3, scale: 1.0 });
        let nu = ProfileSpec::constant(1.0);
        let f = DeformationFactors::from_specs(&kappa, &rho, &nu);
        let pair = deform(a.clone(), b.clone(), f).unwrap();
        let inv = invert_deform(&pair, 0.8);
        prop_assume!(inv.is_ok());
        let (ia, ib) = inv.unwrap();
        let xs = constants(&x);
        for (p, q) in ia.components(&xs).unwrap().iter().zip(a.components(&xs).unwrap()) {
            prop_assert!((p.value() - q.value()).abs() < 1e-10);
        }
        for (p, q) in ib.components(&xs).unwrap().iter().zip(b.components(&xs).unwrap()) {
            prop_assert!((p.value() - q.value()).abs() < 1e-10);
        }
    }
}

/// Data satisfying the Douglas 1-form condition becomes closed and
/// conformal under the Douglas factors.
#[test]
fn douglas_factors_make_berwald_data_conformal() {
    let m = berwald_metric(3).unwrap();
    let (k1, k2, k3) = (2.0, 0.0, -3.0);
    let sampler = Sampler::new(10, 1);
    let points = sampler.draw(3, |x, _| m.a.contains(x)).unwrap();
    for (kappa, rho) in [
        (ProfileSpec::KappaDouglas { k1, k2, k3 }, ProfileSpec::RhoIntegral { k1, k2, k3 }),
        (ProfileSpec::zero(), ProfileSpec::RhoIntegral { k1, k2, k3 }),
    ] {
        let nu = nu_for_douglas_seed(k1, k2, k3, kappa.clone(), rho.clone(), 1.0).unwrap();
        let pair = deform(m.a.clone(), m.b.clone(), DeformationFactors::from_specs(&kappa, &rho, &nu)).unwrap();
        for p in &points {
            let fit = check_conformal(&*pair.abar, &*pair.bbar, &p.x, 1e-8).unwrap();
            assert!(fit.passes(1e-8), "{kappa:?}: {fit:?}");
        }
    }
}

#[test]
fn eta_jet_is_normalized() {
    for (k1, k2, k3) in [(2.0, 0.0, -3.0), (0.0, 1.0, 0.4), (1.0, 0.25, 0.0)] {
        assert!((eta_jet(k1, k2, k3, &Jet::zero()).unwrap().value() - 1.0).abs() < 1e-15);
    }
}

#[test]
fn sampler_is_deterministic_and_in_ball() {
    let s = Sampler::new(30, 99).with_radius(0.4);
    let a = s.draw(3, |_, _| true).unwrap();
    let b = s.draw(3, |_, _| true).unwrap();
    assert_eq!(a, b);
    for p in &a {
        assert!(p.x.iter().map(|v| v * v).sum::<f64>().sqrt() <= 0.4);
        assert!((p.y.iter().map(|v| v * v).sum::<f64>() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn randers_douglas_iff_closed() {
    let s = Sampler::new(8, 2);
    let closed = randers(euclidean(3).unwrap(), Arc::new(PositionForm { n: 3, scale: 0.3 })).unwrap();
    let open = randers(euclidean(3).unwrap(), Arc::new(RotationForm { n: 3, scale: 0.3 })).unwrap();
    assert!(fdouglas::abmetric::is_douglas(&closed, &s, 1e-6).unwrap().pass);
    assert!(!fdouglas::abmetric::is_douglas(&open, &s, 1e-6).unwrap().pass);
    // Douglas but not Berwald
    assert!(!fdouglas::abmetric::is_berwald(&closed, &s, 1e-6).unwrap().pass);
}

#[test]
fn report_json_round_trip() {
    let rec = CheckRecord::from_samples(
        "douglas",
        1e-6,
        Some(3),
        vec![SampleRecord::ok(1, vec![0.1], vec![1.0], 2e-7), SampleRecord::ok(0, vec![0.2], vec![0.0], 1e-9)],
    );
    let r = VerificationReport::new(serde_json::json!({"family": "berwald"}), vec![rec]);
    let back = VerificationReport::from_json(&r.to_json().unwrap()).unwrap();
    assert_eq!(back, r);
}

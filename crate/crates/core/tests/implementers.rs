mod common;

use common::*;
use proptest::prelude::*;
use qfsp::fock::TruncatedFock;
use qfsp::implementers::{self as imp, SymplecticMap};
use qfsp::linalg::{c, frob, CMat, ONE};
use qfsp::{Error, QuasifreeForm};

#[test]
fn squeeze_is_symplectic_and_inverts() {
    let ps = space(2);
    let u = imp::diagonal_squeeze(4, 1, 0.7);
    assert!(u.validate(&ps, 1e-12).is_valid());
    let prod = u.compose(&u.inverse(&ps));
    assert!(frob(&(prod.u - CMat::identity(4, 4))) < 1e-13);
    let inv = imp::inverse_map(&u).unwrap();
    assert!(frob(&(inv.u - imp::diagonal_squeeze(4, 1, -0.7).u)) < 1e-13);
}

#[test]
fn non_symplectic_map_fails_validation() {
    let ps = space(1);
    let u = SymplecticMap::new(CMat::identity(2, 2) * c(2.0, 0.0));
    assert!(!u.validate(&ps, 1e-10).is_valid());
}

#[test]
fn theta_of_a_squeeze_is_the_squeeze_parameter() {
    let fp = fock_form(1);
    for r in [0.2, -0.9, 1.5] {
        let f2 = fp.transform(&imp::diagonal_squeeze(2, 0, r).u).unwrap();
        let th = imp::theta_spectrum(&fp, &f2).unwrap();
        assert_eq!(th.len(), 1);
        assert!((th[0] - r.abs()).abs() < 1e-10, "{th:?}");
    }
}

#[test]
fn theta_of_equal_forms_vanishes() {
    let fp = fock_form(2);
    assert!(frob(&imp::theta(&fp, &fp).unwrap()) < 1e-14);
    let (u, h) = imp::bogoliubov_u(&fp, &fp).unwrap();
    assert!(frob(&(u.u - CMat::identity(4, 4))) < 1e-14);
    assert!(frob(&h.op) < 1e-14);
}

#[test]
fn forms_on_different_spaces_are_rejected() {
    let a = fock_form(1);
    let b = QuasifreeForm::fock(&qfsp::PhaseSpace::build_standard(1, qfsp::Presentation::Position).unwrap()).unwrap();
    assert!(imp::theta(&a, &b).is_err());
}

#[test]
fn overlap_factorizes_over_modes() {
    let fp = fock_form(2);
    let (r1, r2): (f64, f64) = (0.6, 1.1);
    let u = imp::diagonal_squeeze(4, 0, r1).compose(&imp::diagonal_squeeze(4, 1, r2));
    let f2 = fp.transform(&u.u).unwrap();
    let want = (r1.cosh() * r2.cosh()).powf(-0.5);
    assert!((imp::vacuum_overlap(&fp, &f2).unwrap() - want).abs() < 1e-12);
}

#[test]
fn overlap_matches_fock_space_implementer() {
    let fp = fock_form(1);
    let r: f64 = 0.8;
    let f2 = fp.transform(&imp::diagonal_squeeze(2, 0, r).u).unwrap();
    let fk = TruncatedFock::new(&fp, 60).unwrap();
    let t = imp::implement_t(&fk, &f2).unwrap();
    let brute = fk.expectation(&t, &fk.vacuum()).norm();
    assert!((brute - r.cosh().powf(-0.5)).abs() < 1e-9);
    assert!(imp::truncation_tail(&fp, &f2, 60).unwrap() < 1e-9);
}

#[test]
fn implement_t_needs_a_projection() {
    let fp = fock_form(1);
    let fk = TruncatedFock::new(&fp, 4).unwrap();
    let th = QuasifreeForm::thermal(&space(1), &[0.3]).unwrap();
    assert!(matches!(imp::implement_t(&fk, &th), Err(Error::NotAProjection)));
}

#[test]
fn squeezed_tail_behaviour() {
    assert_eq!(imp::squeezed_tail(0.0, 4), 0.0);
    let mut last = 1.0;
    for n in [0, 2, 6, 12, 24] {
        let t = imp::squeezed_tail(1.0, n);
        assert!(t < last);
        last = t;
    }
    // first term alone leaves 1 - sech r
    assert!((imp::squeezed_tail(1.0, 0) - (1.0 - 1.0 / 1f64.cosh())).abs() < 1e-15);
}

#[test]
fn polar_parts_of_squeeze_and_rotation() {
    let fp = fock_form(2);
    let sq = imp::diagonal_squeeze(4, 0, 0.5);
    let parts = imp::polar(&sq, &fp).unwrap();
    assert!(frob(&(&parts.positive.u - &sq.u)) < 1e-12);
    assert!(frob(&(parts.rotation.u - CMat::identity(4, 4))) < 1e-12);

    let rot = imp::diagonal_rotation(4, 0, 1, 0.4);
    let parts = imp::polar(&rot, &fp).unwrap();
    assert!(frob(&(parts.positive.u - CMat::identity(4, 4))) < 1e-12);
    assert!(frob(&(&parts.rotation.u - &rot.u)) < 1e-12);
}

#[test]
fn corner_norm_of_squeeze_is_sinh() {
    let fp = fock_form(1);
    for r in [0.1, 0.7, 2.0] {
        let u = imp::diagonal_squeeze(2, 0, r);
        assert!((imp::corner_hs(&u, &fp) - r.sinh()).abs() < 1e-12);
        let id = SymplecticMap::identity(2);
        assert!(imp::dp_distance(&u, &u, &fp) == 0.0);
        assert!(imp::dp_distance(&u, &id, &fp) >= r.sinh());
    }
}

#[test]
fn metaplectic_intertwines_fields() {
    let ps = space(1);
    let fp = fock_form(1);
    let fk = TruncatedFock::new(&fp, 80).unwrap();
    let u = imp::diagonal_squeeze(2, 0, 0.4).compose(&imp::diagonal_phase(2, 0, 0.3));
    let q = imp::metaplectic(&fk, &u, ONE).unwrap().matrix;
    let mut rng = rng(51);
    let f = real_vector(&mut rng, &ps, 1.0);
    let lhs = &q * fk.field(&f).matrix * q.adjoint();
    let rhs = fk.field(&(&u.u * &f)).matrix;
    assert!(fk.sector_residual(&lhs, &rhs, 2) < 1e-8);
}

#[test]
fn cocycle_with_identity_is_one() {
    let fp = fock_form(1);
    let fk = TruncatedFock::new(&fp, 40).unwrap();
    let u = imp::diagonal_squeeze(2, 0, 0.6);
    let est = imp::cocycle(&fk, &SymplecticMap::identity(2), &u, 10, 1e-8).unwrap();
    assert_eq!(est.sign, Some(1));
    assert!((est.raw[0] - 1.0).abs() < 1e-10);
}

#[test]
fn cocycle_is_unimodular_for_complex_maps() {
    let fp = fock_form(1);
    let fk = TruncatedFock::new(&fp, 60).unwrap();
    let u1 = imp::diagonal_squeeze(2, 0, 0.5).compose(&imp::diagonal_phase(2, 0, 0.7));
    let u2 = imp::diagonal_phase(2, 0, -0.2).compose(&imp::diagonal_squeeze(2, 0, 0.3));
    let est = imp::cocycle(&fk, &u1, &u2, 56, 1e-8).unwrap();
    let modulus = (est.raw[0].powi(2) + est.raw[1].powi(2)).sqrt();
    assert!((modulus - 1.0).abs() < 1e-8, "{est:?}");
    assert!(est.raw[1].abs() > 1e-3);
}

#[test]
fn continuity_bound_for_one_mode() {
    let fp = fock_form(1);
    let fk = TruncatedFock::new(&fp, 80).unwrap();
    for r in [0.1, 0.3, 0.6] {
        let u = imp::diagonal_squeeze(2, 0, r);
        let q = imp::metaplectic(&fk, &u, ONE).unwrap();
        let moved = (q.apply(&fk.vacuum()) - fk.vacuum()).norm_squared();
        assert!(moved <= imp::continuity_bound(&u, &fp) + 1e-9, "r={r} moved={moved}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn bogoliubov_map_intertwines(seed in 0u64..10_000, modes in 1usize..4) {
        let ps = space(modes);
        let fp = fock_form(modes);
        let mut rng = rng(seed);
        let u = random_map(&mut rng, &ps, 0.4);
        let f2 = fp.transform(&u.u).unwrap();
        let (v, h) = imp::bogoliubov_u(&fp, &f2).unwrap();
        prop_assert!(h.validate(&ps, 1e-9).is_valid());
        prop_assert!(v.validate(&ps, 1e-9).is_valid());
        prop_assert!(imp::intertwining_residual(&fp, &f2, &v) < 1e-9);
    }

    #[test]
    fn dp_is_a_metric(seed in 0u64..10_000) {
        let ps = space(2);
        let fp = fock_form(2);
        let mut rng = rng(seed);
        let a = random_map(&mut rng, &ps, 0.5);
        let b = random_map(&mut rng, &ps, 0.5);
        let x = random_map(&mut rng, &ps, 0.5);
        let ab = imp::dp_distance(&a, &b, &fp);
        prop_assert!((ab - imp::dp_distance(&b, &a, &fp)).abs() < 1e-12);
        prop_assert!(ab <= imp::dp_distance(&a, &x, &fp) + imp::dp_distance(&x, &b, &fp) + 1e-12);
    }

    #[test]
    fn polar_checks_pass(seed in 0u64..10_000) {
        let ps = space(2);
        let fp = fock_form(2);
        let mut rng = rng(seed);
        let u = random_map(&mut rng, &ps, 0.5);
        let parts = imp::polar(&u, &fp).unwrap();
        let r = parts.checks(&u, &fp, 1e-8);
        prop_assert!(r.is_valid(), "{:?}", r.failures().collect::<Vec<_>>());
    }
}

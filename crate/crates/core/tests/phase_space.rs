mod common;

use common::*;
use proptest::prelude::*;
use qfsp::linalg::{c, frob, CMat, CVec};
use qfsp::{Error, PhaseSpace, Presentation};

#[test]
fn standard_presentations_validate() {
    for modes in 1..4 {
        for pres in [Presentation::Diagonal, Presentation::Position] {
            let ps = PhaseSpace::build_standard(modes, pres).unwrap();
            let r = ps.validate(1e-12);
            assert!(r.is_valid(), "{pres:?} {modes}: {:?}", r.failures().collect::<Vec<_>>());
            assert_eq!(ps.dim(), 2 * modes);
            assert_eq!(ps.n_modes(), modes);
        }
    }
}

#[test]
fn broken_involution_is_reported() {
    let ps = space(1);
    let bad = PhaseSpace::new(ps.g().clone(), CMat::identity(2, 2) * c(2.0, 0.0)).unwrap();
    let r = bad.validate(1e-10);
    assert!(!r.is_valid());
    assert!(!r.get("involution").unwrap().passed);
}

#[test]
fn shape_mismatch_is_rejected() {
    let err = PhaseSpace::new(CMat::identity(2, 2), CMat::identity(3, 3)).unwrap_err();
    assert!(matches!(err, Error::InvalidArgument(_)));
}

#[test]
fn json_round_trip() {
    let ps = space(2);
    let text = serde_json::to_string(&ps).unwrap();
    let back: PhaseSpace = serde_json::from_str(&text).unwrap();
    assert_eq!(frob(&(back.g() - ps.g())), 0.0);
    assert_eq!(frob(&(back.c() - ps.c())), 0.0);
}

#[test]
fn dim_field_must_match() {
    let text = r#"{"dim": 4, "G": [[[1,0],[0,0]],[[0,0],[-1,0]]], "C": [[[0,0],[1,0]],[[1,0],[0,0]]]}"#;
    assert!(serde_json::from_str::<PhaseSpace>(text).is_err());
}

#[test]
fn position_presentation_pairs_quadratures() {
    // γ(e_1, e_2) = i for the two coordinate vectors of one mode.
    let ps = PhaseSpace::build_standard(1, Presentation::Position).unwrap();
    let g = ps.gamma(&unit(2, 0), &unit(2, 1));
    assert!((g - c(0.0, 1.0)).norm() < 1e-15);
}

#[test]
fn real_frame_spans_fixed_vectors() {
    for pres in [Presentation::Diagonal, Presentation::Position] {
        let ps = PhaseSpace::build_standard(2, pres).unwrap();
        let w = ps.real_frame();
        for k in 0..ps.dim() {
            let col: CVec = w.column(k).into();
            assert!(ps.is_gamma_fixed(&col, 1e-12));
        }
        assert_eq!(qfsp::linalg::rank(&w, 1e-10), ps.dim());
    }
}

#[test]
fn extension_of_single_vector_is_canonical() {
    let ps = space(2);
    let mut rng = rng(11);
    let f = real_vector(&mut rng, &ps, 1.0);
    let basis = ps.symplectic_extension(&[f]).unwrap();
    assert_eq!(basis.len(), 2);
    assert!(basis.canonical_residual(&ps) < 1e-12);
}

#[test]
fn empty_and_zero_inputs_give_empty_basis() {
    let ps = space(1);
    assert!(ps.symplectic_extension(&[]).unwrap().is_empty());
    assert!(ps.symplectic_extension(&[CVec::zeros(2)]).unwrap().is_empty());
}

#[test]
fn extension_in_position_presentation() {
    let ps = PhaseSpace::build_standard(2, Presentation::Position).unwrap();
    let basis = ps.symplectic_extension(&[unit(4, 0) + unit(4, 2)]).unwrap();
    assert_eq!(basis.len(), 2);
    let pairing = basis.pairing_matrix(&ps);
    assert!((pairing[(0, 1)] - c(0.0, 1.0)).norm() < 1e-12);
    assert!(pairing[(0, 0)].norm() < 1e-12 && pairing[(1, 1)].norm() < 1e-12);
}

#[test]
fn gamma_adjoint_of_symplectic_map_is_inverse() {
    let ps = space(2);
    let mut rng = rng(12);
    let u = random_map(&mut rng, &ps, 0.5);
    let prod = ps.gamma_adjoint(&u.u) * &u.u;
    assert!(frob(&(prod - CMat::identity(4, 4))) < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn extension_is_canonical_for_random_vectors(seed in 0u64..10_000, count in 1usize..5, modes in 1usize..4) {
        let ps = space(modes);
        let mut rng = rng(seed);
        let vs: Vec<CVec> = (0..count.min(2 * modes)).map(|_| real_vector(&mut rng, &ps, 1.0)).collect();
        let basis = ps.symplectic_extension(&vs).unwrap();
        prop_assert!(basis.len().is_multiple_of(2));
        prop_assert!(basis.canonical_residual(&ps) < 1e-9);
        for v in &basis.vectors {
            prop_assert!(ps.is_gamma_fixed(v, 1e-9));
        }
    }

    #[test]
    fn conjugation_is_antilinear_involution(seed in 0u64..10_000) {
        let ps = space(2);
        let mut rng = rng(seed);
        let f = vector(&mut rng, 4, 1.0);
        let twice = ps.conjugate(&ps.conjugate(&f));
        prop_assert!((twice - &f).norm() < 1e-14);
        let z = c(0.3, -0.7);
        let lhs = ps.conjugate(&(&f * z));
        let rhs = ps.conjugate(&f) * z.conj();
        prop_assert!((lhs - rhs).norm() < 1e-14);
    }

    #[test]
    fn gamma_reflects_under_conjugation(seed in 0u64..10_000) {
        // γ(Γf, Γg) = -conj γ(f, g)
        let ps = space(2);
        let mut rng = rng(seed);
        let f = vector(&mut rng, 4, 1.0);
        let g = vector(&mut rng, 4, 1.0);
        let lhs = ps.gamma(&ps.conjugate(&f), &ps.conjugate(&g));
        prop_assert!((lhs + ps.gamma(&f, &g).conj()).norm() < 1e-13);
    }
}

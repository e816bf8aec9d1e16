mod common;

use common::*;
use proptest::prelude::*;
use qfsp::fock::TruncatedFock;
use qfsp::linalg::{c, frob, CMat, CVec};
use qfsp::sp_algebra::{self, basis_hamiltonian, quantize, quantize_with, spanning_set};
use qfsp::Hamiltonian;

fn fock(modes: usize, n: usize) -> TruncatedFock {
    TruncatedFock::new(&fock_form(modes), n).unwrap()
}

#[test]
fn zero_is_valid_and_imaginary_identity_is_not() {
    let ps = space(1);
    assert!(Hamiltonian::zero(2).validate(&ps, 1e-12).is_valid());
    let bad = Hamiltonian::new(CMat::identity(2, 2) * c(0.0, 1.0));
    assert!(!bad.validate(&ps, 1e-12).is_valid());
    let wrong = Hamiltonian::zero(4);
    assert!(!wrong.validate(&ps, 1e-12).is_valid());
}

#[test]
fn projection_is_idempotent() {
    let ps = space(2);
    let mut rng = rng(41);
    let x = CMat::from_fn(4, 4, |_, _| vector(&mut rng, 1, 1.0)[0]);
    let h = Hamiltonian::project(&ps, &x);
    assert!(h.validate(&ps, 1e-12).is_valid());
    let again = Hamiltonian::project(&ps, &h.op);
    assert!(frob(&(again.op - &h.op)) < 1e-14);
}

#[test]
fn basis_hamiltonians_are_hamiltonians() {
    let ps = space(2);
    let fk = fock(2, 2);
    for h in spanning_set(&ps, fk.modes()) {
        assert!(h.validate(&ps, 1e-12).is_valid());
    }
    assert!(basis_hamiltonian(&ps, fk.modes(), 5, 0, 0).is_err());
    assert!(basis_hamiltonian(&ps, fk.modes(), 1, 0, 2).is_err());
}

#[test]
fn spanning_set_spans_random_hamiltonians() {
    let ps = space(2);
    let fk = fock(2, 2);
    let set = spanning_set(&ps, fk.modes());
    assert_eq!(set.len(), 10);
    let mut rng = rng(42);
    for _ in 0..5 {
        let h = Hamiltonian::random(&ps, 1.0, &mut rng);
        assert!(sp_algebra::span_residual(&h, &set) < 1e-10);
    }
}

#[test]
fn quantized_basis_cases() {
    let ps = space(1);
    let fk = fock(1, 8);
    let a = fk.creation(0).matrix;
    let b = fk.annihilation(0).matrix;
    let id = CMat::identity(fk.dim(), fk.dim());
    let q1 = quantize(&fk, &basis_hamiltonian(&ps, fk.modes(), 1, 0, 0).unwrap()).unwrap().matrix;
    assert!(fk.sector_residual(&q1, &(&a * &b * c(2.0, 0.0) + &id), 7) < 1e-12);
    let q2 = quantize(&fk, &basis_hamiltonian(&ps, fk.modes(), 2, 0, 0).unwrap()).unwrap().matrix;
    assert!(fk.sector_residual(&q2, &(&b * &b + &a * &a), 6) < 1e-12);
    let q4 = quantize(&fk, &basis_hamiltonian(&ps, fk.modes(), 4, 0, 0).unwrap()).unwrap().matrix;
    assert!(fk.sector_residual(&q4, &((&a * &a - &b * &b) * c(0.0, 1.0)), 6) < 1e-12);
}

#[test]
fn zero_quantizes_to_zero_and_exponentiates_to_one() {
    let fk = fock(2, 4);
    let q = quantize(&fk, &Hamiltonian::zero(4)).unwrap();
    assert_eq!(frob(&q.matrix), 0.0);
    let u = sp_algebra::implementer(&fk, &Hamiltonian::zero(4)).unwrap();
    assert!(frob(&(u.matrix - CMat::identity(fk.dim(), fk.dim()))) < 1e-14);
}

#[test]
fn quantization_is_independent_of_decomposition() {
    let ps = space(2);
    let fk = fock(2, 5);
    let mut rng = rng(43);
    for _ in 0..4 {
        let h = Hamiltonian::random(&ps, 1.0, &mut rng);
        let a = quantize_with(&fk, &h.rank_decompose(&ps).unwrap()).matrix;
        let b = quantize_with(&fk, &h.rank_decompose_full(&ps).unwrap()).matrix;
        assert!(fk.sector_residual(&a, &b, 3) < 1e-11);
    }
}

#[test]
fn rank_one_pair_decomposes() {
    let ps = space(2);
    let mut rng = rng(44);
    let g = vector(&mut rng, 4, 1.0);
    let h = vector(&mut rng, 4, 1.0);
    let ham = sp_algebra::pair_hamiltonian(&ps, &g, &h);
    assert!(ham.validate(&ps, 1e-12).is_valid());
    let dec = ham.rank_decompose(&ps).unwrap();
    assert!(dec.residual(&ps, &ham.op) < 1e-11);
}

#[test]
fn cyclic_spans() {
    let ps = space(1);
    let fk = fock(1, 6);
    let vac = fk.vacuum();
    assert_eq!(sp_algebra::cyclic_span(&[], &vac, 5), 1);
    let h = basis_hamiltonian(&ps, fk.modes(), 2, 0, 0).unwrap();
    let q = quantize(&fk, &h).unwrap();
    assert_eq!(sp_algebra::cyclic_span(std::slice::from_ref(&q), &vac, 10), 4);
    let mut one = CVec::zeros(fk.dim());
    one[1] = c(1.0, 0.0);
    assert_eq!(sp_algebra::cyclic_span(&[q], &one, 10), 3);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn commutators_quantize_below_cutoff(seed in 0u64..10_000) {
        let ps = space(2);
        let fk = fock(2, 6);
        let mut rng = rng(seed);
        let h1 = Hamiltonian::random(&ps, 0.5, &mut rng);
        let h2 = Hamiltonian::random(&ps, 0.5, &mut rng);
        prop_assert!(sp_algebra::lie_residual(&fk, &h1, &h2, 4).unwrap() < 1e-10);
    }

    #[test]
    fn random_hamiltonians_are_valid(seed in 0u64..10_000, modes in 1usize..4) {
        let ps = space(modes);
        let mut rng = rng(seed);
        let h = Hamiltonian::random(&ps, 2.0, &mut rng);
        prop_assert!(h.validate(&ps, 1e-11).is_valid());
        let dec = h.rank_decompose(&ps).unwrap();
        prop_assert!(dec.residual(&ps, &h.op) < 1e-10);
    }

    #[test]
    fn quantized_hamiltonians_are_hermitian_below_cutoff(seed in 0u64..10_000) {
        let ps = space(2);
        let fk = fock(2, 5);
        let mut rng = rng(seed);
        let q = quantize(&fk, &Hamiltonian::random(&ps, 1.0, &mut rng)).unwrap().matrix;
        prop_assert!(fk.sector_residual(&q, &q.adjoint(), 3) < 1e-11);
    }
}

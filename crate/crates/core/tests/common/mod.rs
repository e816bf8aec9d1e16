#![allow(dead_code)]

use qfsp::implementers::{self, SymplecticMap};
use qfsp::linalg::{c, CMat, CVec};
use qfsp::{Hamiltonian, PhaseSpace, Presentation, QuasifreeForm};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn space(modes: usize) -> PhaseSpace {
    PhaseSpace::build_standard(modes, Presentation::Diagonal).unwrap()
}

pub fn fock_form(modes: usize) -> QuasifreeForm {
    QuasifreeForm::fock(&space(modes)).unwrap()
}

pub fn vector(rng: &mut impl Rng, d: usize, scale: f64) -> CVec {
    CVec::from_fn(d, |_, _| c(rng.random_range(-scale..scale), rng.random_range(-scale..scale)))
}

/// Random Γ-fixed vector with norm at most `radius`.
pub fn real_vector(rng: &mut impl Rng, ps: &PhaseSpace, radius: f64) -> CVec {
    let w = ps.real_frame();
    let d = ps.dim();
    let coeffs = CVec::from_fn(d, |_, _| c(rng.random_range(-1.0..1.0), 0.0));
    let v = &w * coeffs;
    let n = v.norm();
    v * c(radius * rng.random_range(0.2..1.0) / n, 0.0)
}

/// Random map `exp(iH)` with a Hamiltonian of entry scale `scale`.
pub fn random_map(rng: &mut impl Rng, ps: &PhaseSpace, scale: f64) -> SymplecticMap {
    SymplecticMap::exp_hamiltonian(&Hamiltonian::random(ps, scale, rng))
}

/// Random real map on two modes: squeeze, rotation, squeeze.
pub fn real_two_mode_map(rng: &mut impl Rng, r_max: f64) -> SymplecticMap {
    implementers::diagonal_squeeze(4, 0, rng.random_range(-r_max..r_max))
        .compose(&implementers::diagonal_rotation(4, 0, 1, rng.random_range(-3.0..3.0)))
        .compose(&implementers::diagonal_squeeze(4, 1, rng.random_range(-r_max..r_max)))
}

pub fn unit(d: usize, k: usize) -> CVec {
    let mut e = CVec::zeros(d);
    e[k] = c(1.0, 0.0);
    e
}

pub fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

//! Modular data of a quasifree state with `0 < S < 1`, realized on the
//! truncated Fock space of its purification.
//!
//! `H_S = log(S (1 - S)^{-1})` is second quantized on the doubled space as
//! `H_S ⊕ H_S`, which commutes with `P̂` and therefore conserves particle
//! number; `Θ` is that operator with its vacuum expectation removed and
//! `Δ = e^{-Θ}`. The conjugation `J` is the antilinear second quantization
//! of `ω(f ⊕ g) = Γg ⊕ Γf`.

use crate::error::{Error, Result};
use crate::fock::{FockOperator, TruncatedFock};
use crate::linalg::{self, conj, frob, real, CMat, CVec, C64, I};
use crate::quasifree::{DoubledSpace, QuasifreeForm};
use crate::sp_algebra::{self, Hamiltonian};

/// Default distance of the spectrum of `S` from `{0, 1}`.
pub const BOUNDARY_EPS: f64 = 1e-6;

/// `log(S (1 - S)^{-1})`.
pub fn one_particle_modular(f: &QuasifreeForm) -> Result<CMat> {
    one_particle_modular_with(f, BOUNDARY_EPS)
}

pub fn one_particle_modular_with(f: &QuasifreeForm, eps: f64) -> Result<CMat> {
    if let Some(&s) = f.spectrum().0.iter().find(|&&s| s <= eps || s >= 1.0 - eps) {
        return Err(Error::Boundary(format!("S has eigenvalue {s:.3e}")));
    }
    Ok(f.function(|s| real((s / (1.0 - s)).ln())))
}

#[derive(Clone, Debug)]
pub struct ModularData {
    pub doubled: DoubledSpace,
    pub fock: TruncatedFock,
    pub h_s: CMat,
    pub theta: FockOperator,
    pub j: FockOperator,
    /// Residual of `[ω, P̂] = 0`.
    pub omega_commutator: f64,
    /// Residual of `ω` being antiunitary on `P̂K̂`.
    pub omega_antiunitary: f64,
}

impl ModularData {
    pub fn new(f: &QuasifreeForm, cutoff: usize) -> Result<Self> {
        let h_s = one_particle_modular(f)?;
        let doubled = f.double()?;
        let fock = TruncatedFock::new(&doubled.hat_form, cutoff)?;
        let d = f.space().dim();

        let mut k = CMat::zeros(2 * d, 2 * d);
        k.view_mut((0, 0), (d, d)).copy_from(&h_s);
        k.view_mut((d, d), (d, d)).copy_from(&h_s);
        let q = sp_algebra::quantize(&fock, &Hamiltonian::new(k))?.matrix;
        let vac = q[(0, 0)];
        let mut theta = q - CMat::identity(fock.dim(), fock.dim()) * vac;
        // Particle number is conserved exactly; drop round-off between sectors.
        let blocks = fock.number_blocks();
        let mut sector = vec![0usize; fock.dim()];
        for (s, b) in blocks.iter().enumerate() {
            for &i in b {
                sector[i] = s;
            }
        }
        for i in 0..fock.dim() {
            for jdx in 0..fock.dim() {
                if sector[i] != sector[jdx] {
                    theta[(i, jdx)] = C64::new(0.0, 0.0);
                }
            }
        }
        let theta = FockOperator::linear(linalg::hermitian_part(&theta));

        let mut w = CMat::zeros(2 * d, 2 * d);
        w.view_mut((0, d), (d, d)).copy_from(f.space().c());
        w.view_mut((d, 0), (d, d)).copy_from(f.space().c());
        let p = doubled.p_hat();
        let omega_commutator = frob(&(&w * conj(p) - p * &w));
        let r = fock.one_particle_matrix_antilinear(&w);
        let m = r.nrows();
        let omega_antiunitary = frob(&(r.adjoint() * &r - CMat::identity(m, m)));
        if omega_commutator > 1e-10 || omega_antiunitary > 1e-10 {
            return Err(Error::InternalConsistency(format!(
                "ω does not restrict to an antiunitary of P̂K̂ ({omega_commutator:.2e}, {omega_antiunitary:.2e})"
            )));
        }
        let j = fock.second_quantize(&r, true);
        Ok(ModularData { doubled, fock, h_s, theta, j, omega_commutator, omega_antiunitary })
    }

    /// `exp(z Θ)` computed blockwise over particle-number sectors.
    pub fn exp_theta(&self, z: C64) -> FockOperator {
        FockOperator::linear(linalg::expm_hermitian_blocked(&self.theta.matrix, z, &self.fock.number_blocks()))
    }

    /// `Δ^{it} = exp(-itΘ)`.
    pub fn delta_it(&self, t: f64) -> FockOperator {
        self.exp_theta(-I * t)
    }

    /// `Δ^s = exp(-sΘ)` for real `s`.
    pub fn delta_power(&self, s: f64) -> FockOperator {
        self.exp_theta(real(-s))
    }

    /// `B(f ⊕ 0)`.
    pub fn field(&self, f: &CVec) -> FockOperator {
        self.fock.field(&self.doubled.embed(f))
    }

    /// `Q(H ⊕ 0)` for a Hamiltonian on the original space.
    pub fn implementer(&self, h: &Hamiltonian) -> Result<FockOperator> {
        sp_algebra::implementer(&self.fock, &Hamiltonian::new(self.doubled.embed_operator(&h.op)))
    }

    /// `∥J Δ^{1/2} A Ψ - A* Ψ∥`.
    pub fn tomita_residual(&self, a: &FockOperator, a_star: &FockOperator) -> f64 {
        let psi = self.fock.vacuum();
        let lhs = self.j.apply(&self.delta_power(0.5).apply(&a.apply(&psi)));
        linalg::vec_norm(&(lhs - a_star.apply(&psi)))
    }

    /// `|⟨Ψ, A Δ B Ψ⟩ - ⟨Ψ, B A Ψ⟩|`.
    pub fn kms_residual(&self, a: &FockOperator, b: &FockOperator) -> f64 {
        let psi = self.fock.vacuum();
        let lhs = psi.dotc(&a.apply(&self.delta_power(1.0).apply(&b.apply(&psi))));
        let rhs = psi.dotc(&b.apply(&a.apply(&psi)));
        (lhs - rhs).norm()
    }

    /// `∥e^{itΘ} B(f ⊕ 0) Ψ - B(e^{itH_S} f ⊕ 0) Ψ∥`.
    pub fn flow_residual(&self, f: &CVec, t: f64) -> f64 {
        let psi = self.fock.vacuum();
        let lhs = self.delta_it(-t).apply(&self.field(f).apply(&psi));
        let moved = linalg::expm(&(&self.h_s * (I * t))) * f;
        linalg::vec_norm(&(lhs - self.field(&moved).apply(&psi)))
    }

    pub fn identity(&self) -> FockOperator {
        FockOperator::linear(CMat::identity(self.fock.dim(), self.fock.dim()))
    }

    /// `⟨Ψ, A Ψ⟩`.
    pub fn vacuum_expectation(&self, a: &FockOperator) -> C64 {
        let psi = self.fock.vacuum();
        psi.dotc(&a.apply(&psi))
    }
}

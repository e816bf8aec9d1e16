//! Finite-rank Hamiltonians `H` (Γ-odd, γ-self-adjoint), their rank
//! decompositions, and second quantization `q(H) = ½ Σ B(f_j) B(g_j)*`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{FockOperator, TruncatedFock};
use crate::linalg::{self, frob, CMat, CVec, C64, I, ONE};
use crate::phase_space::{BasisSet, PhaseSpace};
use crate::validation::ValidationReport;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Hamiltonian {
    #[serde(with = "crate::io::cmat")]
    pub op: CMat,
}

/// Pairs `(f_j, g_j)` with `H f = Σ_j γ(g_j, f) f_j`.
#[derive(Clone, Debug)]
pub struct RankDecomposition {
    pub pairs: Vec<(CVec, CVec)>,
}

impl RankDecomposition {
    pub fn apply(&self, ps: &PhaseSpace, f: &CVec) -> CVec {
        let mut out = CVec::zeros(f.len());
        for (fj, gj) in &self.pairs {
            out += fj * ps.gamma(gj, f);
        }
        out
    }

    /// Largest column deviation from `H` on the standard basis.
    pub fn residual(&self, ps: &PhaseSpace, h: &CMat) -> f64 {
        let d = ps.dim();
        let mut worst = 0.0f64;
        for k in 0..d {
            let mut e = CVec::zeros(d);
            e[k] = ONE;
            let want = h * &e;
            worst = worst.max(linalg::vec_norm(&(self.apply(ps, &e) - want)));
        }
        worst
    }
}

impl Hamiltonian {
    pub fn new(op: CMat) -> Self {
        Hamiltonian { op }
    }

    pub fn zero(d: usize) -> Self {
        Hamiltonian::new(CMat::zeros(d, d))
    }

    pub fn validate(&self, ps: &PhaseSpace, tol: f64) -> ValidationReport {
        let mut report = ValidationReport::new(tol);
        if self.op.nrows() != ps.dim() || self.op.ncols() != ps.dim() {
            report.push("shape", f64::INFINITY, false);
            return report;
        }
        report.residual("gamma_odd", frob(&(ps.conjugate_operator(&self.op) + &self.op)));
        report.residual("gamma_self_adjoint", frob(&(ps.gamma_adjoint(&self.op) - &self.op)));
        report
    }

    /// Projection of an arbitrary matrix onto the Hamiltonians.
    pub fn project(ps: &PhaseSpace, x: &CMat) -> Hamiltonian {
        let h = (x + ps.gamma_adjoint(x)) * linalg::real(0.5);
        let h = (&h - ps.conjugate_operator(&h)) * linalg::real(0.5);
        Hamiltonian::new(h)
    }

    /// Random Hamiltonian with entries of scale `scale`.
    pub fn random(ps: &PhaseSpace, scale: f64, rng: &mut impl Rng) -> Hamiltonian {
        let d = ps.dim();
        let x = CMat::from_fn(d, d, |_, _| {
            C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)) * scale
        });
        Hamiltonian::project(ps, &x)
    }

    /// Decomposition through a symplectic basis of a subspace containing
    /// the range of `H`.
    pub fn rank_decompose(&self, ps: &PhaseSpace) -> Result<RankDecomposition> {
        let d = ps.dim();
        let scale = linalg::max_abs(&self.op);
        if scale == 0.0 {
            return Ok(RankDecomposition { pairs: Vec::new() });
        }
        let cols: Vec<CVec> = (0..d)
            .map(|k| self.op.column(k).into())
            .filter(|c: &CVec| linalg::vec_norm(c) > 1e-13 * scale)
            .collect();
        let basis = ps.symplectic_extension(&cols)?;
        Ok(self.decompose_in(&basis))
    }

    /// Decomposition through a symplectic basis of all of `K`.
    pub fn rank_decompose_full(&self, ps: &PhaseSpace) -> Result<RankDecomposition> {
        let d = ps.dim();
        let units: Vec<CVec> = (0..d)
            .map(|k| {
                let mut e = CVec::zeros(d);
                e[k] = ONE;
                e
            })
            .rev()
            .collect();
        let basis = ps.symplectic_extension(&units)?;
        Ok(self.decompose_in(&basis))
    }

    fn decompose_in(&self, basis: &BasisSet) -> RankDecomposition {
        let mut pairs = Vec::with_capacity(basis.len());
        for j in 0..basis.len() / 2 {
            let e1 = &basis.vectors[2 * j];
            let e2 = &basis.vectors[2 * j + 1];
            pairs.push((e1 * I, &self.op * e2));
            pairs.push((e2 * (-I), &self.op * e1));
        }
        RankDecomposition { pairs }
    }
}

/// `H_{gh} f = γ(g, f) h + γ(h, f) g + γ(Γg, f) Γh + γ(Γh, f) Γg`.
pub fn pair_hamiltonian(ps: &PhaseSpace, g: &CVec, h: &CVec) -> Hamiltonian {
    let gg = ps.conjugate(g);
    let gh = ps.conjugate(h);
    let gm = ps.g();
    let term = |out: &CVec, along: &CVec| out * (along.adjoint() * gm);
    Hamiltonian::new(term(h, g) + term(g, h) + term(&gh, &gg) + term(&gg, &gh))
}

/// Spanning Hamiltonians `H(e; j, k, l)` built from an orthonormal basis
/// `e` of `PK` (indices 1-based `j`, 0-based `k`, `l`):
///
/// | j | (g, h)          | q(H)                       |
/// |---|-----------------|----------------------------|
/// | 1 | (e_k, e_l)      | B(e_k)B(e_l)* + B(e_l)B(e_k)* + δ_kl |
/// | 2 | (e_k, Γe_l)     | B(e_k)*B(e_l)* + B(e_k)B(e_l) |
/// | 3 | (i e_k, e_l)    | i[B(e_k)B(e_l)* − B(e_l)B(e_k)*] |
/// | 4 | (i e_k, Γe_l)   | i[B(e_k)B(e_l) − B(e_k)*B(e_l)*] |
pub fn basis_hamiltonian(ps: &PhaseSpace, e: &[CVec], j: usize, k: usize, l: usize) -> Result<Hamiltonian> {
    if k >= e.len() || l >= e.len() {
        return Err(Error::InvalidArgument(format!("mode index out of range ({k}, {l}) for {} modes", e.len())));
    }
    let (ek, el) = (&e[k], &e[l]);
    let (g, h) = match j {
        1 => (ek.clone(), el.clone()),
        2 => (ek.clone(), ps.conjugate(el)),
        3 => (ek * I, el.clone()),
        4 => (ek * I, ps.conjugate(el)),
        _ => return Err(Error::InvalidArgument(format!("case j must be 1..=4, got {j}"))),
    };
    Ok(pair_hamiltonian(ps, &g, &h))
}

/// All distinct non-zero spanning Hamiltonians for the given mode basis.
pub fn spanning_set(ps: &PhaseSpace, e: &[CVec]) -> Vec<Hamiltonian> {
    let m = e.len();
    let mut out = Vec::new();
    for j in 1..=4 {
        for k in 0..m {
            for l in k..m {
                if j == 3 && k == l {
                    continue;
                }
                out.push(basis_hamiltonian(ps, e, j, k, l).expect("indices in range"));
            }
        }
    }
    out
}

/// Least-squares residual of writing `h` as a real combination of `set`.
pub fn span_residual(h: &Hamiltonian, set: &[Hamiltonian]) -> f64 {
    let n = h.op.len();
    let a = nalgebra::DMatrix::<f64>::from_fn(2 * n, set.len(), |r, c| {
        let z = set[c].op[r % n];
        if r < n { z.re } else { z.im }
    });
    let b = nalgebra::DVector::<f64>::from_fn(2 * n, |r, _| {
        let z = h.op[r % n];
        if r < n { z.re } else { z.im }
    });
    linalg::real_least_squares(&a, &b).1
}

/// `q(H) = ½ Σ_j B(f_j) B(Γg_j)` from a given decomposition.
pub fn quantize_with(fk: &TruncatedFock, dec: &RankDecomposition) -> FockOperator {
    let ps = fk.form().space();
    let n = fk.dim();
    let mut acc = CMat::zeros(n, n);
    for (f, g) in &dec.pairs {
        acc += fk.field_product(f, &ps.conjugate(g));
    }
    FockOperator::linear(acc * linalg::real(0.5))
}

pub fn quantize(fk: &TruncatedFock, h: &Hamiltonian) -> Result<FockOperator> {
    let dec = h.rank_decompose(fk.form().space())?;
    Ok(quantize_with(fk, &dec))
}

/// `Q(H) = exp(i q(H))`, exponentiated blockwise over the parity sectors.
pub fn implementer(fk: &TruncatedFock, h: &Hamiltonian) -> Result<FockOperator> {
    let q = quantize(fk, h)?;
    Ok(exp_i(fk, &q.matrix, ONE))
}

/// `exp(i t A)` for an operator that is hermitian up to truncation, using
/// the exact parity invariance of quadratic generators.
pub fn exp_i(fk: &TruncatedFock, a: &CMat, t: C64) -> FockOperator {
    let h = linalg::hermitian_part(a);
    FockOperator::linear(linalg::expm_hermitian_blocked(&h, I * t, &fk.parity_blocks()))
}

/// `∥i[q(H), q(H')] − q(i[H, H'])∥` on sector `≤ N − slack`.
pub fn lie_residual(fk: &TruncatedFock, h1: &Hamiltonian, h2: &Hamiltonian, slack: usize) -> Result<f64> {
    let q1 = quantize(fk, h1)?.matrix;
    let q2 = quantize(fk, h2)?.matrix;
    let lhs = (&q1 * &q2 - &q2 * &q1) * I;
    let bracket = Hamiltonian::new((&h1.op * &h2.op - &h2.op * &h1.op) * I);
    let rhs = quantize(fk, &bracket)?.matrix;
    Ok(fk.sector_residual(&lhs, &rhs, fk.cutoff().saturating_sub(slack)))
}

/// Dimension of the span of all words of length `≤ degree` in the
/// generators applied to `v`.
pub fn cyclic_span(generators: &[FockOperator], v: &CVec, degree: usize) -> usize {
    let tol = 1e-10 * linalg::vec_norm(v).max(1.0);
    let mut basis: Vec<CVec> = Vec::new();
    let push = |basis: &mut Vec<CVec>, w: CVec| -> Option<CVec> {
        let mut w = w;
        for _ in 0..2 {
            for b in basis.iter() {
                let p = b.dotc(&w);
                w -= b * p;
            }
        }
        let n = linalg::vec_norm(&w);
        if n > tol {
            let u = w / linalg::real(n);
            basis.push(u.clone());
            Some(u)
        } else {
            None
        }
    };
    let mut frontier: Vec<CVec> = push(&mut basis, v.clone()).into_iter().collect();
    for _ in 0..degree {
        let mut next = Vec::new();
        for w in &frontier {
            for g in generators {
                if let Some(u) = push(&mut basis, g.apply(w)) {
                    next.push(u);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        frontier = next;
    }
    basis.len()
}

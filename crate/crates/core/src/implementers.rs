//! Bogoliubov maps between basis projections and their Fock implementers.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fock::{FockOperator, TruncatedFock};
use crate::linalg::{self, frob, inverse, real, CMat, C64, I, ONE, ZERO};
use crate::phase_space::PhaseSpace;
use crate::quasifree::QuasifreeForm;
use crate::sp_algebra::{self, Hamiltonian};
use crate::validation::ValidationReport;

/// Relative clamp for tiny negative eigenvalues of `-(S - S')²`.
pub const THETA_CLAMP: f64 = 1e-12;

/// Invertible map preserving `γ` and commuting with `Γ`.
#[derive(Clone, Debug, Serialize, serde::Deserialize)]
#[serde(transparent)]
pub struct SymplecticMap {
    #[serde(with = "crate::io::cmat")]
    pub u: CMat,
}

impl SymplecticMap {
    pub fn new(u: CMat) -> Self {
        SymplecticMap { u }
    }

    pub fn identity(d: usize) -> Self {
        SymplecticMap::new(CMat::identity(d, d))
    }

    pub fn validate(&self, ps: &PhaseSpace, tol: f64) -> ValidationReport {
        let mut r = ValidationReport::new(tol);
        if self.u.nrows() != ps.dim() || self.u.ncols() != ps.dim() {
            r.push("shape", f64::INFINITY, false);
            return r;
        }
        r.residual("preserves_gamma", frob(&(self.u.adjoint() * ps.g() * &self.u - ps.g())));
        r.residual("commutes_with_conjugation", frob(&(ps.conjugate_operator(&self.u) - &self.u)));
        r
    }

    /// `exp(iH)` for a Hamiltonian `H`.
    pub fn exp_hamiltonian(h: &Hamiltonian) -> Self {
        SymplecticMap::new(linalg::expm(&(&h.op * I)))
    }

    pub fn compose(&self, other: &SymplecticMap) -> SymplecticMap {
        SymplecticMap::new(&self.u * &other.u)
    }

    pub fn inverse(&self, ps: &PhaseSpace) -> SymplecticMap {
        SymplecticMap::new(ps.gamma_adjoint(&self.u))
    }
}

fn same_space(f: &QuasifreeForm, g: &QuasifreeForm) -> Result<()> {
    if frob(&(f.space().g() - g.space().g())) > 1e-12 || frob(&(f.space().c() - g.space().c())) > 1e-12 {
        return Err(Error::InvalidArgument("forms live on different phase spaces".into()));
    }
    Ok(())
}

/// Spectral data of `A = -(S - S')²` in the frame of `S`.
struct ThetaSpectrum {
    a: CMat,
}

fn theta_data(f: &QuasifreeForm, f2: &QuasifreeForm) -> Result<ThetaSpectrum> {
    same_space(f, f2)?;
    let diff = f.s_op() - f2.s_op();
    let a = -(&diff * &diff);
    let frame = f.frame();
    let scale = linalg::max_abs(&a).max(1.0);
    let sa = frame.self_adjoint_residual(&a);
    if sa > 1e-8 * scale {
        return Err(Error::Geometry(format!("-(S - S')² is not S-self-adjoint (residual {sa:.3e})")));
    }
    let (vals, _) = frame.spectrum(&a);
    let lo = vals.first().copied().unwrap_or(0.0);
    if lo < -THETA_CLAMP * scale {
        return Err(Error::Geometry(format!("-(S - S')² has negative eigenvalue {lo:.3e}")));
    }
    Ok(ThetaSpectrum { a })
}

/// `θ(S, S') = arcsinh sqrt(-(S - S')²)`.
pub fn theta(f: &QuasifreeForm, f2: &QuasifreeForm) -> Result<CMat> {
    let t = theta_data(f, f2)?;
    Ok(f.frame().function(&t.a, |x| real(x.max(0.0).sqrt().asinh())))
}

/// Eigenvalues of `θ(S, S')` restricted to the range of `S`.
pub fn theta_spectrum(f: &QuasifreeForm, f2: &QuasifreeForm) -> Result<Vec<f64>> {
    let th = theta(f, f2)?;
    let basis = linalg::metric_orthonormalize(f.gram(), f.s_op(), 1e-8);
    let b = linalg::columns_to_matrix(f.space().dim(), &basis);
    let small = b.adjoint() * f.gram() * th * &b;
    let (vals, _) = linalg::eigh(&small);
    Ok(vals.into_iter().map(|x| x.max(0.0)).collect())
}

/// `U(S/S')` and its generator `H(S/S') = -iθ(u₁₂ + u₂₁)`, so that
/// `U = exp(iH)` and `U† S U = S'`.
pub fn bogoliubov_u(f: &QuasifreeForm, f2: &QuasifreeForm) -> Result<(SymplecticMap, Hamiltonian)> {
    let t = theta_data(f, f2)?;
    let frame = f.frame();
    let th = frame.function(&t.a, |x| real(x.max(0.0).sqrt().asinh()));
    let pinv = frame.function(&t.a, |x| {
        let s = x.max(0.0).sqrt();
        if s <= 1e-12 {
            real(0.0)
        } else {
            real(1.0 / (s * (1.0 + x).sqrt()))
        }
    });
    let d = f.space().dim();
    let id = CMat::identity(d, d);
    let s = f.s_op();
    let s2 = f2.s_op();
    let a_scale = linalg::max_abs(&t.a).max(1.0);
    let kernel = frame.function(&t.a, |x| if x.max(0.0).sqrt() <= 1e-12 { ONE } else { ZERO });
    let num12 = s * s2 * (&id - s);
    let num21 = (&id - s) * s2 * s;
    let leak = frob(&(&kernel * &num12)).max(frob(&(&kernel * &num21)));
    if leak > 1e-8 * a_scale {
        return Err(Error::Geometry(format!("numerator does not vanish on ker θ ({leak:.3e})")));
    }
    let u12 = &pinv * num12;
    let u21 = -(&pinv * num21);
    let h = Hamiltonian::new(&th * (u12 + u21) * (-I));
    Ok((SymplecticMap::exp_hamiltonian(&h), h))
}

/// `∥U† S U - S'∥`.
pub fn intertwining_residual(f: &QuasifreeForm, f2: &QuasifreeForm, u: &SymplecticMap) -> f64 {
    let ps = f.space();
    frob(&(ps.gamma_adjoint(&u.u) * f.s_op() * &u.u - f2.s_op()))
}

/// `T(S, S') = exp(-i q(H(S/S')))`, which satisfies `T* B(f) T = B(U f)`.
pub fn implement_t(fk: &TruncatedFock, f2: &QuasifreeForm) -> Result<FockOperator> {
    let f = fk.form();
    if !f2.is_projection(1e-8) {
        return Err(Error::NotAProjection);
    }
    let (_, h) = bogoliubov_u(f, f2)?;
    let q = sp_algebra::quantize(fk, &h)?;
    Ok(sp_algebra::exp_i(fk, &q.matrix, -ONE))
}

/// `det_{SK} (cosh θ)^{-1/2}`.
pub fn vacuum_overlap(f: &QuasifreeForm, f2: &QuasifreeForm) -> Result<f64> {
    let t = theta_data(f, f2)?;
    let x = f.frame().function(&t.a, |x| real((1.0 + x.max(0.0)).powf(-0.25)));
    let basis = linalg::metric_orthonormalize(f.gram(), f.s_op(), 1e-8);
    Ok(linalg::det_on_subspace(f.gram(), &x, &basis).re)
}

/// Probability mass beyond the cutoff of the vacuum of `S'` in the Fock
/// space of `S`, bounded by the per-mode squeezed-vacuum tails.
pub fn truncation_tail(f: &QuasifreeForm, f2: &QuasifreeForm, cutoff: usize) -> Result<f64> {
    let rs = theta_spectrum(f, f2)?;
    let m = rs.len().max(1);
    let per_mode = cutoff / m;
    Ok(rs.iter().map(|&r| squeezed_tail(r, per_mode)).sum())
}

/// `1 - Σ_{2n ≤ N} |⟨2n | r⟩|²` for the one-mode squeezed vacuum.
pub fn squeezed_tail(r: f64, cutoff: usize) -> f64 {
    let t2 = r.tanh().powi(2);
    let mut p = 1.0 / r.cosh();
    let mut kept = 0.0;
    let mut n = 0usize;
    while 2 * n <= cutoff {
        kept += p;
        n += 1;
        // ratio of (2n)!/(4^n n!²) terms
        p *= t2 * ((2 * n - 1) as f64) / ((2 * n) as f64);
    }
    (1.0 - kept).max(0.0)
}

/// Parts `U = positive · rotation` with `rotation` commuting with `P`.
#[derive(Clone, Debug)]
pub struct PolarParts {
    pub positive: SymplecticMap,
    pub rotation: SymplecticMap,
    pub transported: QuasifreeForm,
    pub theta: CMat,
}

pub fn polar(u: &SymplecticMap, fp: &QuasifreeForm) -> Result<PolarParts> {
    let ps = fp.space();
    let f2 = fp.transform(&u.u)?;
    let (upp, _) = bogoliubov_u(fp, &f2)?;
    let positive = SymplecticMap::new(ps.gamma_adjoint(&upp.u));
    let rotation = SymplecticMap::new(&upp.u * &u.u);
    let theta = theta(fp, &f2)?;
    Ok(PolarParts { positive, rotation, transported: f2, theta })
}

impl PolarParts {
    pub fn checks(&self, u: &SymplecticMap, fp: &QuasifreeForm, tol: f64) -> ValidationReport {
        let ps = fp.space();
        let p = fp.s_op();
        let gp = fp.gram();
        let d = ps.dim();
        let id = CMat::identity(d, d);
        let mut r = ValidationReport::new(tol);
        let rot = &self.rotation.u;
        let pos = &self.positive.u;
        r.residual("recompose", frob(&(pos * rot - &u.u)));
        r.residual("rotation_commutes", frob(&(rot * p - p * rot)));
        r.residual("rotation_unitary", frob(&(rot.adjoint() * gp * rot - gp)));
        let gpos = gp * pos;
        r.residual("positive_self_adjoint", frob(&(&gpos - gpos.adjoint())));
        let (vals, _) = linalg::eigh(&gpos);
        let lo = vals.first().copied().unwrap_or(0.0);
        r.push("positive_definite", lo.min(0.0).abs(), lo > 0.0);
        let sinh2 = fp.frame().function(&(&self.theta * &self.theta), |x| real(x.max(0.0).sqrt().sinh().powi(2)));
        let corner = p * &u.u * (&id - p) * ps.gamma_adjoint(&u.u) * p;
        r.residual("corner_identity", frob(&(corner + sinh2 * p)));
        r
    }
}

/// `d_P(A, B) = ∥A - B∥ + ∥P (A - B)(1 - P)∥_HS` in the metric of `P`.
pub fn dp_distance(a: &SymplecticMap, b: &SymplecticMap, fp: &QuasifreeForm) -> f64 {
    let d = a.u.nrows();
    let diff = &a.u - &b.u;
    let p = fp.s_op();
    let corner = p * &diff * (CMat::identity(d, d) - p);
    fp.frame().operator_norm(&diff) + fp.frame().hs_norm_sq(&corner).sqrt()
}

/// `∥P U (1 - P)∥_HS`.
pub fn corner_hs(u: &SymplecticMap, fp: &QuasifreeForm) -> f64 {
    let d = u.u.nrows();
    let p = fp.s_op();
    fp.frame().hs_norm_sq(&(p * &u.u * (CMat::identity(d, d) - p))).sqrt()
}

/// `2 {1 - exp(-¼ ∥P U (1 - P)∥_HS)}`.
pub fn continuity_bound(u: &SymplecticMap, fp: &QuasifreeForm) -> f64 {
    2.0 * (1.0 - (-0.25 * corner_hs(u, fp)).exp())
}

/// `λ · T(P, P') · T_P(R(U))`.
pub fn metaplectic(fk: &TruncatedFock, u: &SymplecticMap, lambda: C64) -> Result<FockOperator> {
    let parts = polar(u, fk.form())?;
    let t = implement_t(fk, &parts.transported)?;
    let r = fk.one_particle_matrix(&parts.rotation.u);
    let tr = fk.second_quantize(&r, false).matrix;
    // T_P(R) preserves each number sector, so multiply blockwise.
    let n = fk.dim();
    let mut out = CMat::zeros(n, n);
    for block in fk.number_blocks() {
        let k = block.len();
        let rb = CMat::from_fn(k, k, |a, b| tr[(block[a], block[b])]);
        let tb = CMat::from_fn(n, k, |i, b| t.matrix[(i, block[b])]);
        let prod = tb * rb;
        for (b, &col) in block.iter().enumerate() {
            out.set_column(col, &prod.column(b));
        }
    }
    Ok(FockOperator::linear(out * lambda))
}

#[derive(Clone, Debug, Serialize)]
pub struct CocycleEstimate {
    pub raw: [f64; 2],
    /// `±1` when the estimate is real and unimodular within tolerance.
    pub sign: Option<i8>,
}

/// Estimate `λ` in `Q(U₁) Q(U₂) = λ Q(U₁ U₂)` by least squares over the
/// columns of sector `≤ N - slack`.
pub fn cocycle(
    fk: &TruncatedFock,
    u1: &SymplecticMap,
    u2: &SymplecticMap,
    slack: usize,
    tol: f64,
) -> Result<CocycleEstimate> {
    let q1 = metaplectic(fk, u1, ONE)?;
    let q2 = metaplectic(fk, u2, ONE)?;
    let q12 = metaplectic(fk, &u1.compose(u2), ONE)?;
    cocycle_from(fk, &q1, &q2, &q12, slack, tol)
}

/// [`cocycle`] from precomputed `Q(U₁)`, `Q(U₂)` and `Q(U₁U₂)`.
pub fn cocycle_from(
    fk: &TruncatedFock,
    q1: &FockOperator,
    q2: &FockOperator,
    q12: &FockOperator,
    slack: usize,
    tol: f64,
) -> Result<CocycleEstimate> {
    let cols = fk.low_sector(fk.cutoff().saturating_sub(slack));
    let mut num = ZERO;
    let mut den = 0.0;
    for &j in &cols {
        let prod = &q1.matrix * q2.matrix.column(j);
        for i in 0..fk.dim() {
            let a = q12.matrix[(i, j)];
            num += a.conj() * prod[i];
            den += a.norm_sqr();
        }
    }
    if den < 1e-12 {
        return Err(Error::Inconclusive("low-sector entries of Q(U₁U₂) vanish".into()));
    }
    let lambda = num / den;
    let sign = if (lambda.norm() - 1.0).abs() <= tol && lambda.im.abs() <= tol {
        Some(if lambda.re > 0.0 { 1 } else { -1 })
    } else {
        None
    };
    Ok(CocycleEstimate { raw: [lambda.re, lambda.im], sign })
}

/// One-mode squeeze `[[cosh r, sinh r], [sinh r, cosh r]]` on mode `k` of
/// a diagonal-presentation space of dimension `d`.
pub fn diagonal_squeeze(d: usize, k: usize, r: f64) -> SymplecticMap {
    let mut u = CMat::identity(d, d);
    let (a, b) = (2 * k, 2 * k + 1);
    u[(a, a)] = real(r.cosh());
    u[(b, b)] = real(r.cosh());
    u[(a, b)] = real(r.sinh());
    u[(b, a)] = real(r.sinh());
    SymplecticMap::new(u)
}

/// Two-mode real rotation mixing modes `k` and `l` (diagonal presentation).
pub fn diagonal_rotation(d: usize, k: usize, l: usize, phi: f64) -> SymplecticMap {
    let mut u = CMat::identity(d, d);
    let (c, s) = (phi.cos(), phi.sin());
    for off in 0..2 {
        let (a, b) = (2 * k + off, 2 * l + off);
        u[(a, a)] = real(c);
        u[(b, b)] = real(c);
        u[(a, b)] = real(-s);
        u[(b, a)] = real(s);
    }
    SymplecticMap::new(u)
}

/// One-mode phase `e^{iφ}` on mode `k` (diagonal presentation).
pub fn diagonal_phase(d: usize, k: usize, phi: f64) -> SymplecticMap {
    let mut u = CMat::identity(d, d);
    u[(2 * k, 2 * k)] = C64::from_polar(1.0, phi);
    u[(2 * k + 1, 2 * k + 1)] = C64::from_polar(1.0, -phi);
    SymplecticMap::new(u)
}

pub fn inverse_map(u: &SymplecticMap) -> Result<SymplecticMap> {
    Ok(SymplecticMap::new(inverse(&u.u)?))
}

//! Quasifree forms `S(f, g) = f* Σ g`, the operator they induce, the doubled
//! Fock form `P̂` that purifies them, and their n-point moments.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    self, conj, form, frob, inverse, real, CMat, CVec, MetricFrame, C64, ONE, ZERO,
};
use crate::phase_space::PhaseSpace;
use crate::validation::ValidationReport;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FormKind {
    BasisProjection,
    Mixed,
    Invalid,
}

#[derive(Clone, Debug, Serialize)]
pub struct FormReport {
    pub report: ValidationReport,
    pub kind: FormKind,
}

impl FormReport {
    pub fn is_valid(&self) -> bool {
        self.report.is_valid()
    }
}

/// Default tolerance for refusing eigenvalues of `S` near `1/2`.
pub const HALF_TOL: f64 = 1e-9;

/// A quasifree form whose Gram matrix `G_S` is positive definite.
///
/// Construction computes `G_S`, the operator `S = G_S^{-1} Σ` and its
/// spectral data once. Algebraic validity is checked by [`Self::validate`].
#[derive(Clone, Debug)]
pub struct QuasifreeForm {
    space: PhaseSpace,
    sigma: CMat,
    g_s: CMat,
    s_op: CMat,
    frame: MetricFrame,
    eigvals: Vec<f64>,
    eigvecs: CMat,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RawForm {
    pub space: PhaseSpace,
    #[serde(rename = "Sigma", with = "crate::io::cmat")]
    pub sigma: CMat,
}

impl Serialize for QuasifreeForm {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        RawForm { space: self.space.clone(), sigma: self.sigma.clone() }.serialize(s)
    }
}

/// `Cᵀ conj(Σ) conj(C)`, the matrix of `(f, g) ↦ S(Γg, Γf)`.
pub fn reflected(space: &PhaseSpace, sigma: &CMat) -> CMat {
    space.c().transpose() * conj(sigma) * conj(space.c())
}

/// Validate a candidate `Σ` without requiring it to define a form.
pub fn validate_form(space: &PhaseSpace, sigma: &CMat, tol: f64) -> FormReport {
    let mut report = ValidationReport::new(tol);
    let refl = reflected(space, sigma);
    report.residual("hermitian", frob(&(sigma - sigma.adjoint())));
    let (svals, _) = linalg::eigh(sigma);
    let min_sigma = svals.first().copied().unwrap_or(0.0);
    let top = svals.last().copied().unwrap_or(0.0).abs().max(1.0);
    report.push("positive", min_sigma.min(0.0).abs(), min_sigma >= -tol * top);
    report.residual("defining_relation", frob(&(sigma - &refl - space.g())));

    let g_s = sigma + &refl;
    let (gvals, _) = linalg::eigh(&g_s);
    let gmin = gvals.first().copied().unwrap_or(0.0);
    let gtop = gvals.last().copied().unwrap_or(0.0).abs().max(1.0);
    let pd = gmin > tol * gtop;
    report.push("gram_positive_definite", gmin, pd);
    if !pd || !report.is_valid() {
        return FormReport { report, kind: FormKind::Invalid };
    }
    let form = match QuasifreeForm::new(space.clone(), sigma.clone()) {
        Ok(f) => f,
        Err(_) => return FormReport { report, kind: FormKind::Invalid },
    };
    let lo = form.eigvals.first().copied().unwrap_or(0.0);
    let hi = form.eigvals.last().copied().unwrap_or(0.0);
    report.push("spectrum_in_unit_interval", (-lo).max(hi - 1.0).max(0.0), lo >= -tol && hi <= 1.0 + tol);

    let d = space.dim();
    let id = CMat::identity(d, d);
    let refl_s = space.conjugate_operator(&form.s_op);
    report.residual("gamma_reflection", frob(&(&refl_s - (&id - &form.s_op))));
    report.residual("gamma_s", frob(&(&form.g_s * form.gamma_s() - space.g())));
    report.residual("s_self_adjoint", form.frame.self_adjoint_residual(&form.s_op));

    let kind = if !report.is_valid() {
        FormKind::Invalid
    } else if form.eigvals.iter().all(|&s| s.abs() <= tol.sqrt() || (s - 1.0).abs() <= tol.sqrt()) {
        FormKind::BasisProjection
    } else {
        FormKind::Mixed
    };
    FormReport { report, kind }
}

impl QuasifreeForm {
    pub fn new(space: PhaseSpace, sigma: CMat) -> Result<Self> {
        let d = space.dim();
        if sigma.nrows() != d || sigma.ncols() != d {
            return Err(Error::InvalidArgument("Sigma has wrong shape".into()));
        }
        let sigma = linalg::hermitian_part(&sigma);
        let g_s = linalg::hermitian_part(&(&sigma + reflected(&space, &sigma)));
        let frame = MetricFrame::new(&g_s)?;
        let s_op = inverse(&g_s)? * &sigma;
        let (eigvals, eigvecs) = frame.spectrum(&s_op);
        Ok(QuasifreeForm { space, sigma, g_s, s_op, frame, eigvals, eigvecs })
    }

    /// Parse and construct; algebraic validity is left to the caller.
    pub fn from_raw(raw: RawForm) -> Result<Self> {
        QuasifreeForm::new(raw.space, raw.sigma)
    }

    pub fn space(&self) -> &PhaseSpace {
        &self.space
    }

    pub fn sigma(&self) -> &CMat {
        &self.sigma
    }

    pub fn validate(&self, tol: f64) -> FormReport {
        validate_form(&self.space, &self.sigma, tol)
    }

    /// `S(f, g)`.
    pub fn value(&self, f: &CVec, g: &CVec) -> C64 {
        form(&self.sigma, f, g)
    }

    pub fn gram(&self) -> &CMat {
        &self.g_s
    }

    pub fn s_op(&self) -> &CMat {
        &self.s_op
    }

    pub fn frame(&self) -> &MetricFrame {
        &self.frame
    }

    /// `γ_S = 2S - 1`.
    pub fn gamma_s(&self) -> CMat {
        let d = self.space.dim();
        &self.s_op * real(2.0) - CMat::identity(d, d)
    }

    /// `(S, G_S, γ_S)`.
    pub fn s_operator(&self) -> (CMat, CMat, CMat) {
        (self.s_op.clone(), self.g_s.clone(), self.gamma_s())
    }

    /// Ascending spectrum of `S` and `G_S`-orthonormal eigenvectors.
    pub fn spectrum(&self) -> (&[f64], &CMat) {
        (&self.eigvals, &self.eigvecs)
    }

    pub fn is_projection(&self, tol: f64) -> bool {
        self.eigvals.iter().all(|&s| s.abs() <= tol || (s - 1.0).abs() <= tol)
    }

    /// Apply a real function to `S` through its `G_S`-self-adjoint spectrum.
    pub fn function(&self, f: impl Fn(f64) -> C64) -> CMat {
        let v = &self.eigvecs;
        let dvals = CVec::from_iterator(self.eigvals.len(), self.eigvals.iter().map(|&s| f(s)));
        v * CMat::from_diagonal(&dvals) * v.adjoint() * &self.g_s
    }

    /// G_S-orthogonal spectral projectors of `S` for `{0}`, `{1}` and `(0, 1)`.
    pub fn spectral_split(&self, tol: f64) -> (CMat, CMat, CMat) {
        let e0 = self.function(|s| if s.abs() <= tol { ONE } else { ZERO });
        let e1 = self.function(|s| if (s - 1.0).abs() <= tol { ONE } else { ZERO });
        let mid = self.function(|s| if s.abs() > tol && (s - 1.0).abs() > tol { ONE } else { ZERO });
        (e0, e1, mid)
    }

    fn check_half(&self, tol: f64) -> Result<()> {
        match self.eigvals.iter().find(|&&s| (s - 0.5).abs() <= tol) {
            Some(&s) => Err(Error::SpectralSingularity { eigenvalue: s }),
            None => Ok(()),
        }
    }

    /// `χ(S) = artanh(2 sqrt(S(1 - S)))`.
    pub fn chi(&self) -> Result<CMat> {
        self.chi_with(HALF_TOL)
    }

    pub fn chi_with(&self, tol: f64) -> Result<CMat> {
        self.check_half(tol)?;
        Ok(self.function(|s| real((2.0 * (s * (1.0 - s)).max(0.0).sqrt()).min(1.0).atanh())))
    }

    /// `ρ(S) = sign(2S - 1)`.
    pub fn rho(&self) -> Result<CMat> {
        self.rho_with(HALF_TOL)
    }

    pub fn rho_with(&self, tol: f64) -> Result<CMat> {
        self.check_half(tol)?;
        Ok(self.function(|s| if s > 0.5 { ONE } else { -ONE }))
    }

    /// Transport by a Bogoliubov map: `S'(f, g) = S(U^{-1} f, U^{-1} g)`,
    /// so that `S'_op = U S U^{-1}`.
    pub fn transform(&self, u: &CMat) -> Result<QuasifreeForm> {
        let u_inv = inverse(u)?;
        let sigma = u_inv.adjoint() * &self.sigma * &u_inv;
        QuasifreeForm::new(self.space.clone(), sigma)
    }

    /// Thermal form with occupation `ν_k` on the `k`-th standard mode `v_k`:
    /// `S(v_k, v_k) = 1 + ν_k` and `S(Γv_k, Γv_k) = ν_k`.
    pub fn thermal(space: &PhaseSpace, nus: &[f64]) -> Result<QuasifreeForm> {
        let modes = standard_modes(space)?;
        if nus.len() != modes.len() {
            return Err(Error::InvalidArgument(format!(
                "expected {} occupation numbers, got {}",
                modes.len(),
                nus.len()
            )));
        }
        if nus.iter().any(|&n| !n.is_finite() || n < 0.0) {
            return Err(Error::InvalidArgument("occupation numbers must be finite and >= 0".into()));
        }
        let d = space.dim();
        let mut sigma = CMat::zeros(d, d);
        for (v, &nu) in modes.iter().zip(nus) {
            let gv = space.g() * v;
            let w = space.conjugate(v);
            let gw = space.g() * &w;
            sigma += &gv * gv.adjoint() * real(1.0 + nu) + &gw * gw.adjoint() * real(nu);
        }
        QuasifreeForm::new(space.clone(), sigma)
    }

    /// The Fock form of the standard presentation.
    pub fn fock(space: &PhaseSpace) -> Result<QuasifreeForm> {
        QuasifreeForm::thermal(space, &vec![0.0; space.n_modes()])
    }

    /// Build the doubled space and its Fock form.
    pub fn double(&self) -> Result<DoubledSpace> {
        DoubledSpace::new(self.clone())
    }

    /// n-point function `φ(B(f_1) … B(f_k))` as a sum over pairings.
    pub fn moment(&self, vectors: &[CVec]) -> C64 {
        self.moment_with_count(vectors).0
    }

    /// Moment together with the number of pairings summed.
    pub fn moment_with_count(&self, vectors: &[CVec]) -> (C64, usize) {
        if vectors.len() % 2 == 1 {
            return (ZERO, 0);
        }
        let k = vectors.len();
        let mut two = CMat::zeros(k, k);
        for i in 0..k {
            let gi = self.space.conjugate(&vectors[i]);
            for j in (i + 1)..k {
                two[(i, j)] = self.value(&gi, &vectors[j]);
            }
        }
        let mut total = ZERO;
        let mut count = 0;
        for pairing in pairings(k) {
            total += pairing.iter().fold(ONE, |acc, &(i, j)| acc * two[(i, j)]);
            count += 1;
        }
        (total, count)
    }

    /// Real-linear basis of the Γ-fixed vectors `f` with `(f, γ_S g)_S = 0`
    /// for all `g` in `l`.
    pub fn symplectic_complement(&self, l: &[CVec]) -> Result<Vec<CVec>> {
        let frame = self.space.real_frame();
        let d = self.space.dim();
        let pairing = &self.g_s * self.gamma_s();
        let wt = frame.adjoint() * &pairing;
        // (f, γ_S g)_S for f = W c is c^T (W* G_S γ_S g), purely imaginary for Γ-fixed f, g.
        let mut rows = DMatrix::<f64>::zeros(l.len().max(1), d);
        for (r, g) in l.iter().enumerate() {
            if !self.space.is_gamma_fixed(g, 1e-10) {
                return Err(Error::InvalidArgument(format!("vector {r} is not Γ-fixed")));
            }
            let v = &wt * g;
            for k in 0..d {
                rows[(r, k)] = v[k].im;
            }
        }
        if l.is_empty() {
            return Ok((0..d).map(|k| frame.column(k).into()).collect());
        }
        let svd = rows.svd(false, true);
        let vt = svd.v_t.expect("requested V^T");
        let top = svd.singular_values.iter().cloned().fold(0.0, f64::max);
        let mut sv: Vec<f64> = svd.singular_values.iter().cloned().collect();
        sv.resize(d, 0.0);
        let mut out = Vec::new();
        let full_vt = if vt.nrows() == d { vt } else { complete_rows(&vt, d) };
        for k in 0..d {
            if sv[k] <= 1e-10 * top.max(1.0) {
                let c: DVector<f64> = full_vt.row(k).transpose();
                out.push(&frame * c.map(|x| C64::new(x, 0.0)));
            }
        }
        Ok(out)
    }
}

/// Extend orthonormal rows to an orthonormal basis of `R^d`.
fn complete_rows(vt: &DMatrix<f64>, d: usize) -> DMatrix<f64> {
    let mut rows: Vec<DVector<f64>> = (0..vt.nrows()).map(|i| vt.row(i).transpose()).collect();
    for k in 0..d {
        if rows.len() == d {
            break;
        }
        let mut e = DVector::zeros(d);
        e[k] = 1.0;
        for _ in 0..2 {
            for r in &rows {
                let p = r.dot(&e);
                e -= r * p;
            }
        }
        let n = e.norm();
        if n > 1e-8 {
            rows.push(e / n);
        }
    }
    let mut m = DMatrix::zeros(d, d);
    for (i, r) in rows.iter().enumerate() {
        m.set_row(i, &r.transpose());
    }
    m
}

/// Per-mode vectors `v_k` with `γ(v_k, v_k) = 1` for the two standard
/// presentations, detected from the matrices.
pub fn standard_modes(space: &PhaseSpace) -> Result<Vec<CVec>> {
    use crate::phase_space::Presentation;
    let n = space.n_modes();
    let d = space.dim();
    for pres in [Presentation::Diagonal, Presentation::Position] {
        let std = PhaseSpace::build_standard(n, pres)?;
        if frob(&(std.g() - space.g())) == 0.0 && frob(&(std.c() - space.c())) == 0.0 {
            let h = std::f64::consts::FRAC_1_SQRT_2;
            return Ok((0..n)
                .map(|k| {
                    let mut v = CVec::zeros(d);
                    match pres {
                        Presentation::Diagonal => v[2 * k] = ONE,
                        Presentation::Position => {
                            v[2 * k] = real(h);
                            v[2 * k + 1] = C64::new(0.0, -h);
                        }
                    }
                    v
                })
                .collect());
        }
    }
    Err(Error::InvalidArgument("space is not in a standard presentation".into()))
}

/// All perfect matchings of `0..k` as lists of `(i, j)` with `i < j`,
/// generated by pairing the first free index with each later one.
pub fn pairings(k: usize) -> Vec<Vec<(usize, usize)>> {
    fn rec(free: &[usize], acc: &mut Vec<(usize, usize)>, out: &mut Vec<Vec<(usize, usize)>>) {
        if free.is_empty() {
            out.push(acc.clone());
            return;
        }
        let first = free[0];
        for idx in 1..free.len() {
            let partner = free[idx];
            let rest: Vec<usize> = free[1..].iter().copied().filter(|&x| x != partner).collect();
            acc.push((first, partner));
            rec(&rest, acc, out);
            acc.pop();
        }
    }
    let mut out = Vec::new();
    if k.is_multiple_of(2) {
        let free: Vec<usize> = (0..k).collect();
        rec(&free, &mut Vec::new(), &mut out);
    }
    out
}

/// `(2n)! / (2^n n!)`.
pub fn pairing_count(n: usize) -> usize {
    (1..=n).map(|j| 2 * j - 1).product()
}

/// `K ⊕ K` with `Ĝ = diag(G, -G)`, `Ĉ = diag(C, C)` and the form whose
/// operator `P̂` is a basis projection restricting to `S` on `K ⊕ 0`.
#[derive(Clone, Debug)]
pub struct DoubledSpace {
    pub base: QuasifreeForm,
    pub hat_space: PhaseSpace,
    pub hat_form: QuasifreeForm,
}

impl DoubledSpace {
    pub fn new(base: QuasifreeForm) -> Result<Self> {
        let ps = base.space();
        let d = ps.dim();
        let mut g = CMat::zeros(2 * d, 2 * d);
        let mut c = CMat::zeros(2 * d, 2 * d);
        g.view_mut((0, 0), (d, d)).copy_from(ps.g());
        g.view_mut((d, d), (d, d)).copy_from(&(-ps.g()));
        c.view_mut((0, 0), (d, d)).copy_from(ps.c());
        c.view_mut((d, d), (d, d)).copy_from(ps.c());
        let hat_space = PhaseSpace::new(g, c)?;

        let s = base.s_op();
        let id = CMat::identity(d, d);
        let r = base.function(|x| real((x * (1.0 - x)).max(0.0).sqrt()));
        let gs = base.gram();
        let mut sigma = CMat::zeros(2 * d, 2 * d);
        sigma.view_mut((0, 0), (d, d)).copy_from(&(gs * s));
        sigma.view_mut((0, d), (d, d)).copy_from(&(gs * &r));
        sigma.view_mut((d, 0), (d, d)).copy_from(&(gs * &r));
        sigma.view_mut((d, d), (d, d)).copy_from(&(gs * (&id - s)));
        let hat_form = QuasifreeForm::new(hat_space.clone(), sigma)?;
        Ok(DoubledSpace { base, hat_space, hat_form })
    }

    pub fn p_hat(&self) -> &CMat {
        self.hat_form.s_op()
    }

    /// `f ↦ f ⊕ 0`.
    pub fn embed(&self, f: &CVec) -> CVec {
        let d = f.len();
        let mut out = CVec::zeros(2 * d);
        out.rows_mut(0, d).copy_from(f);
        out
    }

    pub fn embed_pair(&self, f: &CVec, g: &CVec) -> CVec {
        let d = f.len();
        let mut out = CVec::zeros(2 * d);
        out.rows_mut(0, d).copy_from(f);
        out.rows_mut(d, d).copy_from(g);
        out
    }

    /// `H ⊕ 0` on the doubled space.
    pub fn embed_operator(&self, h: &CMat) -> CMat {
        let d = h.nrows();
        let mut out = CMat::zeros(2 * d, 2 * d);
        out.view_mut((0, 0), (d, d)).copy_from(h);
        out
    }

    /// Residual between `P̂` and the closed form
    /// `f ⊕ g ↦ γ_S^{-1}(Sf + Rg) ⊕ -γ_S^{-1}(Rf + (1 - S)g)`.
    /// Returns `None` when `γ_S` is not invertible.
    pub fn explicit_formula_residual(&self) -> Option<f64> {
        let base = &self.base;
        let d = base.space().dim();
        if base.spectrum().0.iter().any(|&s| (s - 0.5).abs() < 1e-9) {
            return None;
        }
        let gi = inverse(&base.gamma_s()).ok()?;
        let s = base.s_op();
        let id = CMat::identity(d, d);
        let r = base.function(|x| real((x * (1.0 - x)).max(0.0).sqrt()));
        let mut p = CMat::zeros(2 * d, 2 * d);
        p.view_mut((0, 0), (d, d)).copy_from(&(&gi * s));
        p.view_mut((0, d), (d, d)).copy_from(&(&gi * &r));
        p.view_mut((d, 0), (d, d)).copy_from(&(-(&gi * &r)));
        p.view_mut((d, d), (d, d)).copy_from(&(-(&gi * (&id - s))));
        Some(frob(&(p - self.p_hat())))
    }

    /// `|∥f⊕g∥²_{P̂} - ∥√S f + √(1-S) g∥²_S - ∥√(1-S) f + √S g∥²_S|`.
    pub fn norm_identity_residual(&self, f: &CVec, g: &CVec) -> f64 {
        let base = &self.base;
        let sq = base.function(|x| real(x.max(0.0).sqrt()));
        let sq1 = base.function(|x| real((1.0 - x).max(0.0).sqrt()));
        let lhs = self.hat_form.frame().inner(&self.embed_pair(f, g), &self.embed_pair(f, g)).re;
        let a = &sq * f + &sq1 * g;
        let b = &sq1 * f + &sq * g;
        let rhs = base.frame().inner(&a, &a).re + base.frame().inner(&b, &b).re;
        (lhs - rhs).abs()
    }

    pub fn validate(&self, tol: f64) -> ValidationReport {
        let mut report = ValidationReport::new(tol);
        report.extend("hat_space", self.hat_space.validate(tol));
        report.extend("hat_form", self.hat_form.validate(tol).report);
        let p = self.p_hat();
        report.residual("projection", frob(&(p * p - p)));
        report
    }
}

//! The phase space `(K, γ, Γ)`: a complex vector space of even dimension with
//! a non-degenerate hermitian form `γ(f, g) = f* G g` and a conjugation
//! `Γf = C conj(f)`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, conj, conj_vec, form, frob, inverse, CMat, CVec, C64, I, ONE, ZERO};
use crate::validation::ValidationReport;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Presentation {
    /// `G = diag(1, -1)` per mode, `Γ` swaps the two coordinates.
    Diagonal,
    /// `Γ` is plain complex conjugation, `γ(e_{2j-1}, e_{2j}) = i`.
    Position,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "RawPhaseSpace", into = "RawPhaseSpace")]
pub struct PhaseSpace {
    g: CMat,
    c: CMat,
}

#[derive(Serialize, Deserialize)]
struct RawPhaseSpace {
    dim: usize,
    #[serde(rename = "G", with = "crate::io::cmat")]
    g: CMat,
    #[serde(rename = "C", with = "crate::io::cmat")]
    c: CMat,
}

impl TryFrom<RawPhaseSpace> for PhaseSpace {
    type Error = Error;
    fn try_from(raw: RawPhaseSpace) -> Result<Self> {
        let ps = PhaseSpace::new(raw.g, raw.c)?;
        if ps.dim() != raw.dim {
            return Err(Error::Parse(format!("dim {} does not match matrix size {}", raw.dim, ps.dim())));
        }
        Ok(ps)
    }
}

impl From<PhaseSpace> for RawPhaseSpace {
    fn from(ps: PhaseSpace) -> Self {
        RawPhaseSpace { dim: ps.dim(), g: ps.g, c: ps.c }
    }
}

impl PhaseSpace {
    /// Wrap the two matrices after a shape check. Use [`PhaseSpace::validate`]
    /// for the algebraic invariants.
    pub fn new(g: CMat, c: CMat) -> Result<Self> {
        let d = g.nrows();
        if g.ncols() != d || c.nrows() != d || c.ncols() != d {
            return Err(Error::InvalidArgument("G and C must be square of equal size".into()));
        }
        if d == 0 || !d.is_multiple_of(2) {
            return Err(Error::InvalidArgument(format!("dimension must be even and positive, got {d}")));
        }
        Ok(PhaseSpace { g, c })
    }

    pub fn build_standard(n_modes: usize, presentation: Presentation) -> Result<Self> {
        if n_modes == 0 {
            return Err(Error::InvalidArgument("n_modes must be at least 1".into()));
        }
        let d = 2 * n_modes;
        let mut g = CMat::zeros(d, d);
        let mut c = CMat::zeros(d, d);
        for k in 0..n_modes {
            let (a, b) = (2 * k, 2 * k + 1);
            match presentation {
                Presentation::Diagonal => {
                    g[(a, a)] = ONE;
                    g[(b, b)] = -ONE;
                    c[(a, b)] = ONE;
                    c[(b, a)] = ONE;
                }
                Presentation::Position => {
                    g[(a, b)] = I;
                    g[(b, a)] = -I;
                    c[(a, a)] = ONE;
                    c[(b, b)] = ONE;
                }
            }
        }
        PhaseSpace::new(g, c)
    }

    pub fn dim(&self) -> usize {
        self.g.nrows()
    }

    pub fn n_modes(&self) -> usize {
        self.dim() / 2
    }

    pub fn g(&self) -> &CMat {
        &self.g
    }

    pub fn c(&self) -> &CMat {
        &self.c
    }

    pub fn validate(&self, tol: f64) -> ValidationReport {
        let mut report = ValidationReport::new(tol);
        let g = &self.g;
        let c = &self.c;
        let d = self.dim();
        report.residual("hermitian", frob(&(g - g.adjoint())));
        report.residual("involution", frob(&(c * conj(c) - CMat::identity(d, d))));
        report.residual("sign_relation", frob(&(c.adjoint() * g * c + conj(g))));

        let (vals, _) = linalg::eigh(g);
        let top = vals.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let low = vals.iter().fold(f64::INFINITY, |m, x| m.min(x.abs()));
        let band = tol.max(1e-14) * top.max(1.0);
        report.push("nondegenerate", low, top > 0.0 && low > band);
        let pos = vals.iter().filter(|&&x| x > band).count();
        let neg = vals.iter().filter(|&&x| x < -band).count();
        report.push("signature", (pos as f64 - neg as f64).abs(), pos == neg && pos + neg == d);
        report
    }

    /// `γ(f, g) = f* G g`.
    pub fn gamma(&self, f: &CVec, g: &CVec) -> C64 {
        form(&self.g, f, g)
    }

    /// `Γf = C conj(f)`.
    pub fn conjugate(&self, f: &CVec) -> CVec {
        &self.c * conj_vec(f)
    }

    /// Matrix of the linear map `Γ A Γ`.
    pub fn conjugate_operator(&self, a: &CMat) -> CMat {
        &self.c * conj(a) * conj(&self.c)
    }

    /// `γ`-adjoint `G^{-1} A* G`.
    pub fn gamma_adjoint(&self, a: &CMat) -> CMat {
        let g_inv = inverse(&self.g).expect("phase space form must be invertible");
        g_inv * a.adjoint() * &self.g
    }

    pub fn is_gamma_fixed(&self, f: &CVec, tol: f64) -> bool {
        linalg::vec_norm(&(self.conjugate(f) - f)) <= tol * linalg::vec_norm(f).max(1.0)
    }

    /// Γ-fixed complex basis of `K`, as the columns of a `d × d` matrix `W`.
    /// Every Γ-fixed vector is `W c` for a unique real `c`.
    pub fn real_frame(&self) -> CMat {
        let d = self.dim();
        let mut candidates = Vec::with_capacity(2 * d);
        for k in 0..d {
            let mut e = CVec::zeros(d);
            e[k] = ONE;
            let ge = self.conjugate(&e);
            candidates.push((&e + &ge) * linalg::real(0.5));
            candidates.push((&e - &ge) * C64::new(0.0, -0.5));
        }
        let mut chosen: Vec<CVec> = Vec::with_capacity(d);
        for v in candidates {
            if chosen.len() == d {
                break;
            }
            if linalg::vec_norm(&v) < 1e-12 {
                continue;
            }
            let mut trial = chosen.clone();
            trial.push(v.clone());
            let m = linalg::columns_to_matrix(d, &trial);
            if linalg::rank(&m, 1e-10) == trial.len() {
                chosen.push(v);
            }
        }
        linalg::columns_to_matrix(d, &chosen)
    }

    /// Real symplectic form `σ = -iγ` in the coordinates of [`Self::real_frame`].
    pub fn sigma_matrix(&self, frame: &CMat) -> DMatrix<f64> {
        let m = frame.adjoint() * &self.g * frame;
        DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| (m[(i, j)] * (-I)).re)
    }

    /// Real coordinates of a Γ-fixed vector in the given frame.
    pub fn real_coordinates(&self, frame: &CMat, f: &CVec) -> Result<DVector<f64>> {
        let sol = frame
            .clone()
            .lu()
            .solve(f)
            .ok_or_else(|| Error::Singular("real frame".into()))?;
        Ok(sol.map(|z| z.re))
    }

    /// Γ-fixed basis `e_1, …, e_{2k}` of a subspace containing the span of
    /// `vectors`, with `γ(e_{2j-1}, e_{2j}) = i` and every other pairing zero.
    pub fn symplectic_extension(&self, vectors: &[CVec]) -> Result<BasisSet> {
        self.symplectic_extension_with(vectors, 1e-10)
    }

    pub fn symplectic_extension_with(&self, vectors: &[CVec], pivot_rel: f64) -> Result<BasisSet> {
        let d = self.dim();
        for v in vectors {
            if v.len() != d {
                return Err(Error::InvalidArgument(format!("vector length {} != {d}", v.len())));
            }
        }
        if vectors.is_empty() {
            return Ok(BasisSet { vectors: Vec::new() });
        }
        let frame = self.real_frame();
        let sigma = self.sigma_matrix(&frame);
        let sig = |a: &DVector<f64>, b: &DVector<f64>| (a.transpose() * &sigma * b)[(0, 0)];
        let smax = sigma.iter().fold(0.0f64, |m, x| m.max(x.abs()));

        // Γ-closure split into Γ-fixed real and imaginary parts.
        let mut queue: Vec<(usize, DVector<f64>)> = Vec::new();
        for (idx, v) in vectors.iter().enumerate() {
            let gv = self.conjugate(v);
            let re = (v + &gv) * linalg::real(0.5);
            let im = (v - &gv) * C64::new(0.0, -0.5);
            for part in [re, im] {
                let coords = self.real_coordinates(&frame, &part)?;
                if coords.norm() > 0.0 {
                    queue.push((idx, coords));
                }
            }
        }
        let scale = queue.iter().fold(0.0f64, |m, (_, v)| m.max(v.norm()));
        let zero_tol = 1e-9 * scale.max(f64::MIN_POSITIVE);

        let mut pool: Vec<DVector<f64>> = (0..d)
            .map(|k| {
                let mut e = DVector::zeros(d);
                e[k] = 1.0;
                e
            })
            .collect();

        let mut out: Vec<DVector<f64>> = Vec::new();
        let project = |v: &mut DVector<f64>, e1: &DVector<f64>, e2: &DVector<f64>, sig: &dyn Fn(&DVector<f64>, &DVector<f64>) -> f64| {
            let s2 = sig(v, e2);
            let s1 = sig(v, e1);
            *v -= e1 * s2;
            *v += e2 * s1;
        };

        while let Some(pos) = queue.iter().position(|(_, v)| v.norm() > zero_tol) {
            let (idx, a) = queue.remove(pos);
            let a = &a / a.norm();
            let pivot_tol = pivot_rel * smax.max(f64::MIN_POSITIVE);
            let mut best: Option<(bool, usize, f64)> = None;
            for (j, (_, b)) in queue.iter().enumerate() {
                let s = sig(&a, b);
                if s.abs() > pivot_tol && best.is_none_or(|(_, _, m)| s.abs() > m.abs()) {
                    best = Some((true, j, s));
                }
            }
            if best.is_none() {
                for (j, b) in pool.iter().enumerate() {
                    let s = sig(&a, b);
                    if s.abs() > pivot_tol && best.is_none_or(|(_, _, m)| s.abs() > m.abs()) {
                        best = Some((false, j, s));
                    }
                }
            }
            let (from_queue, j, s) = best.ok_or_else(|| Error::DegenerateInput {
                vector: idx,
                reason: "no symplectic partner above pivot tolerance".into(),
            })?;
            let b = if from_queue { queue.remove(j).1 } else { pool.remove(j) };
            let e1 = a;
            let e2 = b / s;
            for (_, v) in queue.iter_mut() {
                project(v, &e1, &e2, &sig);
            }
            for v in pool.iter_mut() {
                project(v, &e1, &e2, &sig);
            }
            out.push(e1);
            out.push(e2);
        }

        let vectors = out
            .iter()
            .map(|c| &frame * c.map(|x| C64::new(x, 0.0)))
            .collect();
        Ok(BasisSet { vectors })
    }
}

/// Ordered Γ-fixed basis `e_1, …, e_{2k}` in canonical symplectic position.
#[derive(Clone, Debug)]
pub struct BasisSet {
    pub vectors: Vec<CVec>,
}

impl BasisSet {
    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn pairing_matrix(&self, ps: &PhaseSpace) -> CMat {
        let k = self.len();
        CMat::from_fn(k, k, |a, b| ps.gamma(&self.vectors[a], &self.vectors[b]))
    }

    /// Largest deviation from `γ(e_{2j-1}, e_{2j}) = i`, zero elsewhere.
    pub fn canonical_residual(&self, ps: &PhaseSpace) -> f64 {
        let p = self.pairing_matrix(ps);
        let k = self.len();
        let mut worst = 0.0f64;
        for a in 0..k {
            for b in 0..k {
                let want = if a % 2 == 0 && b == a + 1 {
                    I
                } else if b % 2 == 0 && a == b + 1 {
                    -I
                } else {
                    ZERO
                };
                worst = worst.max((p[(a, b)] - want).norm());
            }
        }
        worst
    }
}

/// A `d × d` matrix together with the Gram matrix defining its adjoint.
#[derive(Clone, Debug)]
pub struct KOperator {
    pub matrix: CMat,
    pub metric: CMat,
}

impl KOperator {
    pub fn new(matrix: CMat, metric: CMat) -> Self {
        KOperator { matrix, metric }
    }

    pub fn adjoint(&self) -> Result<KOperator> {
        let m_inv = inverse(&self.metric)?;
        Ok(KOperator {
            matrix: m_inv * self.matrix.adjoint() * &self.metric,
            metric: self.metric.clone(),
        })
    }

    /// `tr(A† A)`. Real and non-negative for positive definite metrics.
    pub fn hs_norm_sq(&self) -> Result<C64> {
        let adj = self.adjoint()?;
        Ok((adj.matrix * &self.matrix).trace())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::real;

    #[test]
    fn standard_spaces_match_their_matrices() {
        let p = PhaseSpace::build_standard(1, Presentation::Position).unwrap();
        assert_eq!(p.g()[(0, 1)], I);
        assert_eq!(p.g()[(1, 0)], -I);
        assert_eq!(p.c(), &CMat::identity(2, 2));
        let d = PhaseSpace::build_standard(1, Presentation::Diagonal).unwrap();
        assert_eq!(d.g()[(1, 1)], real(-1.0));
        assert_eq!(d.c()[(0, 1)], ONE);
        assert!(PhaseSpace::build_standard(0, Presentation::Diagonal).is_err());
    }

    #[test]
    fn identity_form_is_rejected() {
        let ps = PhaseSpace::new(CMat::identity(2, 2), CMat::identity(2, 2)).unwrap();
        let r = ps.validate(1e-12);
        assert!(!r.is_valid());
        assert!(!r.get("sign_relation").unwrap().passed);
    }

    #[test]
    fn real_frame_columns_are_fixed() {
        for pres in [Presentation::Diagonal, Presentation::Position] {
            let ps = PhaseSpace::build_standard(3, pres).unwrap();
            let w = ps.real_frame();
            assert_eq!(linalg::rank(&w, 1e-10), 6);
            for j in 0..6 {
                let col: CVec = w.column(j).into();
                assert!(linalg::vec_norm(&(ps.conjugate(&col) - &col)) == 0.0);
            }
        }
    }

    #[test]
    fn extension_of_single_position_vector() {
        let ps = PhaseSpace::build_standard(1, Presentation::Position).unwrap();
        let e1 = CVec::from_vec(vec![ONE, ZERO]);
        let b = ps.symplectic_extension(&[e1]).unwrap();
        assert_eq!(b.len(), 2);
        assert!(b.canonical_residual(&ps) < 1e-14);
    }
}

//! Bosonic Fock space over `PK` truncated at a total particle number `N`.
//!
//! States are indexed by occupation tuples `(k_1, …, k_m)` with
//! `Σ k_i ≤ N`, ordered by total occupation and then lexicographically
//! descending, so the vacuum is index 0. Ladder operators are stored as
//! index tables; the truncated annihilator is exactly the adjoint of the
//! truncated creator, hence `B(Γf) = B(f)*` holds exactly.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::linalg::{self, conj, conj_vec, CMat, CVec, MetricFrame, C64, ONE, ZERO};
use crate::quasifree::QuasifreeForm;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Parity {
    Full,
    Even,
    Odd,
}

/// Matrix over the occupation basis, possibly antilinear.
#[derive(Clone, Debug)]
pub struct FockOperator {
    pub matrix: CMat,
    pub antilinear: bool,
}

impl FockOperator {
    pub fn linear(matrix: CMat) -> Self {
        FockOperator { matrix, antilinear: false }
    }

    pub fn antilinear(matrix: CMat) -> Self {
        FockOperator { matrix, antilinear: true }
    }

    pub fn identity(dim: usize) -> Self {
        FockOperator::linear(CMat::identity(dim, dim))
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn apply(&self, v: &CVec) -> CVec {
        if self.antilinear {
            &self.matrix * conj_vec(v)
        } else {
            &self.matrix * v
        }
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &FockOperator) -> FockOperator {
        let matrix = if self.antilinear {
            &self.matrix * conj(&other.matrix)
        } else {
            &self.matrix * &other.matrix
        };
        FockOperator { matrix, antilinear: self.antilinear != other.antilinear }
    }

    /// Hilbert-space adjoint. For an antilinear `A` this is the antilinear
    /// `A*` with `⟨x, A* y⟩ = conj⟨A x, y⟩`.
    pub fn adjoint(&self) -> FockOperator {
        if self.antilinear {
            FockOperator::antilinear(self.matrix.transpose())
        } else {
            FockOperator::linear(self.matrix.adjoint())
        }
    }

    pub fn scale(&self, z: C64) -> FockOperator {
        FockOperator { matrix: &self.matrix * z, antilinear: self.antilinear }
    }

    pub fn add(&self, other: &FockOperator) -> Result<FockOperator> {
        if self.antilinear != other.antilinear {
            return Err(Error::InvalidArgument("cannot add linear and antilinear operators".into()));
        }
        Ok(FockOperator { matrix: &self.matrix + &other.matrix, antilinear: self.antilinear })
    }

    pub fn sub(&self, other: &FockOperator) -> Result<FockOperator> {
        self.add(&other.scale(-ONE))
    }
}

/// Creation/annihilation coefficients of `B(f) = Σ α_i a_i† + β_i a_i`.
#[derive(Clone, Debug)]
pub struct FieldCoeffs {
    pub alpha: Vec<C64>,
    pub beta: Vec<C64>,
}

#[derive(Clone, Debug)]
pub struct TruncatedFock {
    form: QuasifreeForm,
    frame: MetricFrame,
    modes: Vec<CVec>,
    cutoff: usize,
    states: Vec<Vec<u16>>,
    totals: Vec<usize>,
    lookup: HashMap<Vec<u16>, usize>,
    /// `raise[i][j] = (target, sqrt(k_i + 1))` for `a_i†` on state `j`.
    raise: Vec<Vec<Option<(usize, f64)>>>,
    /// `lower[i][j] = (target, sqrt(k_i))` for `a_i` on state `j`.
    lower: Vec<Vec<Option<(usize, f64)>>>,
    sqrt_fact: Vec<f64>,
}

fn occupation_states(m: usize, n: usize) -> Vec<Vec<u16>> {
    fn rec(m: usize, left: usize, cur: &mut Vec<u16>, out: &mut Vec<Vec<u16>>) {
        if cur.len() == m - 1 {
            cur.push(left as u16);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for k in (0..=left).rev() {
            cur.push(k as u16);
            rec(m, left - k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    for total in 0..=n {
        rec(m, total, &mut Vec::with_capacity(m), &mut out);
    }
    out
}

/// `C(m + n, m)`.
pub fn fock_dimension(m: usize, n: usize) -> usize {
    let mut acc: u128 = 1;
    for k in 1..=m as u128 {
        acc = acc * (n as u128 + k) / k;
    }
    acc as usize
}

impl TruncatedFock {
    pub fn new(form: &QuasifreeForm, cutoff: usize) -> Result<Self> {
        if cutoff < 1 {
            return Err(Error::InvalidArgument("cutoff must be at least 1".into()));
        }
        if !form.is_projection(1e-8) {
            return Err(Error::NotAProjection);
        }
        let p = form.s_op();
        let frame = form.frame().clone();
        let modes = linalg::metric_orthonormalize(form.gram(), p, 1e-8);
        let m = modes.len();
        if m * 2 != form.space().dim() {
            return Err(Error::InternalConsistency(format!(
                "range of P has dimension {m}, expected {}",
                form.space().dim() / 2
            )));
        }
        let states = occupation_states(m, cutoff);
        let totals: Vec<usize> = states.iter().map(|s| s.iter().map(|&k| k as usize).sum()).collect();
        let lookup: HashMap<Vec<u16>, usize> =
            states.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
        let mut raise = vec![vec![None; states.len()]; m];
        let mut lower = vec![vec![None; states.len()]; m];
        for (j, s) in states.iter().enumerate() {
            for i in 0..m {
                if totals[j] < cutoff {
                    let mut t = s.clone();
                    t[i] += 1;
                    raise[i][j] = Some((lookup[&t], ((s[i] + 1) as f64).sqrt()));
                }
                if s[i] > 0 {
                    let mut t = s.clone();
                    t[i] -= 1;
                    lower[i][j] = Some((lookup[&t], (s[i] as f64).sqrt()));
                }
            }
        }
        let mut sqrt_fact = vec![1.0; cutoff + 2];
        for k in 1..sqrt_fact.len() {
            sqrt_fact[k] = sqrt_fact[k - 1] * (k as f64).sqrt();
        }
        Ok(TruncatedFock {
            form: form.clone(),
            frame,
            modes,
            cutoff,
            states,
            totals,
            lookup,
            raise,
            lower,
            sqrt_fact,
        })
    }

    pub fn form(&self) -> &QuasifreeForm {
        &self.form
    }

    pub fn modes(&self) -> &[CVec] {
        &self.modes
    }

    pub fn n_modes(&self) -> usize {
        self.modes.len()
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn occupation(&self, index: usize) -> &[u16] {
        &self.states[index]
    }

    pub fn index_of(&self, occupation: &[u16]) -> Option<usize> {
        self.lookup.get(occupation).copied()
    }

    pub fn total(&self, index: usize) -> usize {
        self.totals[index]
    }

    pub fn vacuum(&self) -> CVec {
        let mut v = CVec::zeros(self.dim());
        v[0] = ONE;
        v
    }

    /// Indices of states with total occupation at most `limit`.
    pub fn low_sector(&self, limit: usize) -> Vec<usize> {
        (0..self.dim()).filter(|&j| self.totals[j] <= limit).collect()
    }

    /// Index groups of equal total occupation.
    pub fn number_blocks(&self) -> Vec<Vec<usize>> {
        let mut blocks = vec![Vec::new(); self.cutoff + 1];
        for j in 0..self.dim() {
            blocks[self.totals[j]].push(j);
        }
        blocks
    }

    /// Even and odd index groups.
    pub fn parity_blocks(&self) -> Vec<Vec<usize>> {
        let mut blocks = vec![Vec::new(), Vec::new()];
        for j in 0..self.dim() {
            blocks[self.totals[j] % 2].push(j);
        }
        blocks
    }

    /// Frobenius residual of `a - b` on the columns of sector `≤ limit`.
    pub fn sector_residual(&self, a: &CMat, b: &CMat, limit: usize) -> f64 {
        linalg::column_residual(a, b, &self.low_sector(limit))
    }

    /// Mode coordinates `(u_i, v)_P` of a vector of `K`.
    pub fn mode_coords(&self, v: &CVec) -> Vec<C64> {
        self.modes.iter().map(|u| self.frame.inner(u, v)).collect()
    }

    pub fn field_coeffs(&self, f: &CVec) -> FieldCoeffs {
        let p = self.form.s_op();
        let pf = p * f;
        let pgf = p * self.form.space().conjugate(f);
        FieldCoeffs {
            alpha: self.mode_coords(&pf),
            beta: self.mode_coords(&pgf).into_iter().map(|z| z.conj()).collect(),
        }
    }

    /// Apply `Σ α_i a_i† + β_i a_i` to a sparse column.
    fn apply_coeffs(&self, c: &FieldCoeffs, col: &[(usize, C64)], out: &mut Vec<(usize, C64)>) {
        out.clear();
        for &(j, z) in col {
            for i in 0..self.n_modes() {
                if c.alpha[i] != ZERO {
                    if let Some((t, s)) = self.raise[i][j] {
                        out.push((t, z * c.alpha[i] * s));
                    }
                }
                if c.beta[i] != ZERO {
                    if let Some((t, s)) = self.lower[i][j] {
                        out.push((t, z * c.beta[i] * s));
                    }
                }
            }
        }
    }

    fn coeff_matrix(&self, c: &FieldCoeffs) -> CMat {
        let n = self.dim();
        let mut m = CMat::zeros(n, n);
        let mut out = Vec::new();
        for j in 0..n {
            self.apply_coeffs(c, &[(j, ONE)], &mut out);
            for &(t, z) in &out {
                m[(t, j)] += z;
            }
        }
        m
    }

    /// Matrix of `B(f) = b†(Pf) + b(PΓf)`.
    pub fn field(&self, f: &CVec) -> FockOperator {
        FockOperator::linear(self.coeff_matrix(&self.field_coeffs(f)))
    }

    /// Matrix of `B(f) B(g)`, assembled column by column from the sparse
    /// ladder tables.
    pub fn field_product(&self, f: &CVec, g: &CVec) -> CMat {
        let cf = self.field_coeffs(f);
        let cg = self.field_coeffs(g);
        let n = self.dim();
        let mut m = CMat::zeros(n, n);
        let mut mid = Vec::new();
        let mut out = Vec::new();
        for j in 0..n {
            self.apply_coeffs(&cg, &[(j, ONE)], &mut mid);
            self.apply_coeffs(&cf, &mid, &mut out);
            for &(t, z) in &out {
                m[(t, j)] += z;
            }
        }
        m
    }

    /// `a_i†` for the `i`-th mode.
    pub fn creation(&self, i: usize) -> FockOperator {
        let mut c = FieldCoeffs { alpha: vec![ZERO; self.n_modes()], beta: vec![ZERO; self.n_modes()] };
        c.alpha[i] = ONE;
        FockOperator::linear(self.coeff_matrix(&c))
    }

    pub fn annihilation(&self, i: usize) -> FockOperator {
        self.creation(i).adjoint()
    }

    /// `W(f) = exp(i B(f))` for Γ-fixed `f`.
    pub fn weyl(&self, f: &CVec) -> Result<FockOperator> {
        if !self.form.space().is_gamma_fixed(f, 1e-10) {
            return Err(Error::InvalidArgument("Weyl operators need a Γ-fixed vector".into()));
        }
        let b = self.field(f).matrix;
        Ok(FockOperator::linear(linalg::expm_hermitian(&b, linalg::I)))
    }

    pub fn number_operator(&self) -> FockOperator {
        let d = CVec::from_iterator(self.dim(), self.totals.iter().map(|&t| C64::new(t as f64, 0.0)));
        FockOperator::linear(CMat::from_diagonal(&d))
    }

    /// Occupation number of a subset of modes.
    pub fn partial_number_operator(&self, modes: &[usize]) -> FockOperator {
        let d = CVec::from_iterator(
            self.dim(),
            self.states
                .iter()
                .map(|s| C64::new(modes.iter().map(|&i| s[i] as f64).sum(), 0.0)),
        );
        FockOperator::linear(CMat::from_diagonal(&d))
    }

    /// Diagonal projectors onto even and odd total occupation.
    pub fn parity_split(&self) -> (FockOperator, FockOperator) {
        let even = CVec::from_iterator(
            self.dim(),
            self.totals.iter().map(|&t| if t % 2 == 0 { ONE } else { ZERO }),
        );
        let odd = even.map(|z| ONE - z);
        (
            FockOperator::linear(CMat::from_diagonal(&even)),
            FockOperator::linear(CMat::from_diagonal(&odd)),
        )
    }

    /// Truncated exponential vector with mode coordinates `z`.
    pub fn exponential_from_coords(&self, z: &[C64], parity: Parity) -> CVec {
        CVec::from_iterator(
            self.dim(),
            self.states.iter().zip(&self.totals).map(|(s, &t)| {
                let keep = match parity {
                    Parity::Full => true,
                    Parity::Even => t % 2 == 0,
                    Parity::Odd => t % 2 == 1,
                };
                if !keep {
                    return ZERO;
                }
                s.iter().zip(z).fold(ONE, |acc, (&k, &zi)| {
                    acc * zi.powu(k as u32) / self.sqrt_fact[k as usize]
                })
            }),
        )
    }

    /// Truncated `e(u)`, `e⁺(u)` or `e⁻(u)` for `u` in `PK`. The neglected
    /// tail has squared norm `Σ_{n > N} ∥u∥^{2n} / n!`.
    pub fn exponential_vector(&self, u: &CVec, parity: Parity) -> CVec {
        self.exponential_from_coords(&self.mode_coords(u), parity)
    }

    /// Symmetric-power action of an `m × m` one-particle matrix `r`
    /// (`u_j ↦ Σ_i r_ij u_i`) on the occupation basis. Each number sector is
    /// mapped into itself, so no truncation error arises.
    pub fn second_quantize(&self, r: &CMat, antilinear: bool) -> FockOperator {
        let m = self.n_modes();
        let n = self.dim();
        let mut out = CMat::zeros(n, n);
        let mut poly = vec![ZERO; n];
        let mut next = vec![ZERO; n];
        let unit_raise: Vec<Vec<Option<usize>>> = self
            .raise
            .iter()
            .map(|row| row.iter().map(|e| e.map(|(t, _)| t)).collect())
            .collect();
        for col in 0..n {
            poly.iter_mut().for_each(|z| *z = ZERO);
            poly[0] = ONE;
            let mut support = vec![0usize];
            for (j, &kj) in self.states[col].iter().enumerate() {
                for _ in 0..kj {
                    next.iter_mut().for_each(|z| *z = ZERO);
                    let mut new_support = Vec::new();
                    for &s in &support {
                        let c = poly[s];
                        if c == ZERO {
                            continue;
                        }
                        for i in 0..m {
                            let rij = r[(i, j)];
                            if rij == ZERO {
                                continue;
                            }
                            let t = unit_raise[i][s].expect("degree stays within cutoff");
                            if next[t] == ZERO {
                                new_support.push(t);
                            }
                            next[t] += c * rij;
                        }
                    }
                    new_support.sort_unstable();
                    new_support.dedup();
                    std::mem::swap(&mut poly, &mut next);
                    support = new_support;
                }
            }
            let denom: f64 = self.states[col].iter().map(|&k| self.sqrt_fact[k as usize]).product();
            for &s in &support {
                let num: f64 = self.states[s].iter().map(|&k| self.sqrt_fact[k as usize]).product();
                out[(s, col)] = poly[s] * num / denom;
            }
        }
        FockOperator { matrix: out, antilinear }
    }

    /// Matrix `(u_i, A u_j)_P` of a one-particle operator restricted to `PK`.
    pub fn one_particle_matrix(&self, a: &CMat) -> CMat {
        let m = self.n_modes();
        CMat::from_fn(m, m, |i, j| self.frame.inner(&self.modes[i], &(a * &self.modes[j])))
    }

    /// Same for an antilinear map `f ↦ A conj(f)`.
    pub fn one_particle_matrix_antilinear(&self, a: &CMat) -> CMat {
        let m = self.n_modes();
        CMat::from_fn(m, m, |i, j| {
            self.frame.inner(&self.modes[i], &(a * conj_vec(&self.modes[j])))
        })
    }

    /// Occupation-basis complex conjugation.
    pub fn mode_conjugation(&self) -> FockOperator {
        FockOperator::antilinear(CMat::identity(self.dim(), self.dim()))
    }

    /// Check `U e(u_A + u_B) = e(u_A) ⊗ e(u_B)` and its parity refinements
    /// with modes `0..split` in the first factor. Returns the largest
    /// residual over the samples.
    pub fn factorization_check(&self, split: usize, samples: &[(Vec<C64>, Vec<C64>)]) -> Result<f64> {
        let m = self.n_modes();
        if split == 0 || split >= m {
            return Err(Error::InvalidArgument("split must leave both factors non-empty".into()));
        }
        let left = occupation_states(split, self.cutoff);
        let right = occupation_states(m - split, self.cutoff);
        let single = |states: &[Vec<u16>], z: &[C64], parity: Parity| -> Vec<C64> {
            states
                .iter()
                .map(|s| {
                    let t: usize = s.iter().map(|&k| k as usize).sum();
                    let keep = match parity {
                        Parity::Full => true,
                        Parity::Even => t.is_multiple_of(2),
                        Parity::Odd => t % 2 == 1,
                    };
                    if !keep {
                        return ZERO;
                    }
                    s.iter().zip(z).fold(ONE, |acc, (&k, &zi)| {
                        acc * zi.powu(k as u32) / self.sqrt_fact[k as usize]
                    })
                })
                .collect()
        };
        let tensor = |a: &[C64], b: &[C64]| -> CVec {
            let mut out = CVec::zeros(self.dim());
            for (i, sa) in left.iter().enumerate() {
                for (j, sb) in right.iter().enumerate() {
                    let mut occ = sa.clone();
                    occ.extend_from_slice(sb);
                    if let Some(idx) = self.index_of(&occ) {
                        out[idx] += a[i] * b[j];
                    }
                }
            }
            out
        };
        let mut worst = 0.0f64;
        for (za, zb) in samples {
            if za.len() != split || zb.len() != m - split {
                return Err(Error::InvalidArgument("sample coordinate lengths do not match split".into()));
            }
            let mut z = za.clone();
            z.extend_from_slice(zb);
            let full = self.exponential_from_coords(&z, Parity::Full);
            let ea = single(&left, za, Parity::Full);
            let eb = single(&right, zb, Parity::Full);
            worst = worst.max(linalg::vec_norm(&(full - tensor(&ea, &eb))));

            let (pa, ma) = (single(&left, za, Parity::Even), single(&left, za, Parity::Odd));
            let (pb, mb) = (single(&right, zb, Parity::Even), single(&right, zb, Parity::Odd));
            let even = self.exponential_from_coords(&z, Parity::Even);
            let odd = self.exponential_from_coords(&z, Parity::Odd);
            worst = worst.max(linalg::vec_norm(&(even - tensor(&pa, &pb) - tensor(&ma, &mb))));
            worst = worst.max(linalg::vec_norm(&(odd - tensor(&pa, &mb) - tensor(&ma, &pb))));
        }
        Ok(worst)
    }

    /// Expectation `⟨v, A v⟩`.
    pub fn expectation(&self, a: &FockOperator, v: &CVec) -> C64 {
        v.dotc(&a.apply(v))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase_space::{PhaseSpace, Presentation};

    fn fock(m: usize, n: usize) -> TruncatedFock {
        let ps = PhaseSpace::build_standard(m, Presentation::Diagonal).unwrap();
        TruncatedFock::new(&QuasifreeForm::fock(&ps).unwrap(), n).unwrap()
    }

    #[test]
    fn dimensions() {
        assert_eq!(fock(1, 3).dim(), 4);
        assert_eq!(fock(2, 2).dim(), 6);
        assert_eq!(fock(3, 5).dim(), fock_dimension(3, 5));
        assert_eq!(fock(2, 4).occupation(0), &[0, 0]);
    }

    #[test]
    fn single_mode_ladder() {
        let fk = fock(1, 3);
        let a = fk.creation(0).matrix;
        for k in 0..3 {
            assert!((a[(k + 1, k)].re - ((k + 1) as f64).sqrt()).abs() < 1e-15);
        }
        assert_eq!(a[(3, 3)], ZERO);
    }

    #[test]
    fn second_quantized_identity_is_identity() {
        let fk = fock(2, 5);
        let g = fk.second_quantize(&CMat::identity(2, 2), false);
        assert!(linalg::frob(&(g.matrix - CMat::identity(fk.dim(), fk.dim()))) < 1e-14);
    }

    #[test]
    fn mixed_form_rejected() {
        let ps = PhaseSpace::build_standard(1, Presentation::Diagonal).unwrap();
        let th = QuasifreeForm::thermal(&ps, &[0.25]).unwrap();
        assert!(matches!(TruncatedFock::new(&th, 4), Err(Error::NotAProjection)));
    }
}

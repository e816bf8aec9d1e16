//! Dense complex linear algebra shared by the rest of the crate.
//!
//! Everything here works on `DMatrix<C64>`. Operators that are self-adjoint
//! only with respect to a non-standard Gram matrix are handled by congruence
//! through the Cholesky factor of that Gram matrix ([`MetricFrame`]).

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn real(x: f64) -> C64 {
    C64::new(x, 0.0)
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

pub fn conj(m: &CMat) -> CMat {
    m.map(|z| z.conj())
}

pub fn conj_vec(v: &CVec) -> CVec {
    v.map(|z| z.conj())
}

/// Frobenius norm.
pub fn frob(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn vec_norm(v: &CVec) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `(A + A*) / 2`.
pub fn hermitian_part(m: &CMat) -> CMat {
    (m + m.adjoint()) * real(0.5)
}

pub fn inverse(m: &CMat) -> Result<CMat> {
    m.clone()
        .try_inverse()
        .ok_or_else(|| Error::Singular("matrix inverse".into()))
}

/// Eigen-decomposition of a hermitian matrix. The input is symmetrized first,
/// eigenvalues are returned in ascending order with matching columns.
pub fn eigh(m: &CMat) -> (Vec<f64>, CMat) {
    let h = hermitian_part(m);
    let n = h.nrows();
    let eig = h.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vecs = CMat::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vecs.set_column(dst, &eig.eigenvectors.column(src));
    }
    (vals, vecs)
}

/// Apply a real function to a hermitian matrix through its spectrum.
pub fn hermitian_function(m: &CMat, f: impl Fn(f64) -> C64) -> CMat {
    let (vals, vecs) = eigh(m);
    let d = CVec::from_iterator(vals.len(), vals.iter().map(|&x| f(x)));
    &vecs * CMat::from_diagonal(&d) * vecs.adjoint()
}

/// `exp(scale * h)` for hermitian `h`, computed blockwise over the supplied
/// invariant index groups. Each group must be invariant under `h`; entries
/// coupling different groups are ignored.
pub fn expm_hermitian_blocked(h: &CMat, scale: C64, blocks: &[Vec<usize>]) -> CMat {
    let n = h.nrows();
    let mut out = CMat::zeros(n, n);
    for block in blocks {
        let k = block.len();
        if k == 0 {
            continue;
        }
        let sub = CMat::from_fn(k, k, |a, b| h[(block[a], block[b])]);
        let e = hermitian_function(&sub, |x| (scale * x).exp());
        for a in 0..k {
            for b in 0..k {
                out[(block[a], block[b])] = e[(a, b)];
            }
        }
    }
    out
}

pub fn expm_hermitian(h: &CMat, scale: C64) -> CMat {
    hermitian_function(h, |x| (scale * x).exp())
}

/// General matrix exponential (Padé with scaling and squaring).
pub fn expm(m: &CMat) -> CMat {
    m.exp()
}

/// Frobenius norm of `(a - b)` restricted to the given columns.
pub fn column_residual(a: &CMat, b: &CMat, cols: &[usize]) -> f64 {
    let mut acc = 0.0;
    for &j in cols {
        for i in 0..a.nrows() {
            acc += (a[(i, j)] - b[(i, j)]).norm_sqr();
        }
    }
    acc.sqrt()
}

/// Spectral norm of a complex matrix.
pub fn spectral_norm(m: &CMat) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    let s = m.clone().svd(false, false);
    s.singular_values.iter().cloned().fold(0.0, f64::max)
}

/// Frame attached to a positive definite Gram matrix `M = L L*`.
///
/// An operator `A` that is self-adjoint for `<x, y> = x* M y` becomes the
/// hermitian matrix `L* A L^{-*}` in this frame.
#[derive(Clone, Debug)]
pub struct MetricFrame {
    metric: CMat,
    l: CMat,
    l_inv: CMat,
}

impl MetricFrame {
    pub fn new(metric: &CMat) -> Result<Self> {
        let h = hermitian_part(metric);
        let chol = Cholesky::<C64, Dyn>::new(h.clone())
            .ok_or_else(|| Error::DegenerateForm("Gram matrix is not positive definite".into()))?;
        let l = chol.l();
        let l_inv = inverse(&l)?;
        Ok(MetricFrame { metric: h, l, l_inv })
    }

    pub fn metric(&self) -> &CMat {
        &self.metric
    }

    /// Coordinates of `x` in the orthonormal frame: `L* x`.
    pub fn to_frame_vec(&self, x: &CVec) -> CVec {
        self.l.adjoint() * x
    }

    pub fn to_frame(&self, a: &CMat) -> CMat {
        self.l.adjoint() * a * self.l_inv.adjoint()
    }

    pub fn from_frame(&self, b: &CMat) -> CMat {
        self.l_inv.adjoint() * b * self.l.adjoint()
    }

    /// Metric adjoint `M^{-1} A* M`.
    pub fn adjoint(&self, a: &CMat) -> CMat {
        self.from_frame(&self.to_frame(a).adjoint())
    }

    /// Residual of metric self-adjointness, measured in the orthonormal frame.
    pub fn self_adjoint_residual(&self, a: &CMat) -> f64 {
        let b = self.to_frame(a);
        frob(&(&b - b.adjoint()))
    }

    /// Spectrum and metric-orthonormal eigenvectors of a metric self-adjoint
    /// operator. Returned eigenvectors are columns in the original
    /// coordinates.
    pub fn spectrum(&self, a: &CMat) -> (Vec<f64>, CMat) {
        let (vals, vecs) = eigh(&self.to_frame(a));
        (vals, self.l_inv.adjoint() * vecs)
    }

    /// Functional calculus for a metric self-adjoint operator.
    pub fn function(&self, a: &CMat, f: impl Fn(f64) -> C64) -> CMat {
        self.from_frame(&hermitian_function(&self.to_frame(a), f))
    }

    /// Operator norm with respect to the metric.
    pub fn operator_norm(&self, a: &CMat) -> f64 {
        spectral_norm(&self.to_frame(a))
    }

    /// Squared Hilbert–Schmidt norm `tr(A^* A)` with metric adjoint.
    pub fn hs_norm_sq(&self, a: &CMat) -> f64 {
        let b = self.to_frame(a);
        b.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn inner(&self, x: &CVec, y: &CVec) -> C64 {
        (x.adjoint() * &self.metric * y)[(0, 0)]
    }
}

/// Hermitian-form value `x* M y`.
pub fn form(m: &CMat, x: &CVec, y: &CVec) -> C64 {
    (x.adjoint() * m * y)[(0, 0)]
}

/// Orthonormal basis (with respect to `metric`) of the column span of `cols`,
/// obtained by modified Gram–Schmidt in column order. Columns whose residual
/// norm falls below `tol` times the largest column norm are skipped.
pub fn metric_orthonormalize(metric: &CMat, cols: &CMat, tol: f64) -> Vec<CVec> {
    let scale = (0..cols.ncols())
        .map(|j| form(metric, &cols.column(j).into(), &cols.column(j).into()).re.max(0.0).sqrt())
        .fold(0.0, f64::max);
    let mut basis: Vec<CVec> = Vec::new();
    if scale == 0.0 {
        return basis;
    }
    for j in 0..cols.ncols() {
        let mut v: CVec = cols.column(j).into();
        for _ in 0..2 {
            for b in &basis {
                let p = form(metric, b, &v);
                v -= b * p;
            }
        }
        let n = form(metric, &v, &v).re.max(0.0).sqrt();
        if n > tol * scale {
            basis.push(v / real(n));
        }
    }
    basis
}

pub fn columns_to_matrix(n: usize, cols: &[CVec]) -> CMat {
    let mut m = CMat::zeros(n, cols.len());
    for (j, v) in cols.iter().enumerate() {
        m.set_column(j, v);
    }
    m
}

/// Numerical rank from singular values relative to the largest one.
pub fn rank(m: &CMat, rel_tol: f64) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let s = m.clone().svd(false, false);
    let top = s.singular_values.iter().cloned().fold(0.0, f64::max);
    if top == 0.0 {
        return 0;
    }
    s.singular_values.iter().filter(|&&x| x > rel_tol * top).count()
}

/// Determinant of `x` restricted to the invariant subspace spanned by the
/// metric-orthonormal columns `basis`: `det(B* M X B)`.
pub fn det_on_subspace(metric: &CMat, x: &CMat, basis: &[CVec]) -> C64 {
    let k = basis.len();
    if k == 0 {
        return ONE;
    }
    let b = columns_to_matrix(x.nrows(), basis);
    let m = b.adjoint() * metric * x * &b;
    m.determinant()
}

/// Pairwise-tree summation in fixed topology, independent of thread count.
pub fn tree_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        n => {
            let mid = n / 2;
            tree_sum(&xs[..mid]) + tree_sum(&xs[mid..])
        }
    }
}

/// Real linear least squares via SVD, returning `(solution, residual norm)`.
pub fn real_least_squares(a: &DMatrix<f64>, b: &DVector<f64>) -> (DVector<f64>, f64) {
    let svd = a.clone().svd(true, true);
    let x = svd
        .solve(b, 1e-12)
        .unwrap_or_else(|_| DVector::zeros(a.ncols()));
    let r = (a * &x - b).norm();
    (x, r)
}

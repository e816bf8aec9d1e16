//! Quasi-equivalence of quasifree pairs: norm bounds, the Hilbert–Schmidt
//! discriminant, family verdicts and the state-distance lower bound.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::implementers;
use crate::linalg::{self, inverse, real, CMat};
use crate::phase_space::{PhaseSpace, Presentation};
use crate::quasifree::{FormKind, QuasifreeForm, RawForm};

/// `(α, β)` with `α ∥f∥_S ≤ ∥f∥_{S'} ≤ β ∥f∥_S`, both sharp.
pub fn norm_equivalence_bounds(f: &QuasifreeForm, f2: &QuasifreeForm) -> Result<(f64, f64)> {
    let pencil = inverse(f.gram())? * f2.gram();
    let (vals, _) = f.frame().spectrum(&pencil);
    let lo = vals.first().copied().unwrap_or(1.0).max(0.0);
    let hi = vals.last().copied().unwrap_or(1.0).max(0.0);
    Ok((lo.sqrt(), hi.sqrt()))
}

/// `1 - ρ(S) e^{-χ(S)} e^{χ(S')} ρ(S')`.
pub fn discriminant(f: &QuasifreeForm, f2: &QuasifreeForm) -> Result<CMat> {
    let d = f.space().dim();
    let rho = f.rho()?;
    let rho2 = f2.rho()?;
    let chi_fn = |s: f64| (2.0 * (s * (1.0 - s)).max(0.0).sqrt()).min(1.0).atanh();
    let e_minus = f.function(|s| real((-chi_fn(s)).exp()));
    let e_plus = f2.function(|s| real(chi_fn(s).exp()));
    Ok(CMat::identity(d, d) - rho * e_minus * e_plus * rho2)
}

/// `∥M∥²_HS` with adjoints taken in the metric of `S`.
pub fn hs_discriminant(f: &QuasifreeForm, f2: &QuasifreeForm) -> Result<f64> {
    let m = discriminant(f, f2)?;
    Ok(f.frame().hs_norm_sq(&m))
}

/// `2 {1 - det_{P̂K̂} (P̂_S P̂_{S'} P̂_S)^{-1/4}}` on the doubled space.
pub fn state_distance_lower_bound(f: &QuasifreeForm, f2: &QuasifreeForm) -> Result<f64> {
    let interior = |q: &QuasifreeForm| q.spectrum().0.iter().all(|&s| s > 1e-12 && s < 1.0 - 1e-12);
    if !interior(f) || !interior(f2) {
        return Err(Error::InvalidArgument("state-distance bound needs 0 < S < 1 for both forms".into()));
    }
    let (p, p2) = doubled_pair(f, f2)?;
    let ph = p.s_op();
    let x = ph * p2.s_op() * ph;
    let basis = linalg::metric_orthonormalize(p.gram(), ph, 1e-8);
    let det = linalg::det_on_subspace(p.gram(), &x, &basis).re;
    if det <= 0.0 {
        return Err(Error::Geometry(format!("restricted determinant {det:.3e} is not positive")));
    }
    Ok(2.0 * (1.0 - det.powf(-0.25)))
}

/// Same quantity via `det (cosh θ̂)^{-1/2}` of the doubled projections.
pub fn state_distance_via_overlap(f: &QuasifreeForm, f2: &QuasifreeForm) -> Result<f64> {
    let (p, p2) = doubled_pair(f, f2)?;
    Ok(2.0 * (1.0 - implementers::vacuum_overlap(&p, &p2)?))
}

fn doubled_pair(f: &QuasifreeForm, f2: &QuasifreeForm) -> Result<(QuasifreeForm, QuasifreeForm)> {
    let a = f.double()?;
    let b = f2.double()?;
    Ok((a.hat_form, b.hat_form))
}

#[derive(Clone, Debug, Serialize)]
pub struct PairReport {
    pub alpha: f64,
    pub beta: f64,
    pub hs_discriminant: f64,
    pub kind: FormKind,
    pub kind_prime: FormKind,
    /// Exactly one of the two forms is a basis projection; such pairs are
    /// never quasi-equivalent in the infinite-mode limit.
    pub cross_case: bool,
}

pub fn classify_pair(f: &QuasifreeForm, f2: &QuasifreeForm, tol: f64) -> Result<PairReport> {
    let (alpha, beta) = norm_equivalence_bounds(f, f2)?;
    let hs = hs_discriminant(f, f2)?;
    let kind = f.validate(tol).kind;
    let kind_prime = f2.validate(tol).kind;
    let cross_case = (kind == FormKind::BasisProjection) != (kind_prime == FormKind::BasisProjection);
    Ok(PairReport { alpha, beta, hs_discriminant: hs, kind, kind_prime, cross_case })
}

/// Arithmetic expression in the mode index `k`.
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(f64),
    K,
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Sqrt(Box<Expr>),
}

impl Expr {
    pub fn parse(src: &str) -> Result<Expr> {
        let mut p = Parser { s: src.as_bytes(), pos: 0 };
        let e = p.expr()?;
        p.ws();
        if p.pos != p.s.len() {
            return Err(Error::Parse(format!("unexpected input at offset {} in {src:?}", p.pos)));
        }
        Ok(e)
    }

    pub fn eval(&self, k: f64) -> f64 {
        match self {
            Expr::Num(x) => *x,
            Expr::K => k,
            Expr::Neg(a) => -a.eval(k),
            Expr::Add(a, b) => a.eval(k) + b.eval(k),
            Expr::Sub(a, b) => a.eval(k) - b.eval(k),
            Expr::Mul(a, b) => a.eval(k) * b.eval(k),
            Expr::Div(a, b) => a.eval(k) / b.eval(k),
            Expr::Pow(a, b) => a.eval(k).powf(b.eval(k)),
            Expr::Sqrt(a) => a.eval(k).sqrt(),
        }
    }
}

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.ws();
        self.s.get(self.pos).copied()
    }

    fn err(&self, what: &str) -> Error {
        Error::Parse(format!("{what} at offset {}", self.pos))
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        while let Some(c) = self.peek() {
            match c {
                b'+' => {
                    self.pos += 1;
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                b'-' => {
                    self.pos += 1;
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => break,
            }
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        while let Some(c) = self.peek() {
            match c {
                b'*' => {
                    self.pos += 1;
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
                }
                b'/' => {
                    self.pos += 1;
                    lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
                }
                _ => break,
            }
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.peek() == Some(b'-') {
            self.pos += 1;
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        if self.peek() == Some(b'+') {
            self.pos += 1;
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let exp = self.unary()?;
            return Ok(Expr::Pow(Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.err("expected ')'"));
                }
                self.pos += 1;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => {
                let start = self.pos;
                while self.pos < self.s.len() && (self.s[self.pos].is_ascii_digit() || self.s[self.pos] == b'.') {
                    self.pos += 1;
                }
                if self.pos < self.s.len() && (self.s[self.pos] == b'e' || self.s[self.pos] == b'E') {
                    let save = self.pos;
                    self.pos += 1;
                    if self.pos < self.s.len() && (self.s[self.pos] == b'-' || self.s[self.pos] == b'+') {
                        self.pos += 1;
                    }
                    let digits = self.pos;
                    while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
                        self.pos += 1;
                    }
                    if self.pos == digits {
                        self.pos = save;
                    }
                }
                let text = std::str::from_utf8(&self.s[start..self.pos]).expect("ascii");
                text.parse().map(Expr::Num).map_err(|_| self.err("bad number"))
            }
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                while self.pos < self.s.len() && self.s[self.pos].is_ascii_alphanumeric() {
                    self.pos += 1;
                }
                match &self.s[start..self.pos] {
                    b"k" => Ok(Expr::K),
                    b"sqrt" => {
                        if self.peek() != Some(b'(') {
                            return Err(self.err("expected '(' after sqrt"));
                        }
                        Ok(Expr::Sqrt(Box::new(self.atom()?)))
                    }
                    _ => {
                        self.pos = start;
                        Err(self.err("unknown identifier"))
                    }
                }
            }
            _ => Err(self.err("expected a number, k, sqrt or '('")),
        }
    }
}

/// Parameters accepted either as numbers or as expressions in `k`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Param {
    Number(f64),
    Text(String),
}

impl Param {
    pub fn expr(&self) -> Result<Expr> {
        match self {
            Param::Number(x) => Ok(Expr::Num(*x)),
            Param::Text(s) => Expr::parse(s),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Generator {
    /// One mode per block, thermal with `ν = sinh²τ` on both sides.
    ThermalPair { tau: Param, tau_prime: Param },
    Explicit { blocks: Vec<ExplicitBlock> },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExplicitBlock {
    pub form: RawForm,
    pub form_prime: RawForm,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FamilySpec {
    pub generator: Generator,
    pub n_max: usize,
}

/// Lazily generated sequence of independent block pairs.
pub struct ModeFamily {
    source: Source,
    pub n_max: usize,
}

enum Source {
    Thermal { tau: Expr, tau_prime: Expr, space: PhaseSpace },
    Explicit(Vec<ExplicitBlock>),
}

impl ModeFamily {
    pub fn from_spec(spec: &FamilySpec) -> Result<Self> {
        let source = match &spec.generator {
            Generator::ThermalPair { tau, tau_prime } => Source::Thermal {
                tau: tau.expr()?,
                tau_prime: tau_prime.expr()?,
                space: PhaseSpace::build_standard(1, Presentation::Diagonal)?,
            },
            Generator::Explicit { blocks } => {
                if blocks.len() < spec.n_max {
                    return Err(Error::InvalidArgument(format!(
                        "n_max = {} but only {} explicit blocks given",
                        spec.n_max,
                        blocks.len()
                    )));
                }
                Source::Explicit(blocks.clone())
            }
        };
        Ok(ModeFamily { source, n_max: spec.n_max })
    }

    pub fn thermal(tau: &str, tau_prime: &str, n_max: usize) -> Result<Self> {
        ModeFamily::from_spec(&FamilySpec {
            generator: Generator::ThermalPair {
                tau: Param::Text(tau.into()),
                tau_prime: Param::Text(tau_prime.into()),
            },
            n_max,
        })
    }

    /// Block `k` (1-based).
    pub fn block(&self, k: usize) -> Result<(QuasifreeForm, QuasifreeForm)> {
        match &self.source {
            Source::Thermal { tau, tau_prime, space } => {
                let t = tau.eval(k as f64);
                let t2 = tau_prime.eval(k as f64);
                if !t.is_finite() || !t2.is_finite() {
                    return Err(Error::InvalidArgument(format!("non-finite τ at k = {k}")));
                }
                let a = QuasifreeForm::thermal(space, &[t.sinh().powi(2)])?;
                let b = QuasifreeForm::thermal(space, &[t2.sinh().powi(2)])?;
                Ok((a, b))
            }
            Source::Explicit(blocks) => {
                let b = &blocks[k - 1];
                let f = QuasifreeForm::from_raw(RawForm { space: b.form.space.clone(), sigma: b.form.sigma.clone() })?;
                let g = QuasifreeForm::from_raw(RawForm {
                    space: b.form_prime.space.clone(),
                    sigma: b.form_prime.sigma.clone(),
                })?;
                Ok((f, g))
            }
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct Thresholds {
    pub divergence_threshold: f64,
    pub convergence_tail: f64,
    pub alpha_min: f64,
    pub beta_max: f64,
    /// Fraction of the prefix (from the end) used for slope fits.
    pub fit_fraction: f64,
    pub min_points: usize,
    pub validation_tol: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            divergence_threshold: 50.0,
            convergence_tail: 1e-3,
            alpha_min: 1e-3,
            beta_max: 1e3,
            fit_fraction: 0.5,
            min_points: 4,
            validation_tol: 1e-9,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Outcome {
    Equivalent,
    Inequivalent,
    Inconclusive,
}

#[derive(Clone, Debug, Serialize)]
pub struct BlockEvidence {
    pub k: usize,
    pub t: f64,
    pub alpha: f64,
    pub beta: f64,
    pub projection: bool,
    pub projection_prime: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct Verdict {
    pub outcome: Outcome,
    pub reason: String,
    pub n_max: usize,
    pub total: f64,
    pub term_slope: Option<f64>,
    pub partial_sum_slope: Option<f64>,
    pub tail_bound: Option<f64>,
    pub alpha_inf: f64,
    pub beta_sup: f64,
    pub cross_case: bool,
    pub thresholds: Thresholds,
    #[serde(skip)]
    pub blocks: Vec<BlockEvidence>,
    #[serde(skip)]
    pub partial_sums: Vec<f64>,
}

impl Verdict {
    /// `k,t_k,partial_sum,alpha_k,beta_k` rows.
    pub fn csv(&self) -> String {
        let mut out = String::from("k,t_k,partial_sum,alpha_k,beta_k\n");
        for (b, s) in self.blocks.iter().zip(&self.partial_sums) {
            out.push_str(&format!("{},{:.15e},{:.15e},{:.15e},{:.15e}\n", b.k, b.t, s, b.alpha, b.beta));
        }
        out
    }
}

fn evaluate_block(fam: &ModeFamily, k: usize, tol: f64) -> Result<BlockEvidence> {
    let (f, f2) = fam.block(k)?;
    for (name, q) in [("S", &f), ("S'", &f2)] {
        let r = q.validate(tol);
        if !r.is_valid() {
            let bad: Vec<String> = r.report.failures().map(|c| c.name.clone()).collect();
            return Err(Error::InvalidArgument(format!("{name} fails validation: {}", bad.join(", "))));
        }
    }
    let (alpha, beta) = norm_equivalence_bounds(&f, &f2)?;
    let t = hs_discriminant(&f, &f2)?;
    Ok(BlockEvidence {
        k,
        t,
        alpha,
        beta,
        projection: f.is_projection(tol.sqrt()),
        projection_prime: f2.is_projection(tol.sqrt()),
    })
}

/// Least-squares slope of `log y` against `log x`.
fn loglog_slope(points: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        None
    } else {
        Some(sxy / sxx)
    }
}

/// Discriminant terms at this level are rounding noise of an exact zero.
const NEGLIGIBLE_TERM: f64 = 1e-24;

pub fn classify_family(fam: &ModeFamily, th: &Thresholds) -> Result<Verdict> {
    let n = fam.n_max;
    let blocks: Vec<BlockEvidence> = (1..=n)
        .into_par_iter()
        .map(|k| evaluate_block(fam, k, th.validation_tol).map_err(|e| Error::Block { index: k, source: Box::new(e) }))
        .collect::<Result<Vec<_>>>()?;
    let terms: Vec<f64> = blocks.iter().map(|b| b.t).collect();
    let mut partial_sums = Vec::with_capacity(n);
    let mut acc = 0.0;
    for &t in &terms {
        acc += t;
        partial_sums.push(acc);
    }
    let total = linalg::tree_sum(&terms);
    let alpha_inf = blocks.iter().map(|b| b.alpha).fold(f64::INFINITY, f64::min);
    let beta_sup = blocks.iter().map(|b| b.beta).fold(0.0, f64::max);
    let all_proj = blocks.iter().all(|b| b.projection);
    let all_proj_prime = blocks.iter().all(|b| b.projection_prime);
    let cross_case = n > 0 && (all_proj != all_proj_prime);

    let start = ((n as f64) * (1.0 - th.fit_fraction)).floor() as usize;
    let tail: Vec<(f64, f64)> = (start..n).map(|i| ((i + 1) as f64, terms[i])).collect();
    let tail_sums: Vec<(f64, f64)> = (start..n).map(|i| ((i + 1) as f64, partial_sums[i])).collect();
    let term_slope = loglog_slope(&tail);
    let partial_sum_slope = loglog_slope(&tail_sums);
    let last_t = terms.last().copied().unwrap_or(0.0);
    let tail_bound = match term_slope {
        Some(p) if p < -1.0 => Some(last_t * n as f64 / (-p - 1.0)),
        _ if n > 0 && tail.iter().all(|&(_, t)| t <= NEGLIGIBLE_TERM) => {
            Some(tail.iter().map(|&(_, t)| t).fold(0.0, f64::max) * n as f64)
        }
        _ => None,
    };

    let mut verdict = Verdict {
        outcome: Outcome::Inconclusive,
        reason: String::new(),
        n_max: n,
        total,
        term_slope,
        partial_sum_slope,
        tail_bound,
        alpha_inf,
        beta_sup,
        cross_case,
        thresholds: th.clone(),
        blocks,
        partial_sums,
    };
    let (outcome, reason) = if n < th.min_points {
        (Outcome::Inconclusive, format!("prefix of {n} blocks is shorter than {}", th.min_points))
    } else if alpha_inf <= th.alpha_min || beta_sup >= th.beta_max {
        (Outcome::Inequivalent, "norm equivalence bounds are not uniform".to_string())
    } else if cross_case {
        (
            Outcome::Inequivalent,
            "one side consists of basis projections and the other does not".to_string(),
        )
    } else if total > th.divergence_threshold && partial_sum_slope.is_some_and(|p| p > 0.0) {
        (Outcome::Inequivalent, "discriminant partial sums grow past the divergence threshold".to_string())
    } else if tail_bound.is_some_and(|b| b < th.convergence_tail) {
        (Outcome::Equivalent, "discriminant terms decay with a summable tail".to_string())
    } else {
        (Outcome::Inconclusive, "prefix neither diverges nor shows a summable tail".to_string())
    };
    verdict.outcome = outcome;
    verdict.reason = reason;
    Ok(verdict)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parser_handles_precedence() {
        let e = Expr::parse("0.5 + 1/k^2 * 2").unwrap();
        assert!((e.eval(2.0) - 1.0).abs() < 1e-15);
        assert!((Expr::parse("-k^2").unwrap().eval(3.0) + 9.0).abs() < 1e-15);
        assert!((Expr::parse("1/sqrt(k)").unwrap().eval(4.0) - 0.5).abs() < 1e-15);
        assert!((Expr::parse("2e-1*k").unwrap().eval(5.0) - 1.0).abs() < 1e-15);
        assert!(Expr::parse("1/x").is_err());
        assert!(Expr::parse("(1").is_err());
    }
}

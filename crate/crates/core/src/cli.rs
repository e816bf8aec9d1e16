//! The `qfsp` command line.
//!
//! Every command prints one JSON report on stdout (and to `--out` when
//! given) and maps its result to an exit code:
//! 0 pass/equivalent, 1 math-invalid, 2 parse, 3 inequivalent,
//! 4 inconclusive, 5 insufficient cutoff.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::classifier::{self, FamilySpec, ModeFamily, Outcome, Thresholds};
use crate::error::{Error, Result};
use crate::fock::{FockOperator, TruncatedFock};
use crate::implementers::{self, SymplecticMap};
use crate::io::{self, tidy};
use crate::linalg::{CVec, C64, ONE};
use crate::modular::ModularData;
use crate::phase_space::PhaseSpace;
use crate::quasifree::{self, QuasifreeForm, RawForm};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_INEQUIVALENT: i32 = 3;
pub const EXIT_INCONCLUSIVE: i32 = 4;
pub const EXIT_CUTOFF: i32 = 5;

/// Largest dense Fock dimension a command will build.
pub const MAX_FOCK_DIM: usize = 6000;
/// Vacuum mass allowed beyond the cutoff before a command refuses to run.
pub const TAIL_LIMIT: f64 = 1e-4;
/// Smallest cutoff accepted by `modular`.
pub const MODULAR_MIN_CUTOFF: usize = 12;

#[derive(Parser, Debug)]
#[command(name = "qfsp", version, about = "Quasifree states, implementers and modular data")]
pub struct Cli {
    #[command(flatten)]
    pub config: RunConfig,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone, Default)]
pub struct RunConfig {
    /// Fock cutoff N (total occupation).
    #[arg(long, global = true)]
    pub cutoff: Option<usize>,
    /// Pass tolerance; each command has its own default.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[arg(long, global = true, default_value_t = 7)]
    pub seed: u64,
    #[arg(long, global = true, env = "QFSP_THREADS")]
    pub threads: Option<usize>,
    /// Write the JSON report here as well (and a CSV next to it for `classify`).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Run the slower brute-force cross-checks.
    #[arg(long, global = true)]
    pub bruteforce: bool,
    #[arg(long, global = true)]
    pub n_max: Option<usize>,
    #[arg(long, global = true)]
    pub thresholds: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Validate phase-space and form files.
    Validate { paths: Vec<PathBuf> },
    /// 2-, 4- and 6-point functions from the pairing formula.
    Moments { form: PathBuf },
    /// Vacuum overlap of a basis projection with its Bogoliubov transform.
    Overlap { projection: PathBuf, map: PathBuf },
    /// Polar parts, d_P distance, cocycle and continuity checks for a map.
    Implement { map: PathBuf, projection: PathBuf },
    /// Quasi-equivalence verdict for a family of mode blocks.
    Classify { family: PathBuf },
    /// Modular operator and conjugation residuals for a mixed state.
    Modular { form: PathBuf },
}

/// A finished command: exit code, JSON report and optional CSV series.
#[derive(Debug, Clone)]
pub struct Response {
    pub code: i32,
    pub report: String,
    pub csv: Option<String>,
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parse(_) | Error::Json(_) | Error::Io(_) => EXIT_PARSE,
        Error::InsufficientCutoff(_) => EXIT_CUTOFF,
        Error::Inconclusive(_) => EXIT_INCONCLUSIVE,
        Error::Block { source, .. } => match exit_code(source) {
            EXIT_PARSE => EXIT_PARSE,
            _ => EXIT_INVALID,
        },
        _ => EXIT_INVALID,
    }
}

fn error_report(e: &Error) -> Value {
    let mut v = json!({ "error": e.to_string(), "exit_code": exit_code(e) });
    if let Error::Block { index, .. } = e {
        v["block"] = json!(index);
    }
    v
}

fn tidy_value(v: &mut Value) {
    match v {
        Value::Number(n) => {
            if let Some(x) = n.as_f64() {
                if !(n.is_i64() || n.is_u64()) {
                    *v = json!(tidy(x));
                }
            }
        }
        Value::Array(a) => a.iter_mut().for_each(tidy_value),
        Value::Object(o) => o.values_mut().for_each(tidy_value),
        _ => {}
    }
}

fn render(mut v: Value) -> String {
    tidy_value(&mut v);
    let mut s = serde_json::to_string_pretty(&v).unwrap_or_else(|_| "{}".into());
    s.push('\n');
    s
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).unwrap_or(Value::Null)
}

/// Parse arguments and run; clap errors map to the parse exit code.
pub fn run_args<I, T>(args: I) -> Response
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(&cli),
        Err(e) => {
            let code = if e.use_stderr() { EXIT_PARSE } else { EXIT_PASS };
            Response { code, report: e.to_string(), csv: None }
        }
    }
}

pub fn run(cli: &Cli) -> Response {
    let go = || dispatch(&cli.command, &cli.config);
    let result = match cli.config.threads {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build() {
            Ok(pool) => pool.install(go),
            Err(e) => Err(Error::InvalidArgument(format!("thread pool: {e}"))),
        },
        None => go(),
    };
    match result {
        Ok((code, v, csv)) => Response { code, report: render(v), csv },
        Err(e) => Response { code: exit_code(&e), report: render(error_report(&e)), csv: None },
    }
}

/// Print the report, write `--out` files and return the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let args: Vec<T> = args.into_iter().collect();
    let out = Cli::try_parse_from(args.clone()).ok().and_then(|c| c.config.out);
    let resp = run_args(args);
    print!("{}", resp.report);
    if let Some(path) = out {
        if let Err(e) = write_outputs(&path, &resp) {
            eprintln!("qfsp: cannot write {}: {e}", path.display());
            return EXIT_PARSE;
        }
    }
    resp.code
}

fn write_outputs(path: &Path, resp: &Response) -> std::io::Result<()> {
    std::fs::write(path, &resp.report)?;
    if let Some(csv) = &resp.csv {
        std::fs::write(path.with_extension("csv"), csv)?;
    }
    Ok(())
}

type Outputs = (i32, Value, Option<String>);

fn dispatch(cmd: &Command, cfg: &RunConfig) -> Result<Outputs> {
    if let Some(t) = cfg.tol {
        if t.is_nan() || t <= 0.0 {
            return Err(Error::InvalidArgument("--tol must be positive".into()));
        }
    }
    if let Some(n) = cfg.cutoff {
        if n < 4 {
            return Err(Error::InsufficientCutoff(format!("N = {n} < 4")));
        }
    }
    match cmd {
        Command::Validate { paths } => cmd_validate(paths, cfg),
        Command::Moments { form } => cmd_moments(form, cfg),
        Command::Overlap { projection, map } => cmd_overlap(projection, map, cfg),
        Command::Implement { map, projection } => cmd_implement(map, projection, cfg),
        Command::Classify { family } => cmd_classify(family, cfg),
        Command::Modular { form } => cmd_modular(form, cfg),
    }
}

fn read_form(path: &Path) -> Result<QuasifreeForm> {
    let raw: RawForm = io::read_json(path)?;
    QuasifreeForm::from_raw(raw)
}

fn read_map(path: &Path, ps: &PhaseSpace, tol: f64) -> Result<SymplecticMap> {
    let u: SymplecticMap = io::read_json(path)?;
    let r = u.validate(ps, tol);
    if !r.is_valid() {
        let bad: Vec<String> = r.failures().map(|c| format!("{} ({:.2e})", c.name, c.residual)).collect();
        return Err(Error::Geometry(format!("map is not symplectic: {}", bad.join(", "))));
    }
    Ok(u)
}

fn require_valid(f: &QuasifreeForm, tol: f64) -> Result<()> {
    let r = f.validate(tol);
    if r.is_valid() {
        return Ok(());
    }
    let bad: Vec<String> = r.report.failures().map(|c| c.name.clone()).collect();
    Err(Error::InvalidArgument(format!("form fails validation: {}", bad.join(", "))))
}

fn fock_space(f: &QuasifreeForm, cutoff: usize) -> Result<TruncatedFock> {
    let dim = crate::fock::fock_dimension(f.space().n_modes(), cutoff);
    if dim > MAX_FOCK_DIM {
        return Err(Error::InvalidArgument(format!(
            "Fock dimension {dim} at N = {cutoff} exceeds {MAX_FOCK_DIM}; lower --cutoff"
        )));
    }
    TruncatedFock::new(f, cutoff)
}

fn cmd_validate(paths: &[PathBuf], cfg: &RunConfig) -> Result<Outputs> {
    let tol = cfg.tol.unwrap_or(1e-9);
    let mut files = Vec::new();
    let mut all = true;
    for path in paths {
        let value: Value = io::read_json(path)?;
        let entry = if value.get("Sigma").is_some() {
            let raw: RawForm = serde_json::from_value(value).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
            let space = raw.space.validate(tol);
            let form = quasifree::validate_form(&raw.space, &raw.sigma, tol);
            let valid = space.is_valid() && form.is_valid();
            all &= valid;
            json!({
                "path": path.display().to_string(),
                "type": "form",
                "valid": valid,
                "kind": form.kind,
                "space_checks": space.checks,
                "checks": form.report.checks,
            })
        } else {
            let ps: PhaseSpace =
                serde_json::from_value(value).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
            let r = ps.validate(tol);
            all &= r.is_valid();
            json!({
                "path": path.display().to_string(),
                "type": "phase_space",
                "valid": r.is_valid(),
                "checks": r.checks,
            })
        };
        files.push(entry);
    }
    let code = if all { EXIT_PASS } else { EXIT_INVALID };
    Ok((code, json!({ "tol": tol, "valid": all, "files": files }), None))
}

fn random_vector(rng: &mut ChaCha8Rng, d: usize, scale: f64) -> CVec {
    CVec::from_fn(d, |_, _| C64::new(rng.random_range(-scale..scale), rng.random_range(-scale..scale)))
}

fn cmd_moments(path: &Path, cfg: &RunConfig) -> Result<Outputs> {
    let tol = cfg.tol.unwrap_or(1e-8);
    let cutoff = cfg.cutoff.unwrap_or(8);
    let f = read_form(path)?;
    require_valid(&f, 1e-9)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let d = f.space().dim();

    let oracle = if cfg.bruteforce {
        if cutoff < 6 {
            return Err(Error::InsufficientCutoff(format!("N = {cutoff} < 6 for 6-point functions")));
        }
        let doubled = f.double()?;
        let fk = fock_space(&doubled.hat_form, cutoff)?;
        Some((doubled, fk))
    } else {
        None
    };

    let mut rows = Vec::new();
    let mut worst = 0.0f64;
    for order in [2usize, 4, 6] {
        let vectors: Vec<CVec> = (0..order).map(|_| random_vector(&mut rng, d, 0.5)).collect();
        let (value, count) = f.moment_with_count(&vectors);
        let mut row = json!({
            "order": order,
            "pairings": count,
            "expected_pairings": quasifree::pairing_count(order / 2),
            "formula": io::complex_pair(value),
        });
        if let Some((doubled, fk)) = &oracle {
            let mut v = fk.vacuum();
            for g in vectors.iter().rev() {
                v = fk.field(&doubled.embed(g)).apply(&v);
            }
            let brute = fk.vacuum().dotc(&v);
            let rel = (brute - value).norm() / value.norm().max(1e-300);
            worst = worst.max(rel);
            row["bruteforce"] = json!(io::complex_pair(brute));
            row["relative_error"] = json!(rel);
        }
        rows.push(row);
    }
    let passed = oracle.is_none() || worst <= tol;
    let report = json!({ "seed": cfg.seed, "tol": tol, "moments": rows, "passed": passed });
    Ok((if passed { EXIT_PASS } else { EXIT_INVALID }, report, None))
}

fn guard_tail(p: &QuasifreeForm, p2: &QuasifreeForm, cutoff: usize) -> Result<f64> {
    let tail = implementers::truncation_tail(p, p2, cutoff)?;
    if tail > TAIL_LIMIT {
        return Err(Error::InsufficientCutoff(format!(
            "vacuum mass {tail:.3e} beyond N = {cutoff} exceeds {TAIL_LIMIT:.0e}"
        )));
    }
    Ok(tail)
}

fn require_projection(p: &QuasifreeForm) -> Result<()> {
    require_valid(p, 1e-9)?;
    if !p.is_projection(1e-8) {
        return Err(Error::NotAProjection);
    }
    Ok(())
}

fn cocycle_value(est: &implementers::CocycleEstimate) -> Value {
    json!({ "raw": est.raw, "sign": est.sign })
}

fn cmd_overlap(p_path: &Path, u_path: &Path, cfg: &RunConfig) -> Result<Outputs> {
    let tol = cfg.tol.unwrap_or(1e-6);
    let cutoff = cfg.cutoff.unwrap_or(40);
    let p = read_form(p_path)?;
    require_projection(&p)?;
    let u = read_map(u_path, p.space(), 1e-9)?;
    let p2 = p.transform(&u.u)?;
    let tail = guard_tail(&p, &p2, cutoff)?;

    let overlap_det = implementers::vacuum_overlap(&p, &p2)?;
    let fk = fock_space(&p, cutoff)?;
    let t = implementers::implement_t(&fk, &p2)?;
    let psi = fk.vacuum();
    let brute = psi.dotc(&t.apply(&psi));
    let difference = (brute - C64::new(overlap_det, 0.0)).norm();
    let theta_spectrum = implementers::theta_spectrum(&p, &p2)?;
    let ui = u.inverse(p.space());
    let cocycle = implementers::cocycle(&fk, &u, &ui, cutoff.saturating_sub(2), tol)?;

    let passed = difference <= tol;
    let report = json!({
        "cutoff": cutoff,
        "tol": tol,
        "overlap_det": overlap_det,
        "overlap_bruteforce": brute.re,
        "overlap_bruteforce_im": brute.im,
        "difference": difference,
        "truncation_tail": tail,
        "theta_spectrum": theta_spectrum,
        "cocycle": cocycle.sign,
        "cocycle_estimate": cocycle_value(&cocycle),
        "passed": passed,
    });
    Ok((if passed { EXIT_PASS } else { EXIT_INVALID }, report, None))
}

fn cmd_implement(u_path: &Path, p_path: &Path, cfg: &RunConfig) -> Result<Outputs> {
    let tol = cfg.tol.unwrap_or(1e-10);
    let fock_tol = 1e-6;
    let cutoff = cfg.cutoff.unwrap_or(40);
    let p = read_form(p_path)?;
    require_projection(&p)?;
    let ps = p.space().clone();
    let u = read_map(u_path, &ps, 1e-9)?;
    let d = ps.dim();

    let parts = implementers::polar(&u, &p)?;
    let checks = parts.checks(&u, &p, tol);
    let dp = implementers::dp_distance(&u, &SymplecticMap::identity(d), &p);
    let corner = implementers::corner_hs(&u, &p);
    let bound = implementers::continuity_bound(&u, &p);
    let tail = guard_tail(&p, &parts.transported, cutoff)?;

    let fk = fock_space(&p, cutoff)?;
    let q = implementers::metaplectic(&fk, &u, ONE)?;
    let psi = fk.vacuum();
    let moved = (q.apply(&psi) - &psi).norm_squared();
    let bound_ok = moved <= bound + fock_tol;

    let ui = u.inverse(&ps);
    let slack = cutoff.saturating_sub(2);
    let mut cocycles = Vec::new();
    let mut cocycles_ok = true;
    let qi = implementers::metaplectic(&fk, &ui, ONE)?;
    let q1 = implementers::metaplectic(&fk, &u.compose(&ui), ONE)?;
    for (name, a, b) in [("U,U^-1", &q, &qi), ("U^-1,U", &qi, &q)] {
        let est = implementers::cocycle_from(&fk, a, b, &q1, slack, fock_tol)?;
        cocycles_ok &= est.sign.is_some();
        let mut v = cocycle_value(&est);
        v["pair"] = json!(name);
        cocycles.push(v);
    }

    let mut report = json!({
        "cutoff": cutoff,
        "tol": tol,
        "positive": io::matrix_rows(&parts.positive.u),
        "rotation": io::matrix_rows(&parts.rotation.u),
        "polar_checks": checks.checks,
        "dp_distance": dp,
        "corner_hs": corner,
        "continuity": { "moved": moved, "bound": bound, "passed": bound_ok },
        "truncation_tail": tail,
        "cocycles": cocycles,
    });

    let mut intertwining_ok = true;
    if cfg.bruteforce {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let cols = fk.low_sector(1);
        let qm = &q.matrix;
        let mut worst = 0.0f64;
        for _ in 0..4 {
            let f = random_vector(&mut rng, d, 0.5);
            let bf = fk.field(&f).matrix;
            let rhs = fk.field(&(&u.u * &f)).matrix;
            let mut acc = 0.0;
            for &j in &cols {
                let v: CVec = qm.row(j).adjoint();
                let lhs = qm * (&bf * v);
                acc += (lhs - rhs.column(j)).norm_squared();
            }
            worst = worst.max(acc.sqrt());
        }
        intertwining_ok = worst <= fock_tol;
        report["intertwining_residual"] = json!(worst);
    }

    let passed = checks.is_valid() && bound_ok && cocycles_ok && intertwining_ok;
    report["passed"] = json!(passed);
    Ok((if passed { EXIT_PASS } else { EXIT_INVALID }, report, None))
}

fn cmd_classify(path: &Path, cfg: &RunConfig) -> Result<Outputs> {
    let mut spec: FamilySpec = io::read_json(path)?;
    if let Some(n) = cfg.n_max {
        spec.n_max = n;
    }
    let mut th: Thresholds = match &cfg.thresholds {
        Some(p) => io::read_json(p)?,
        None => Thresholds::default(),
    };
    if let Some(t) = cfg.tol {
        th.validation_tol = t;
    }
    let fam = ModeFamily::from_spec(&spec)?;
    let verdict = classifier::classify_family(&fam, &th)?;
    let code = match verdict.outcome {
        Outcome::Equivalent => EXIT_PASS,
        Outcome::Inequivalent => EXIT_INEQUIVALENT,
        Outcome::Inconclusive => EXIT_INCONCLUSIVE,
    };
    Ok((code, to_value(&verdict), Some(verdict.csv())))
}

fn cmd_modular(path: &Path, cfg: &RunConfig) -> Result<Outputs> {
    let tol = cfg.tol.unwrap_or(1e-6);
    let cutoff = cfg.cutoff.unwrap_or(30);
    let f = read_form(path)?;
    require_valid(&f, 1e-9)?;
    crate::modular::one_particle_modular(&f)?;
    if cutoff < MODULAR_MIN_CUTOFF {
        return Err(Error::InsufficientCutoff(format!("modular checks need N ≥ {MODULAR_MIN_CUTOFF}, got {cutoff}")));
    }
    let n_modes = 2 * f.space().n_modes();
    let dim = crate::fock::fock_dimension(n_modes, cutoff);
    if dim > MAX_FOCK_DIM {
        return Err(Error::InvalidArgument(format!(
            "Fock dimension {dim} at N = {cutoff} exceeds {MAX_FOCK_DIM}; lower --cutoff"
        )));
    }
    let md = ModularData::new(&f, cutoff)?;
    let d = f.space().dim();
    let psi = md.fock.vacuum();

    let units: Vec<CVec> = (0..d)
        .map(|k| {
            let mut e = CVec::zeros(d);
            e[k] = ONE;
            e
        })
        .collect();
    let fields: Vec<FockOperator> = units.iter().map(|e| md.field(e)).collect();
    let mut monomials: Vec<FockOperator> = fields.clone();
    for i in 0..d {
        for j in i..d {
            monomials.push(fields[i].compose(&fields[j]));
        }
    }

    let mut invariance = Vec::new();
    for t in [0.3, 1.0, 2.5] {
        invariance.push(crate::linalg::vec_norm(&(md.delta_it(t).apply(&psi) - &psi)));
    }
    let tomita: Vec<f64> = monomials
        .iter()
        .map(|a| {
            let scale = crate::linalg::vec_norm(&a.adjoint().apply(&psi)).max(1.0);
            md.tomita_residual(a, &a.adjoint()) / scale
        })
        .collect();
    let mut kms = Vec::new();
    for a in &fields {
        for b in &fields {
            let scale = md.vacuum_expectation(&b.compose(a)).norm().max(1.0);
            kms.push(md.kms_residual(a, b) / scale);
        }
    }
    let mut flow = Vec::new();
    for (k, e) in units.iter().enumerate() {
        flow.push(md.flow_residual(e, 0.5 + k as f64 * 0.25));
    }
    let mut spectrum: Vec<f64> = f.spectrum().0.iter().map(|&s| (s / (1.0 - s)).ln()).collect();
    spectrum.sort_by(f64::total_cmp);

    let worst = invariance
        .iter()
        .chain(&tomita)
        .chain(&kms)
        .chain(&flow)
        .fold(0.0f64, |m, &x| m.max(x));
    let passed = worst <= tol;
    let report = json!({
        "cutoff": cutoff,
        "tol": tol,
        "H_S_spectrum": spectrum,
        "vacuum_invariance": invariance,
        "tomita_residuals": tomita,
        "kms_residuals": kms,
        "flow_residuals": flow,
        "omega_commutator": md.omega_commutator,
        "omega_antiunitary": md.omega_antiunitary,
        "passed": passed,
    });
    Ok((if passed { EXIT_PASS } else { EXIT_INVALID }, report, None))
}

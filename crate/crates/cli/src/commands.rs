//! Execution of a validated [`RunConfig`].

use crate::config::{Command, Format, RunConfig};
use crate::output::{cplxs, emit, fmt17, matrix_rows, reals, to_json, Cplx, Real, SCAN_HEADER};
use farey_spectral::matrices::{build_system, BuildOptions, PrecisionMode, Sign, TruncatedSystem};
use farey_spectral::oracle::{verify_with_config, OracleReport, Suite};
use farey_spectral::solver::{
    refine, scan_line, solve_inhomogeneous, IndicatorSample, RefineMode, ScanOutcome, SolverOptions,
};
use farey_spectral::Complex64;
use serde::Serialize;
use std::fmt::Write as _;

/// Exit code on success.
pub const EXIT_OK: i32 = 0;
/// Exit code on a numerical failure (including failed verification).
pub const EXIT_NUMERICAL: i32 = 1;
/// Exit code on a usage error.
pub const EXIT_USAGE: i32 = 2;

/// Failure of a run after successful parsing.
#[derive(Debug)]
pub enum RunError {
    Numerical(farey_spectral::Error),
    Io(std::io::Error),
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Numerical(e) => write!(f, "{e}"),
            RunError::Io(e) => write!(f, "output: {e}"),
        }
    }
}

impl From<farey_spectral::Error> for RunError {
    fn from(e: farey_spectral::Error) -> Self {
        RunError::Numerical(e)
    }
}

impl From<std::io::Error> for RunError {
    fn from(e: std::io::Error) -> Self {
        RunError::Io(e)
    }
}

fn build_options(cfg: &RunConfig) -> BuildOptions {
    BuildOptions {
        precision: if cfg.high_precision { PrecisionMode::Extended } else { PrecisionMode::Auto },
        extended_bits: None,
        quadrature: cfg.quadrature,
    }
}

fn solver_options(cfg: &RunConfig) -> SolverOptions {
    SolverOptions {
        build: build_options(cfg),
        threads: None,
    }
}

fn sign_name(sign: Sign) -> &'static str {
    match sign {
        Sign::Plus => "plus",
        Sign::Minus => "minus",
    }
}

/// Execute `cfg`; returns the process exit code.
pub fn run(cfg: &RunConfig) -> i32 {
    match dispatch(cfg) {
        Ok(code) => code,
        Err(e) => {
            log::error!("{e}");
            eprintln!("error: {e}");
            EXIT_NUMERICAL
        }
    }
}

fn dispatch(cfg: &RunConfig) -> Result<i32, RunError> {
    match cfg.command {
        Command::Entries => entries(cfg),
        Command::Psi => psi(cfg),
        Command::Scan => scan(cfg),
        Command::Refine => refine_cmd(cfg),
        Command::SolveB => solve_b(cfg),
        Command::Verify => verify(cfg),
    }
}

/// JSON document written by `entries`.
#[derive(Debug, Serialize)]
pub struct EntriesDump {
    pub q: Cplx,
    pub order: usize,
    pub precision: &'static str,
    pub max_cancellation: Real,
    pub sign: &'static str,
    pub a_plus: Vec<Vec<Cplx>>,
    pub a_minus: Vec<Vec<Cplx>>,
    /// `Ã = D^{−1/2} A D^{−1/2}` for the selected sign.
    pub a_tilde: Vec<Vec<Cplx>>,
    pub d: Vec<Real>,
    pub psi: Vec<Cplx>,
    pub psi_tilde: Vec<Cplx>,
}

impl EntriesDump {
    pub fn new(system: &TruncatedSystem, sign: Sign) -> Self {
        Self {
            q: Cplx(system.q().q()),
            order: system.order(),
            precision: if system.is_extended() { "extended" } else { "double" },
            max_cancellation: Real(system.max_cancellation()),
            sign: sign_name(sign),
            a_plus: matrix_rows(system.a_plus()),
            a_minus: matrix_rows(system.a_minus()),
            a_tilde: matrix_rows(system.symmetrized(sign)),
            d: reals(system.d()),
            psi: cplxs(system.psi()),
            psi_tilde: cplxs(system.psi_tilde()),
        }
    }
}

fn entries(cfg: &RunConfig) -> Result<i32, RunError> {
    let system = build_system(cfg.q(), cfg.order, &build_options(cfg))?;
    let text = match cfg.format {
        Format::Json => to_json(&EntriesDump::new(&system, cfg.operator_sign))?,
        Format::Csv => {
            let mut s = String::from("matrix,k,n,re,im\n");
            let tilde = system.symmetrized(cfg.operator_sign);
            for (name, m) in [("a_plus", system.a_plus()), ("a_minus", system.a_minus()), ("a_tilde", tilde)] {
                for k in 0..m.nrows() {
                    for n in 0..m.ncols() {
                        let z = m[(k, n)];
                        let _ = writeln!(s, "{name},{k},{n},{},{}", fmt17(z.re), fmt17(z.im));
                    }
                }
            }
            for (k, d) in system.d().iter().enumerate() {
                let _ = writeln!(s, "d,{k},0,{},{}", fmt17(*d), fmt17(0.0));
            }
            for (name, v) in [("psi", system.psi()), ("psi_tilde", system.psi_tilde())] {
                for (k, z) in v.iter().enumerate() {
                    let _ = writeln!(s, "{name},{k},0,{},{}", fmt17(z.re), fmt17(z.im));
                }
            }
            s
        }
    };
    emit(cfg.out_path.as_deref(), &text)?;
    Ok(EXIT_OK)
}

#[derive(Debug, Serialize)]
struct PsiDump {
    q: Cplx,
    count: usize,
    precision: &'static str,
    psi: Vec<Cplx>,
}

fn psi(cfg: &RunConfig) -> Result<i32, RunError> {
    let system = build_system(cfg.q(), cfg.count, &build_options(cfg))?;
    let text = match cfg.format {
        Format::Json => to_json(&PsiDump {
            q: Cplx(system.q().q()),
            count: cfg.count,
            precision: if system.is_extended() { "extended" } else { "double" },
            psi: cplxs(system.psi()),
        })?,
        Format::Csv => {
            let mut s = String::from("n,psi_re,psi_im\n");
            for (n, z) in system.psi().iter().enumerate() {
                let _ = writeln!(s, "{n},{},{}", fmt17(z.re), fmt17(z.im));
            }
            s
        }
    };
    emit(cfg.out_path.as_deref(), &text)?;
    Ok(EXIT_OK)
}

/// One scan row: a grid point and its sample, if any.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanRow {
    pub q: Complex64,
    pub sample: Option<IndicatorSample>,
}

/// All grid points of a scan in grid order; skipped and failed points
/// carry no sample.
pub fn scan_rows(outcome: &ScanOutcome) -> Vec<ScanRow> {
    let mut rows: Vec<ScanRow> = outcome
        .samples
        .iter()
        .map(|s| ScanRow { q: s.q, sample: Some(*s) })
        .chain(outcome.skipped.iter().map(|(q, _)| ScanRow { q: *q, sample: None }))
        .chain(outcome.failed.iter().map(|(q, _)| ScanRow { q: *q, sample: None }))
        .collect();
    rows.sort_by(|a, b| a.q.im.total_cmp(&b.q.im));
    rows
}

/// The scan CSV: [`SCAN_HEADER`] and one row per grid point; points
/// without a sample have `NaN` in the numeric columns.
pub fn scan_csv(rows: &[ScanRow], order: usize, problem: &str) -> String {
    let mut s = String::with_capacity(64 * (rows.len() + 1));
    s.push_str(SCAN_HEADER);
    s.push('\n');
    for row in rows {
        let (ind, eig) = match row.sample {
            Some(smp) => (smp.indicator, smp.nearest_eig),
            None => (f64::NAN, Complex64::new(f64::NAN, f64::NAN)),
        };
        let _ = writeln!(
            s,
            "{},{},{order},{problem},{},{},{}",
            fmt17(row.q.re),
            fmt17(row.q.im),
            fmt17(ind),
            fmt17(eig.re),
            fmt17(eig.im)
        );
    }
    s
}

#[derive(Debug, Serialize)]
struct SampleJson {
    q: Cplx,
    order: usize,
    problem: &'static str,
    indicator: Real,
    nearest_eig: Cplx,
}

fn scan(cfg: &RunConfig) -> Result<i32, RunError> {
    let grid = cfg.grid.expect("validated: scan has a grid");
    let outcome = scan_line(cfg.problem, cfg.q_re, grid.im_from, grid.im_to, grid.step, cfg.order, &solver_options(cfg))?;
    let rows = scan_rows(&outcome);
    let problem = cfg.problem.name();
    let text = match cfg.format {
        Format::Csv => scan_csv(&rows, cfg.order, problem),
        Format::Json => {
            let items: Vec<SampleJson> = rows
                .iter()
                .map(|r| SampleJson {
                    q: Cplx(r.q),
                    order: cfg.order,
                    problem,
                    indicator: Real(r.sample.map_or(f64::NAN, |s| s.indicator)),
                    nearest_eig: Cplx(r.sample.map_or(Complex64::new(f64::NAN, f64::NAN), |s| s.nearest_eig)),
                })
                .collect();
            to_json(&items)?
        }
    };
    emit(cfg.out_path.as_deref(), &text)?;
    for (q, e) in &outcome.failed {
        eprintln!("failed at q = {}{:+}i: {e}", q.re, q.im);
    }
    Ok(if outcome.failed.is_empty() { EXIT_OK } else { EXIT_NUMERICAL })
}

#[derive(Debug, Serialize)]
struct RefineJson {
    q0: Cplx,
    q: Cplx,
    order: usize,
    problem: &'static str,
    indicator: Real,
    evaluations: usize,
}

fn refine_cmd(cfg: &RunConfig) -> Result<i32, RunError> {
    let q0 = cfg.q().q();
    let mode = if cfg.both { RefineMode::Both } else { RefineMode::ImaginaryOnly };
    let r = refine(cfg.problem, q0, cfg.radius, cfg.order, cfg.tol, mode, &solver_options(cfg))?;
    let text = match cfg.format {
        Format::Json => to_json(&RefineJson {
            q0: Cplx(q0),
            q: Cplx(r.q),
            order: cfg.order,
            problem: cfg.problem.name(),
            indicator: Real(r.indicator),
            evaluations: r.evaluations,
        })?,
        Format::Csv => format!(
            "re_q,im_q,order,problem,indicator,evaluations\n{},{},{},{},{},{}\n",
            fmt17(r.q.re),
            fmt17(r.q.im),
            cfg.order,
            cfg.problem.name(),
            fmt17(r.indicator),
            r.evaluations
        ),
    };
    emit(cfg.out_path.as_deref(), &text)?;
    Ok(EXIT_OK)
}

#[derive(Debug, Serialize)]
struct FailureJson {
    order: usize,
    reason: String,
}

#[derive(Debug, Serialize)]
struct DiagnosticJson {
    q: Cplx,
    orders: Vec<usize>,
    solution_norms: Vec<Real>,
    residuals: Vec<Real>,
    growth_exponent: Real,
    failures: Vec<FailureJson>,
}

fn solve_b(cfg: &RunConfig) -> Result<i32, RunError> {
    let d = solve_inhomogeneous(cfg.q(), &cfg.orders, &solver_options(cfg))?;
    let text = match cfg.format {
        Format::Json => to_json(&DiagnosticJson {
            q: Cplx(d.q),
            orders: d.orders.clone(),
            solution_norms: reals(&d.solution_norms),
            residuals: reals(&d.residuals),
            growth_exponent: Real(d.growth_exponent),
            failures: d.failures.iter().map(|(n, r)| FailureJson { order: *n, reason: r.clone() }).collect(),
        })?,
        Format::Csv => {
            let mut s = String::from("order,solution_norm,residual,growth_exponent\n");
            for ((n, norm), res) in d.orders.iter().zip(&d.solution_norms).zip(&d.residuals) {
                let _ = writeln!(s, "{n},{},{},{}", fmt17(*norm), fmt17(*res), fmt17(d.growth_exponent));
            }
            s
        }
    };
    emit(cfg.out_path.as_deref(), &text)?;
    for (n, reason) in &d.failures {
        eprintln!("order {n}: {reason}");
    }
    Ok(if d.failures.is_empty() { EXIT_OK } else { EXIT_NUMERICAL })
}

#[derive(Debug, Serialize)]
struct ReportJson<'a> {
    suite: &'static str,
    target: &'a str,
    closed_form: Cplx,
    oracle: Cplx,
    rel_error: Real,
    tolerance: Real,
    nodes: usize,
    passed: bool,
}

fn verify(cfg: &RunConfig) -> Result<i32, RunError> {
    let suites: Vec<Suite> = match cfg.suite {
        Some(s) => vec![s],
        None => Suite::ALL.to_vec(),
    };
    let mut all: Vec<(Suite, OracleReport)> = Vec::new();
    for suite in suites {
        let reports = verify_with_config(suite, &cfg.quadrature)?;
        let failed = reports.iter().filter(|r| !r.passed()).count();
        eprintln!("{}: {} checks, {} failed", suite.name(), reports.len(), failed);
        all.extend(reports.into_iter().map(|r| (suite, r)));
    }
    let text = match cfg.format {
        Format::Json => {
            let items: Vec<ReportJson> = all
                .iter()
                .map(|(s, r)| ReportJson {
                    suite: s.name(),
                    target: &r.target,
                    closed_form: Cplx(r.closed_form),
                    oracle: Cplx(r.oracle_value),
                    rel_error: Real(r.rel_error),
                    tolerance: Real(r.tolerance),
                    nodes: r.node_count,
                    passed: r.passed(),
                })
                .collect();
            to_json(&items)?
        }
        Format::Csv => {
            let mut s = String::from("suite,target,closed_re,closed_im,oracle_re,oracle_im,rel_error,tolerance,nodes,status\n");
            for (suite, r) in &all {
                let _ = writeln!(
                    s,
                    "{},\"{}\",{},{},{},{},{},{},{},{}",
                    suite.name(),
                    r.target.replace('"', "\"\""),
                    fmt17(r.closed_form.re),
                    fmt17(r.closed_form.im),
                    fmt17(r.oracle_value.re),
                    fmt17(r.oracle_value.im),
                    fmt17(r.rel_error),
                    fmt17(r.tolerance),
                    r.node_count,
                    if r.passed() { "PASS" } else { "FAIL" }
                );
            }
            s
        }
    };
    emit(cfg.out_path.as_deref(), &text)?;
    Ok(if all.iter().all(|(_, r)| r.passed()) { EXIT_OK } else { EXIT_NUMERICAL })
}

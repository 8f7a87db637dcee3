//! Command-line and config-file parsing into a validated [`RunConfig`].
//!
//! Precedence is flags > config file > built-in defaults.  The config file
//! holds `key = value` lines whose keys are the long flag names without
//! the leading dashes; `#` starts a comment.

use clap::{Parser, ValueEnum};
use farey_spectral::matrices::Sign;
use farey_spectral::oracle::Suite;
use farey_spectral::quadrature::QuadratureConfig;
use farey_spectral::solver::{Problem, MAX_ORDER};
use farey_spectral::SpectralParameter;
use std::path::{Path, PathBuf};

/// A usage problem: unknown flag, missing field or violated constraint.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage<T>(msg: impl Into<String>) -> Result<T, UsageError> {
    Err(UsageError(msg.into()))
}

/// Sub-command to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    /// Dump the truncated matrices A±, Ã±, the weights d and Ψ.
    Entries,
    /// The inhomogeneous vector Ψ_n for n < count.
    Psi,
    /// Indicator scan along a vertical line.
    Scan,
    /// Golden-section refinement of an indicator minimum.
    Refine,
    /// Norm-growth diagnostic of the inhomogeneous system.
    SolveB,
    /// Oracle verification suites.
    Verify,
}

/// Operator sign selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SignArg {
    Plus,
    Minus,
}

impl From<SignArg> for Sign {
    fn from(s: SignArg) -> Sign {
        match s {
            SignArg::Plus => Sign::Plus,
            SignArg::Minus => Sign::Minus,
        }
    }
}

/// Problem selector (mirrors [`Problem`]).
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProblemArg {
    HomogeneousPlus,
    HomogeneousMinus,
    Inhomogeneous,
}

impl From<ProblemArg> for Problem {
    fn from(p: ProblemArg) -> Problem {
        match p {
            ProblemArg::HomogeneousPlus => Problem::HomogeneousPlus,
            ProblemArg::HomogeneousMinus => Problem::HomogeneousMinus,
            ProblemArg::Inhomogeneous => Problem::Inhomogeneous,
        }
    }
}

/// Output encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// Raw flags; every field optional so that file values and defaults can
/// fill the gaps.
#[derive(Debug, Clone, Default, Parser)]
#[command(
    name = "farey-spectral",
    version,
    about = "Laguerre-basis systems for the Farey transfer operators at complex temperature",
    after_help = "Precedence: flags > --config file (key = value lines) > defaults.\n\
                  FAREY_SPECTRAL_THREADS caps the number of scan workers.\n\
                  Exit codes: 0 success, 1 numerical failure, 2 usage error."
)]
pub struct Flags {
    /// Sub-command.
    #[arg(value_enum)]
    pub command: Option<Command>,
    /// Re q.
    #[arg(long, allow_hyphen_values = true)]
    pub re: Option<f64>,
    /// Im q (default 0).
    #[arg(long, allow_hyphen_values = true)]
    pub im: Option<f64>,
    /// Truncation order N (default 20).
    #[arg(long)]
    pub order: Option<usize>,
    /// Operator sign for `entries` (default plus).
    #[arg(long, value_enum)]
    pub sign: Option<SignArg>,
    /// Problem for `scan` / `refine` (default homogeneous-plus).
    #[arg(long, value_enum)]
    pub problem: Option<ProblemArg>,
    /// Scan start (Im q).
    #[arg(long, allow_hyphen_values = true)]
    pub im_from: Option<f64>,
    /// Scan end (Im q, inclusive).
    #[arg(long, allow_hyphen_values = true)]
    pub im_to: Option<f64>,
    /// Scan step.
    #[arg(long, allow_hyphen_values = true)]
    pub step: Option<f64>,
    /// Refinement tolerance on |Δq| (default 1e-3).
    #[arg(long, allow_hyphen_values = true)]
    pub tol: Option<f64>,
    /// Refinement search radius (default 0.05).
    #[arg(long, allow_hyphen_values = true)]
    pub radius: Option<f64>,
    /// Refine over both Re q and Im q instead of Im q only.
    #[arg(long)]
    pub both: bool,
    /// Truncation orders for `solve-b`, comma separated (default 40,80,120).
    #[arg(long, value_delimiter = ',')]
    pub orders: Option<Vec<usize>>,
    /// Number of Ψ_n for `psi` (default 10).
    #[arg(long)]
    pub count: Option<usize>,
    /// Verification suite (default: all).
    #[arg(long)]
    pub suite: Option<String>,
    /// Gauss–Legendre nodes per finite panel.
    #[arg(long)]
    pub finite_nodes: Option<usize>,
    /// Gauss–Laguerre nodes on the half-line.
    #[arg(long)]
    pub semi_infinite_nodes: Option<usize>,
    /// Force extended-precision assembly (otherwise chosen automatically).
    #[arg(long)]
    pub high_precision: bool,
    /// Output file (written atomically); stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Output format (default: csv for scan, json otherwise).
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Config file of `key = value` lines.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

/// Scan grid along `Re q = re`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanGrid {
    pub im_from: f64,
    pub im_to: f64,
    pub step: f64,
}

/// Validated run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub q_re: f64,
    pub q_im: f64,
    pub order: usize,
    pub operator_sign: Sign,
    pub problem: Problem,
    /// Present iff `command == Scan`.
    pub grid: Option<ScanGrid>,
    pub tol: f64,
    pub radius: f64,
    pub both: bool,
    pub orders: Vec<usize>,
    pub count: usize,
    /// `None` runs every suite.
    pub suite: Option<Suite>,
    pub quadrature: QuadratureConfig,
    pub high_precision: bool,
    pub out_path: Option<PathBuf>,
    pub format: Format,
}

impl RunConfig {
    /// The validated spectral parameter (commands other than `scan` and
    /// `verify`).
    pub fn q(&self) -> SpectralParameter {
        SpectralParameter::from_parts(self.q_re, self.q_im).expect("validated at parse time")
    }
}

pub const DEFAULT_ORDER: usize = 20;
pub const DEFAULT_TOL: f64 = 1e-3;
pub const DEFAULT_RADIUS: f64 = 0.05;
pub const DEFAULT_COUNT: usize = 10;
pub const DEFAULT_ORDERS: [usize; 3] = [40, 80, 120];

/// Parse `key = value` lines into the argument list they stand for.
pub fn config_file_args(text: &str, origin: &Path) -> Result<Vec<String>, UsageError> {
    let mut args = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return usage(format!("{}:{}: expected `key = value`", origin.display(), lineno + 1));
        };
        let (key, value) = (key.trim(), value.trim());
        match key {
            "command" | "config" => {
                return usage(format!("{}:{}: `{key}` cannot be set from a config file", origin.display(), lineno + 1))
            }
            "both" | "high-precision" => match value {
                "true" => args.push(format!("--{key}")),
                "false" => {}
                _ => return usage(format!("{}:{}: `{key}` expects true or false", origin.display(), lineno + 1)),
            },
            _ => {
                args.push(format!("--{key}"));
                args.push(value.to_string());
            }
        }
    }
    Ok(args)
}

fn parse_flags<I, T>(argv: I) -> Result<Flags, UsageError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    Flags::try_parse_from(argv).map_err(|e| UsageError(e.render().to_string().trim_end().to_string()))
}

fn merge(flags: Flags, file: Flags) -> Flags {
    Flags {
        command: flags.command,
        re: flags.re.or(file.re),
        im: flags.im.or(file.im),
        order: flags.order.or(file.order),
        sign: flags.sign.or(file.sign),
        problem: flags.problem.or(file.problem),
        im_from: flags.im_from.or(file.im_from),
        im_to: flags.im_to.or(file.im_to),
        step: flags.step.or(file.step),
        tol: flags.tol.or(file.tol),
        radius: flags.radius.or(file.radius),
        both: flags.both || file.both,
        orders: flags.orders.or(file.orders),
        count: flags.count.or(file.count),
        suite: flags.suite.or(file.suite),
        finite_nodes: flags.finite_nodes.or(file.finite_nodes),
        semi_infinite_nodes: flags.semi_infinite_nodes.or(file.semi_infinite_nodes),
        high_precision: flags.high_precision || file.high_precision,
        out: flags.out.or(file.out),
        format: flags.format.or(file.format),
        config: flags.config,
    }
}

fn positive(name: &str, v: f64) -> Result<f64, UsageError> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        usage(format!("--{name} must be a positive finite number, got {v}"))
    }
}

fn finite(name: &str, v: f64) -> Result<f64, UsageError> {
    if v.is_finite() {
        Ok(v)
    } else {
        usage(format!("--{name} must be finite, got {v}"))
    }
}

fn check_order(name: &str, n: usize) -> Result<usize, UsageError> {
    if (1..=MAX_ORDER).contains(&n) {
        Ok(n)
    } else {
        usage(format!("--{name} must lie in 1..={MAX_ORDER}, got {n}"))
    }
}

/// Parse and validate `argv` (including the program name).
pub fn parse_args<I, T>(argv: I) -> Result<RunConfig, UsageError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let flags = parse_flags(argv)?;
    let flags = match &flags.config {
        None => flags,
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| UsageError(format!("--config {}: {e}", path.display())))?;
            let mut file_argv = vec!["farey-spectral".to_string()];
            file_argv.extend(config_file_args(&text, path)?);
            let file = parse_flags(file_argv).map_err(|e| UsageError(format!("--config {}: {e}", path.display())))?;
            merge(flags, file)
        }
    };
    validate(flags)
}

fn validate(f: Flags) -> Result<RunConfig, UsageError> {
    let Some(command) = f.command else {
        return usage("missing sub-command (entries, psi, scan, refine, solve-b, verify)");
    };
    let grid_given = f.im_from.is_some() || f.im_to.is_some() || f.step.is_some();
    let grid = if command == Command::Scan {
        let im_from = f.im_from.ok_or_else(|| UsageError("scan requires --im-from".into()))?;
        let im_to = f.im_to.ok_or_else(|| UsageError("scan requires --im-to".into()))?;
        let step = f.step.ok_or_else(|| UsageError("scan requires --step".into()))?;
        finite("im-from", im_from)?;
        finite("im-to", im_to)?;
        positive("step", step)?;
        if im_to < im_from {
            return usage(format!("--im-to ({im_to}) must not be below --im-from ({im_from})"));
        }
        Some(ScanGrid { im_from, im_to, step })
    } else {
        if grid_given {
            return usage("--im-from/--im-to/--step are only valid for scan");
        }
        None
    };

    let needs_q = !matches!(command, Command::Verify);
    let q_re = match (f.re, needs_q) {
        (Some(re), _) => finite("re", re)?,
        (None, true) => return usage(format!("{} requires --re", command_name(command))),
        (None, false) => 1.0,
    };
    let q_im = finite("im", f.im.unwrap_or(0.0))?;
    if needs_q {
        if q_re <= 0.0 {
            return usage(format!("--re: Re q must be positive, got {q_re}"));
        }
        if command != Command::Scan {
            SpectralParameter::from_parts(q_re, q_im).map_err(|e| UsageError(format!("--re/--im: {e}")))?;
        }
    }

    let order = check_order("order", f.order.unwrap_or(DEFAULT_ORDER))?;
    let tol = positive("tol", f.tol.unwrap_or(DEFAULT_TOL))?;
    let radius = positive("radius", f.radius.unwrap_or(DEFAULT_RADIUS))?;
    let orders = f.orders.unwrap_or_else(|| DEFAULT_ORDERS.to_vec());
    if orders.is_empty() {
        return usage("--orders must not be empty");
    }
    for &n in &orders {
        check_order("orders", n)?;
    }
    if orders.windows(2).any(|w| w[1] < w[0]) {
        return usage("--orders must be non-decreasing");
    }
    let count = f.count.unwrap_or(DEFAULT_COUNT);
    if count == 0 || count > MAX_ORDER {
        return usage(format!("--count must lie in 1..={MAX_ORDER}, got {count}"));
    }
    let suite = match f.suite.as_deref() {
        None | Some("all") => None,
        Some(name) => Some(Suite::from_name(name).ok_or_else(|| {
            let names: Vec<&str> = Suite::ALL.iter().map(|s| s.name()).collect();
            UsageError(format!("--suite: unknown suite `{name}` (expected all, {})", names.join(", ")))
        })?),
    };
    let mut quadrature = QuadratureConfig::default();
    if let Some(n) = f.finite_nodes {
        if n == 0 {
            return usage("--finite-nodes must be positive");
        }
        quadrature.finite_nodes = n;
    }
    if let Some(n) = f.semi_infinite_nodes {
        if n == 0 {
            return usage("--semi-infinite-nodes must be positive");
        }
        quadrature.semi_infinite_nodes = n;
    }
    let format = f.format.unwrap_or(if command == Command::Scan { Format::Csv } else { Format::Json });

    Ok(RunConfig {
        command,
        q_re,
        q_im,
        order,
        operator_sign: f.sign.unwrap_or(SignArg::Plus).into(),
        problem: f.problem.unwrap_or(ProblemArg::HomogeneousPlus).into(),
        grid,
        tol,
        radius,
        both: f.both,
        orders,
        count,
        suite,
        quadrature,
        high_precision: f.high_precision,
        out_path: f.out,
        format,
    })
}

/// Name of a command as typed on the command line.
pub fn command_name(c: Command) -> &'static str {
    match c {
        Command::Entries => "entries",
        Command::Psi => "psi",
        Command::Scan => "scan",
        Command::Refine => "refine",
        Command::SolveB => "solve-b",
        Command::Verify => "verify",
    }
}

//! Detection of admissible solutions of the truncated systems.
//!
//! * Homogeneous problems `Ã± Φ̃ = Φ̃`: the indicator is
//!   `σ_min(I − Ã±)`, reported together with the eigenvalue `μ` of `Ã±`
//!   nearest to 1.  For systems assembled in extended precision both are
//!   read off the extended-precision inverse `X = (I − Ã±)^{−1}`:
//!   `σ_min = 1/σ_max(X)` and `μ = 1 − 1/λ_max(X)`, so the entries of order
//!   `10^{16}` never meet double-precision subtraction.  Since
//!   `σ_max(X) ≥ |λ_max(X)|`, the invariant `σ_min ≤ |1 − μ|` holds by
//!   construction.
//! * Inhomogeneous problem `(Ã⁺ − I) Φ̃ = Ψ̃`: norms of the solutions over
//!   increasing orders and the least-squares slope of `ln ‖Φ̃_N‖` against
//!   `ln N`; a stabilising norm (slope ≈ 0) marks admissibility.

use crate::error::{Error, Result};
use crate::hp::{vec_norm, HpComplex};
use crate::matrices::{build_system, BuildOptions, CoefficientVector, Sign, TruncatedSystem};
use crate::specfun::SpectralParameter;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// Environment variable capping the number of scan workers.
pub const THREADS_ENV: &str = "FAREY_SPECTRAL_THREADS";
/// Largest truncation order accepted by the dense solvers.
pub const MAX_ORDER: usize = 300;

/// Which system a sample refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Problem {
    /// `(M + N_q) φ = φ`.
    HomogeneousPlus,
    /// `(M − N_q) φ = φ`.
    HomogeneousMinus,
    /// `(I − M − N_q) φ = (M + N_q − I) χ_{−1}`; its indicator is that of
    /// the coefficient matrix `I − Ã⁺`.
    Inhomogeneous,
}

impl Problem {
    pub fn sign(self) -> Sign {
        match self {
            Problem::HomogeneousMinus => Sign::Minus,
            Problem::HomogeneousPlus | Problem::Inhomogeneous => Sign::Plus,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Problem::HomogeneousPlus => "homogeneous-plus",
            Problem::HomogeneousMinus => "homogeneous-minus",
            Problem::Inhomogeneous => "inhomogeneous",
        }
    }
}

impl fmt::Display for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Problem {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [Problem::HomogeneousPlus, Problem::HomogeneousMinus, Problem::Inhomogeneous]
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown problem `{s}`")))
    }
}

/// One evaluation of the detection functional.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IndicatorSample {
    pub q: Complex64,
    pub order: usize,
    /// `σ_min(I − Ã)`.
    pub indicator: f64,
    /// Eigenvalue of `Ã` nearest to 1.
    pub nearest_eig: Complex64,
    pub problem: Problem,
}

impl IndicatorSample {
    /// `|1 − μ|` for the nearest eigenvalue `μ`.
    pub fn eig_distance(&self) -> f64 {
        (self.nearest_eig - 1.0).norm()
    }
}

fn to_dmatrix(order: usize, data: Vec<Complex64>) -> DMatrix<Complex64> {
    DMatrix::from_row_slice(order, order, &data)
}

/// Deflation tolerances tried in turn (multiples of ε): the complex QR
/// iteration can stall on the tightly clustered spectra of the inverses,
/// and a looser deflation test only perturbs eigenvalues by `tol·‖m‖`.
const SCHUR_TOLERANCES: [f64; 7] = [1.0, 4.0, 16.0, 64.0, 256.0, 1024.0, 4096.0];

fn eigenvalues(m: DMatrix<Complex64>, q: Complex64) -> Result<Vec<Complex64>> {
    let n = m.nrows();
    let shifted = &m - DMatrix::<Complex64>::identity(n, n);
    for factor in SCHUR_TOLERANCES {
        for (matrix, shift) in [(&m, 0.0), (&shifted, 1.0)] {
            let Some(schur) = matrix.clone().try_schur(factor * f64::EPSILON, 30 * n.max(10)) else {
                continue;
            };
            if let Some(ev) = schur.eigenvalues() {
                return Ok(ev.iter().map(|z| z + shift).collect());
            }
        }
    }
    Err(Error::LinearAlgebra {
        q,
        reason: "Schur iteration did not converge".into(),
    })
}

fn largest_singular_value(m: DMatrix<Complex64>, q: Complex64, smallest: bool) -> Result<f64> {
    let svd = m.try_svd(false, false, f64::EPSILON, 10_000).ok_or_else(|| Error::LinearAlgebra {
        q,
        reason: "SVD did not converge".into(),
    })?;
    let values = svd.singular_values.iter().copied();
    Ok(if smallest { values.fold(f64::INFINITY, f64::min) } else { values.fold(0.0, f64::max) })
}

/// The extended-precision inverse `(I − Ã)^{−1}`, rounded.
fn extended_inverse(system: &TruncatedSystem, sign: Sign) -> Result<Option<DMatrix<Complex64>>> {
    let Some(ext) = system.extended() else {
        return Ok(None);
    };
    let b = ext.a_tilde(sign).identity_minus();
    let inv = b.inverse().ok_or_else(|| Error::LinearAlgebra {
        q: system.q().q(),
        reason: "I − Ã is exactly singular in extended precision".into(),
    })?;
    Ok(Some(to_dmatrix(system.order(), inv.to_c64())))
}

/// Indicator and nearest eigenvalue of `Ã±` for `problem`.
pub fn indicator(system: &TruncatedSystem, problem: Problem) -> Result<IndicatorSample> {
    let q = system.q().q();
    let order = system.order();
    let sign = problem.sign();
    let (indicator, nearest_eig) = if let Some(x) = extended_inverse(system, sign)? {
        let sigma_max = largest_singular_value(x.clone(), q, false)?;
        let lambda = eigenvalues(x, q)?
            .into_iter()
            .fold(Complex64::new(0.0, 0.0), |best, z| if z.norm() > best.norm() { z } else { best });
        if lambda.norm() == 0.0 || sigma_max == 0.0 {
            return Err(Error::LinearAlgebra {
                q,
                reason: "inverse has no nonzero spectrum".into(),
            });
        }
        (1.0 / sigma_max, 1.0 - 1.0 / lambda)
    } else {
        let a = system.symmetrized(sign);
        let b = DMatrix::<Complex64>::identity(order, order) - a;
        let sigma_min = largest_singular_value(b, q, true)?;
        let mu = eigenvalues(a.clone(), q)?
            .into_iter()
            .fold(None, |best: Option<Complex64>, z| match best {
                Some(b) if (b - 1.0).norm() <= (z - 1.0).norm() => Some(b),
                _ => Some(z),
            })
            .expect("order ≥ 1");
        (sigma_min, mu)
    };
    if !indicator.is_finite() || !nearest_eig.re.is_finite() || !nearest_eig.im.is_finite() {
        return Err(Error::LinearAlgebra {
            q,
            reason: "non-finite indicator".into(),
        });
    }
    Ok(IndicatorSample {
        q,
        order,
        indicator,
        nearest_eig,
        problem,
    })
}

/// Build options plus the worker cap for scans.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SolverOptions {
    pub build: BuildOptions,
    /// Worker count; `None` reads [`THREADS_ENV`] and falls back to the
    /// machine's parallelism.
    pub threads: Option<usize>,
}

fn check_order(order: usize) -> Result<()> {
    if order == 0 || order > MAX_ORDER {
        return Err(Error::InvalidInput(format!("truncation order must be in 1..={MAX_ORDER}, got {order}")));
    }
    Ok(())
}

/// Build the system at `q` and evaluate the indicator.
pub fn sample(problem: Problem, q: SpectralParameter, order: usize, opts: &SolverOptions) -> Result<IndicatorSample> {
    check_order(order)?;
    let system = build_system(q, order, &opts.build)?;
    indicator(&system, problem)
}

/// Worker count: explicit value, else [`THREADS_ENV`], else available
/// parallelism; never more than the machine offers.
pub fn thread_cap(explicit: Option<usize>) -> usize {
    let available = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    let requested = explicit.or_else(|| std::env::var(THREADS_ENV).ok().and_then(|v| v.trim().parse().ok()));
    requested.unwrap_or(available).clamp(1, available)
}

/// Result of a line scan: samples in grid order plus the points that were
/// skipped (inadmissible `q`) or failed numerically.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ScanOutcome {
    pub samples: Vec<IndicatorSample>,
    pub skipped: Vec<(Complex64, String)>,
    pub failed: Vec<(Complex64, Error)>,
}

impl ScanOutcome {
    /// Indices of strict local minima of the indicator over the samples.
    pub fn local_minima(&self) -> Vec<usize> {
        let v: Vec<f64> = self.samples.iter().map(|s| s.indicator).collect();
        (1..v.len().saturating_sub(1)).filter(|&i| v[i] < v[i - 1] && v[i] < v[i + 1]).collect()
    }
}

/// The grid `im_from, im_from + step, …` up to `im_to` (inclusive, with a
/// relative slack of `1e−9` steps).
pub fn scan_grid(im_from: f64, im_to: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !step.is_finite() {
        return Err(Error::InvalidInput(format!("scan step must be positive, got {step}")));
    }
    if !im_from.is_finite() || !im_to.is_finite() || im_to < im_from {
        return Err(Error::InvalidInput(format!("scan range [{im_from}, {im_to}] is empty")));
    }
    let count = ((im_to - im_from) / step + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|i| im_from + i as f64 * step).collect())
}

/// Indicator along `Re q = re_q`, `Im q ∈ [im_from, im_to]`.
pub fn scan_line(
    problem: Problem,
    re_q: f64,
    im_from: f64,
    im_to: f64,
    step: f64,
    order: usize,
    opts: &SolverOptions,
) -> Result<ScanOutcome> {
    check_order(order)?;
    let grid = scan_grid(im_from, im_to, step)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(thread_cap(opts.threads))
        .build()
        .map_err(|e| Error::InvalidInput(format!("cannot start scan workers: {e}")))?;
    let results: Vec<(Complex64, std::result::Result<Result<IndicatorSample>, String>)> = pool.install(|| {
        grid.par_iter()
            .map(|&im| {
                let qv = Complex64::new(re_q, im);
                match SpectralParameter::new(qv) {
                    Err(e) => (qv, Err(e.to_string())),
                    Ok(q) => (qv, Ok(sample(problem, q, order, opts))),
                }
            })
            .collect()
    });
    let mut out = ScanOutcome::default();
    for (qv, r) in results {
        match r {
            Err(reason) => {
                log::warn!("skipping q = {qv}: {reason}");
                out.skipped.push((qv, reason));
            }
            Ok(Err(e)) => {
                log::warn!("scan point q = {qv} failed: {e}");
                out.failed.push((qv, e));
            }
            Ok(Ok(s)) => out.samples.push(s),
        }
    }
    Ok(out)
}

/// Coordinates searched by [`refine`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum RefineMode {
    /// `Re q` fixed; the target sets lie on vertical lines.
    #[default]
    ImaginaryOnly,
    /// Alternating golden-section sweeps over `Im q` and `Re q`.
    Both,
}

/// Outcome of [`refine`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Refinement {
    pub q: Complex64,
    pub indicator: f64,
    pub evaluations: usize,
}

struct Objective<'a> {
    problem: Problem,
    order: usize,
    opts: &'a SolverOptions,
    evaluations: usize,
}

impl Objective<'_> {
    fn eval(&mut self, q: Complex64) -> Result<f64> {
        self.evaluations += 1;
        Ok(sample(self.problem, SpectralParameter::new(q)?, self.order, self.opts)?.indicator)
    }
}

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Golden-section minimisation of `f(t)` on `[a, b]` to width `tol`.
fn golden<F: FnMut(f64) -> Result<f64>>(mut a: f64, mut b: f64, tol: f64, mut f: F) -> Result<(f64, f64)> {
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d)?;
        }
    }
    Ok(if fc < fd { (c, fc) } else { (d, fd) })
}

/// Minimise the indicator near `q0` within `radius` to `|Δq| < tol`.
///
/// The indicator at `q0` must be strictly below its values on the
/// boundary samples `q0 ± i·radius` (and `q0 ± radius` in
/// [`RefineMode::Both`]); otherwise [`Error::NoInteriorMinimum`].  With
/// `tol ≥ radius` the search is degenerate and returns `q0`.
pub fn refine(
    problem: Problem,
    q0: Complex64,
    radius: f64,
    order: usize,
    tol: f64,
    mode: RefineMode,
    opts: &SolverOptions,
) -> Result<Refinement> {
    if !(radius > 0.0) || !(tol > 0.0) {
        return Err(Error::InvalidInput(format!("radius and tol must be positive, got {radius}, {tol}")));
    }
    check_order(order)?;
    let mut obj = Objective {
        problem,
        order,
        opts,
        evaluations: 0,
    };
    let f0 = obj.eval(q0)?;
    if tol >= radius {
        return Ok(Refinement {
            q: q0,
            indicator: f0,
            evaluations: obj.evaluations,
        });
    }
    let i = Complex64::new(0.0, 1.0);
    let mut boundary = vec![q0 + i * radius, q0 - i * radius];
    if mode == RefineMode::Both {
        boundary.push(q0 + radius);
        boundary.push(q0 - radius);
    }
    for b in boundary {
        if obj.eval(b)? <= f0 {
            return Err(Error::NoInteriorMinimum { q0, radius });
        }
    }
    let (re0, im0) = (q0.re, q0.im);
    let (mut re, mut im) = (re0, im0);
    let mut value = f0;
    for _sweep in 0..20 {
        let (prev_re, prev_im) = (re, im);
        let (new_im, v) = golden(im0 - radius, im0 + radius, tol, |y| obj.eval(Complex64::new(re, y)))?;
        im = new_im;
        value = v;
        if mode == RefineMode::ImaginaryOnly {
            break;
        }
        let (new_re, v) = golden(re0 - radius, re0 + radius, tol, |x| obj.eval(Complex64::new(x, im)))?;
        re = new_re;
        value = v;
        if (Complex64::new(re, im) - Complex64::new(prev_re, prev_im)).norm() < tol {
            break;
        }
    }
    Ok(Refinement {
        q: Complex64::new(re, im),
        indicator: value,
        evaluations: obj.evaluations,
    })
}

/// Norm behaviour of the inhomogeneous solutions over truncation orders.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InhomogeneousDiagnostic {
    pub q: Complex64,
    pub orders: Vec<usize>,
    /// `‖Φ̃_N‖` (plain ℓ², i.e. the weighted norm of `Φ_N`).
    pub solution_norms: Vec<f64>,
    /// `‖(Ã⁺ − I) Φ̃_N − Ψ̃‖`.
    pub residuals: Vec<f64>,
    /// Least-squares slope of `ln ‖Φ̃_N‖` against `ln N` over the last
    /// `⌈len/2⌉` orders (at least two); `0` for identically zero solutions.
    pub growth_exponent: f64,
    /// Orders at which the system could not be solved, with the reason.
    pub failures: Vec<(usize, String)>,
}

impl InhomogeneousDiagnostic {
    /// `|growth_exponent|`: distance from a stabilising norm.
    pub fn growth_magnitude(&self) -> f64 {
        self.growth_exponent.abs()
    }
}

/// Least-squares slope of `ln y` against `ln x` over the last `⌈len/2⌉`
/// points (at least two).
pub fn fit_growth_exponent(orders: &[usize], norms: &[f64]) -> f64 {
    let len = orders.len().min(norms.len());
    if len < 2 {
        return 0.0;
    }
    let take = len.div_ceil(2).max(2);
    let (xs, ys) = (&orders[len - take..len], &norms[len - take..len]);
    if ys.iter().any(|&y| !(y > 0.0)) {
        return 0.0;
    }
    let lx: Vec<f64> = xs.iter().map(|&x| (x as f64).ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = take as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return 0.0;
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    sxy / sxx
}

/// Solution `Φ̃` of `(Ã⁺ − I) Φ̃ = Ψ̃` and its residual norm.
pub fn solve_inhomogeneous_system(system: &TruncatedSystem) -> Result<(Vec<Complex64>, f64)> {
    let q = system.q().q();
    if let Some(ext) = system.extended() {
        let mut b = ext.a_tilde(Sign::Plus);
        let one = rug::Float::with_val(b.prec(), 1);
        for k in 0..system.order() {
            b[(k, k)].re -= &one;
        }
        let rhs = ext.psi_tilde();
        let x = b.solve(rhs).ok_or_else(|| Error::LinearAlgebra {
            q,
            reason: "Ã⁺ − I is exactly singular in extended precision".into(),
        })?;
        let mut r: Vec<HpComplex> = b.mul_vec(&x);
        for (ri, bi) in r.iter_mut().zip(rhs) {
            ri.sub_assign(bi);
        }
        return Ok((x.iter().map(HpComplex::to_c64).collect(), vec_norm(&r)));
    }
    let order = system.order();
    let b = system.symmetrized(Sign::Plus) - DMatrix::<Complex64>::identity(order, order);
    let rhs = DVector::from_column_slice(system.psi_tilde());
    let svd = b.clone().try_svd(true, true, f64::EPSILON, 10_000).ok_or_else(|| Error::LinearAlgebra {
        q,
        reason: "SVD did not converge".into(),
    })?;
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let x = svd
        .solve(&rhs, smax * order as f64 * f64::EPSILON)
        .map_err(|e| Error::LinearAlgebra { q, reason: e.to_string() })?;
    let residual = (&b * &x - &rhs).norm();
    Ok((x.iter().copied().collect(), residual))
}

/// Solve the inhomogeneous system at every order in `orders`
/// (non-decreasing) and fit the growth exponent.
pub fn solve_inhomogeneous(q: SpectralParameter, orders: &[usize], opts: &SolverOptions) -> Result<InhomogeneousDiagnostic> {
    if orders.is_empty() {
        return Err(Error::InvalidInput("no truncation orders given".into()));
    }
    if orders.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidInput("truncation orders must be non-decreasing".into()));
    }
    for &n in orders {
        check_order(n)?;
    }
    let mut diag = InhomogeneousDiagnostic {
        q: q.q(),
        orders: Vec::new(),
        solution_norms: Vec::new(),
        residuals: Vec::new(),
        growth_exponent: 0.0,
        failures: Vec::new(),
    };
    for &n in orders {
        let solved = build_system(q, n, &opts.build).and_then(|s| solve_inhomogeneous_system(&s));
        match solved {
            Ok((x, residual)) => {
                let norm = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                diag.orders.push(n);
                diag.solution_norms.push(norm);
                diag.residuals.push(residual);
            }
            Err(e) => {
                log::warn!("inhomogeneous solve at q = {}, N = {n} failed: {e}", q.q());
                diag.failures.push((n, e.to_string()));
            }
        }
    }
    diag.growth_exponent = fit_growth_exponent(&diag.orders, &diag.solution_norms);
    Ok(diag)
}

/// Eigenpair of `Ã±` with eigenvalue nearest 1.
#[derive(Debug, Clone)]
pub struct EigenPair {
    /// The eigenvalue `μ`.
    pub mu: Complex64,
    /// `Φ̃` with `‖Φ̃‖ = 1` and its largest component real positive.
    pub phi_tilde: Vec<Complex64>,
    /// Extended-precision Laguerre coefficients `Φ = D^{−1/2} Φ̃` when the
    /// system was assembled in extended precision.  Applying `N_q` to the
    /// rounded coefficients loses everything when `‖Ã‖ ≈ 10^{16}`.
    pub laguerre_hp: Option<Vec<HpComplex>>,
}

const INVERSE_ITERATIONS: usize = 500;

fn normalise_phase(v: &mut [Complex64]) {
    let (imax, _) = v.iter().enumerate().fold((0, 0.0), |b, (i, z)| if z.norm() > b.1 { (i, z.norm()) } else { b });
    if v.is_empty() || v[imax].norm() == 0.0 {
        return;
    }
    let phase = v[imax] / v[imax].norm();
    for z in v.iter_mut() {
        *z /= phase;
    }
}

/// Power iteration on the extended-precision inverse `X = (I − Ã)^{−1}`.
fn hp_eigenpair(system: &TruncatedSystem, sign: Sign) -> Result<Option<EigenPair>> {
    let Some(ext) = system.extended() else {
        return Ok(None);
    };
    let q = system.q().q();
    let prec = ext.prec();
    let x = ext.a_tilde(sign).identity_minus().inverse().ok_or_else(|| Error::LinearAlgebra {
        q,
        reason: "I − Ã is exactly singular in extended precision".into(),
    })?;
    let mut v: Vec<HpComplex> = (0..system.order()).map(|_| HpComplex::one(prec)).collect();
    let mut lambda = Complex64::new(0.0, 0.0);
    let mut scratch = crate::hp::Scratch::new(prec);
    for _ in 0..INVERSE_ITERATIONS {
        let norm = vec_norm(&v);
        if norm == 0.0 {
            return Err(Error::LinearAlgebra {
                q,
                reason: "inverse iteration collapsed".into(),
            });
        }
        let inv = rug::Float::with_val(prec, rug::Float::with_val(prec, 1) / norm);
        v.iter_mut().for_each(|z| z.mul_real(&inv));
        let w = x.mul_vec(&v);
        // Rayleigh quotient vᴴ w (‖v‖ = 1)
        let mut rq = HpComplex::zero(prec);
        for (vi, wi) in v.iter().zip(&w) {
            rq.add_mul(&vi.conj(), wi, &mut scratch);
        }
        let new_lambda = rq.to_c64();
        let done = (new_lambda - lambda).norm() <= 1e-15 * new_lambda.norm();
        v = w;
        lambda = new_lambda;
        if done {
            break;
        }
    }
    let norm = vec_norm(&v);
    let inv = rug::Float::with_val(prec, rug::Float::with_val(prec, 1) / norm);
    v.iter_mut().for_each(|z| z.mul_real(&inv));
    // fix the phase on the rounded vector, then apply it exactly
    let mut phi_tilde: Vec<Complex64> = v.iter().map(HpComplex::to_c64).collect();
    let raw = phi_tilde.clone();
    normalise_phase(&mut phi_tilde);
    let (imax, _) = raw.iter().enumerate().fold((0, 0.0), |b, (i, z)| if z.norm() > b.1 { (i, z.norm()) } else { b });
    let phase = HpComplex::from_c64(prec, raw[imax].conj() / raw[imax].norm());
    let laguerre_hp = v
        .iter()
        .zip(ext.sqrt_d())
        .map(|(z, sd)| {
            let mut c = z.mul(&phase);
            c.mul_real(&rug::Float::with_val(prec, rug::Float::with_val(prec, 1) / sd));
            c
        })
        .collect();
    Ok(Some(EigenPair {
        mu: 1.0 - 1.0 / lambda,
        phi_tilde,
        laguerre_hp: Some(laguerre_hp),
    }))
}

/// Eigenpair `(μ, Φ̃)` of `Ã±` with `μ` nearest 1, by power iteration on
/// `(I − Ã±)^{−1}` (in extended precision when the system has it).
pub fn nearest_eigenvector(system: &TruncatedSystem, sign: Sign) -> Result<EigenPair> {
    if let Some(pair) = hp_eigenpair(system, sign)? {
        return Ok(pair);
    }
    let q = system.q().q();
    let order = system.order();
    let b = DMatrix::<Complex64>::identity(order, order) - system.symmetrized(sign);
    let x = b.try_inverse().ok_or_else(|| Error::LinearAlgebra {
        q,
        reason: "I − Ã is singular".into(),
    })?;
    let mut v = DVector::from_element(order, Complex64::new(1.0, 0.0));
    let mut lambda = Complex64::new(0.0, 0.0);
    for _ in 0..INVERSE_ITERATIONS {
        let norm = v.norm();
        if norm == 0.0 {
            return Err(Error::LinearAlgebra {
                q,
                reason: "inverse iteration collapsed".into(),
            });
        }
        v /= Complex64::new(norm, 0.0);
        let w = &x * &v;
        let new_lambda = v.dotc(&w);
        let done = (new_lambda - lambda).norm() <= 1e-15 * new_lambda.norm();
        v = w;
        lambda = new_lambda;
        if done {
            break;
        }
    }
    let norm = v.norm();
    let mut phi_tilde: Vec<Complex64> = v.iter().map(|z| z / norm).collect();
    normalise_phase(&mut phi_tilde);
    Ok(EigenPair {
        mu: 1.0 - 1.0 / lambda,
        phi_tilde,
        laguerre_hp: None,
    })
}

/// `φ(t) = Σ Φ_n L_n^{2ξ−1}(t)` with `Φ = D^{−1/2} Φ̃`, at each sample.
pub fn reconstruct_phi(system: &TruncatedSystem, phi_tilde: &[Complex64], t_samples: &[f64]) -> Result<Vec<Complex64>> {
    if phi_tilde.len() != system.order() {
        return Err(Error::InvalidInput(format!(
            "{} coefficients for an order-{} system",
            phi_tilde.len(),
            system.order()
        )));
    }
    if let Some(t) = t_samples.iter().find(|t| !(**t >= 0.0) || !t.is_finite()) {
        return Err(Error::OutOfRange(format!("sample point t = {t} must be finite and ≥ 0")));
    }
    let phi = CoefficientVector::from_symmetrized(phi_tilde, system.q().xi())?;
    Ok(t_samples.iter().map(|&t| phi.eval(t)).collect())
}

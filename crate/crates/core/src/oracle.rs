//! Brute-force recomputation of the closed forms by direct quadrature.
//!
//! Every closed-form family of [`crate::matrices`] has a counterpart here
//! that integrates the defining inner product instead:
//!
//! * `(M L_n, L_k)_ξ = ∫ e^{−2t} L_n L_k t^{2ξ−1} dt` by Gauss–Laguerre;
//! * `(N_q L_n, L_k)_ξ` through `N_q L_n = e^{−t} Σ_ℓ c_{nℓ} L_ℓ^{2q−1}`, and,
//!   as a second opinion, through the Bessel-kernel double integral;
//! * `Ψ_n = ((I − M − N_q) χ_{−1}, L_n)_ξ / w_n` by a singularity-split rule;
//! * the transform `B_q[φ](z) = z^{−2q} ∫ e^{−t/z} φ(t) t^{2q−1} dt` and the
//!   intertwining identities `P_{0,q} B_q = B_q M`, `P_{1,q} B_q = B_q N_q`.
//!
//! The verify suites compare each pair at fixed tolerances and return one
//! [`OracleReport`] per comparison.

use crate::dynamics::{pointwise_operator_apply, TransferOperator};
use crate::error::{Error, Result};
use crate::hp::{HpComplex, Scratch};
use crate::matrices::{self, CoefficientVector, EntryTables, Sign};
use crate::quadrature::{
    endpoint_split_rule, integrate_power_singular, weighted_semiinfinite, QuadratureConfig,
    QuadratureRule,
};
use crate::specfun::{
    bessel_kernel, ln_factorial, ln_gamma_real, log_gamma, nq_chi, BesselKernel, LaguerreBasis, SpectralParameter,
};
use num_complex::Complex64;
use rayon::prelude::*;
use rug::Assign;
use serde::{Deserialize, Serialize};
use std::fmt;

/// `m_entry` vs its quadrature oracle (relative).
pub const M_ENTRY_TOL: f64 = 1e-10;
/// `n_entry` vs its quadrature oracle (relative).
pub const N_ENTRY_TOL: f64 = 1e-8;
/// `Ψ_n` vs its quadrature oracle (relative).
pub const PSI_TOL: f64 = 1e-8;
/// `|Ψ_n(q = 1)|` (absolute).
pub const PSI_DEGENERATE_TOL: f64 = 1e-10;
/// Laguerre Gram matrix against `w_n δ_{nm}`.
pub const ORTHOGONALITY_TOL: f64 = 1e-10;
/// Bessel–Laguerre integral identity and double-integral `N_q` oracle.
pub const BESSEL_TOL: f64 = 1e-6;
/// Both intertwining identities.
pub const INTERTWINING_TOL: f64 = 1e-6;
/// Rebuilding at `conj q` conjugates every entry.
pub const CONJUGATION_TOL: f64 = 1e-14;
/// Real-`q` self-adjointness `a_{kn} = a_{nk}`.
pub const SYMMETRY_TOL: f64 = 1e-11;

/// Largest entry index accepted by [`m_entry_quad`].
pub const M_QUAD_MAX_INDEX: usize = 40;
/// Largest entry index accepted by [`n_entry_quad`].
pub const N_QUAD_MAX_INDEX: usize = 20;
/// Largest entry index accepted by [`n_entry_bessel_quad`].
pub const BESSEL_QUAD_MAX_INDEX: usize = 8;
/// Largest index accepted by [`psi_quad`].
pub const PSI_QUAD_MAX_INDEX: usize = 20;
/// Truncation of both variables in the double Bessel integral.
pub const BESSEL_CUTOFF: f64 = 50.0;
/// Upper limit of the semi-infinite integrals done on split rules.
const HALF_LINE_CUTOFF: f64 = 80.0;

/// The parameter grid used by the entry and Ψ suites.
pub fn standard_q_grid() -> Vec<SpectralParameter> {
    [(0.75, 0.0), (1.25, 0.0), (0.6, 2.0), (0.5, 3.0)]
        .iter()
        .map(|&(re, im)| SpectralParameter::from_parts(re, im).expect("grid points are admissible"))
        .collect()
}

/// An oracle value with its quadrature bookkeeping.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleValue {
    pub value: Complex64,
    pub node_count: usize,
    /// Heuristic bound on the neglected tail of truncated integrals.
    pub tail_estimate: f64,
    /// Largest summand over `|value|` for oracles that sum signed pieces.
    pub cancellation: f64,
}

impl OracleValue {
    fn plain(value: Complex64, node_count: usize) -> Self {
        Self {
            value,
            node_count,
            tail_estimate: 0.0,
            cancellation: 1.0,
        }
    }
}

/// One closed-form/oracle comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub target: String,
    pub closed_form: Complex64,
    pub oracle_value: Complex64,
    /// `|closed_form − oracle_value| / max(1, |oracle_value|)`.
    pub rel_error: f64,
    pub node_count: usize,
    pub tolerance: f64,
}

impl OracleReport {
    pub fn new(target: impl Into<String>, closed_form: Complex64, oracle_value: Complex64, node_count: usize, tolerance: f64) -> Self {
        let rel_error = (closed_form - oracle_value).norm() / oracle_value.norm().max(1.0);
        Self {
            target: target.into(),
            closed_form,
            oracle_value,
            rel_error,
            node_count,
            tolerance,
        }
    }

    /// Comparison against a scale other than `max(1, |oracle|)`.
    fn with_scale(target: impl Into<String>, closed_form: Complex64, oracle_value: Complex64, scale: f64, node_count: usize, tolerance: f64) -> Self {
        let mut r = Self::new(target, closed_form, oracle_value, node_count, tolerance);
        r.rel_error = (closed_form - oracle_value).norm() / scale;
        r
    }

    pub fn passed(&self) -> bool {
        self.rel_error <= self.tolerance
    }

    /// Column order of [`OracleReport`]'s `Display` form.
    pub const HEADER: &'static str =
        "target closed_re closed_im oracle_re oracle_im rel_error tolerance nodes status";
}

impl fmt::Display for OracleReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {:.16e} {:.16e} {:.16e} {:.16e} {:.3e} {:.0e} {} {}",
            self.target,
            self.closed_form.re,
            self.closed_form.im,
            self.oracle_value.re,
            self.oracle_value.im,
            self.rel_error,
            self.tolerance,
            self.node_count,
            if self.passed() { "PASS" } else { "FAIL" }
        )
    }
}

fn fmt_q(q: SpectralParameter) -> String {
    format!("q={}{:+}i", q.q().re, q.q().im)
}

/// `L_0^α … L_{count−1}^α` at `t` for complex `α`, by the three-term recurrence.
fn laguerre_all_complex(count: usize, alpha: Complex64, t: f64) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(count);
    if count == 0 {
        return out;
    }
    out.push(Complex64::new(1.0, 0.0));
    if count > 1 {
        out.push(1.0 + alpha - t);
    }
    for k in 1..count.saturating_sub(1) {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 + alpha - t) * out[k] - (kf + alpha) * out[k - 1]) / (kf + 1.0);
        out.push(next);
    }
    out
}

/// Gauss rule for `∫_0^∞ f(t) t^{2ξ−1} e^{−2t} dt`, exact for polynomial `f`
/// of degree `< 2·nodes`.
fn double_rate_rule(xi: f64, nodes: usize) -> Result<QuadratureRule> {
    weighted_semiinfinite(nodes, 2.0 * xi - 1.0)?.with_rate(2.0)
}

/// Entry oracles sharing one Gauss–Laguerre rule for `e^{−2t} t^{2ξ−1}`.
#[derive(Debug, Clone)]
pub struct EntryOracle {
    q: SpectralParameter,
    max_index: usize,
    rule: QuadratureRule,
    /// `L_j^{2ξ−1}` at the nodes, `[node][j]`.
    real_basis: Vec<Vec<f64>>,
    /// `L_j^{2q−1}` at the nodes, `[node][j]`.
    complex_basis: Vec<Vec<Complex64>>,
}

impl EntryOracle {
    /// Oracle for indices `0 ≤ k, n ≤ max_index`.  The rule integrates
    /// polynomials of degree `2·max_index` exactly.
    pub fn new(q: SpectralParameter, max_index: usize) -> Result<Self> {
        if max_index > M_QUAD_MAX_INDEX {
            return Err(Error::OutOfRange(format!(
                "entry oracle supports indices ≤ {M_QUAD_MAX_INDEX}, got {max_index}"
            )));
        }
        let rule = double_rate_rule(q.xi(), max_index + 8)?;
        let alpha = 2.0 * q.q() - 1.0;
        let basis = LaguerreBasis::new(q.xi(), max_index + 1)?;
        let real_basis = rule.nodes().iter().map(|&t| basis.eval_all(t)).collect();
        let complex_basis = rule
            .nodes()
            .iter()
            .map(|&t| laguerre_all_complex(max_index + 1, alpha, t))
            .collect();
        Ok(Self {
            q,
            max_index,
            rule,
            real_basis,
            complex_basis,
        })
    }

    fn check(&self, k: usize, n: usize, limit: usize) -> Result<()> {
        if k > self.max_index || n > self.max_index || k > limit || n > limit {
            return Err(Error::OutOfRange(format!(
                "entry ({k},{n}) outside the oracle range ≤ {}",
                self.max_index.min(limit)
            )));
        }
        Ok(())
    }

    /// `∫ e^{−2t} L_n L_k t^{2ξ−1} dt`.
    pub fn m_entry(&self, k: usize, n: usize) -> Result<OracleValue> {
        self.check(k, n, M_QUAD_MAX_INDEX)?;
        let mut sum = 0.0;
        for (w, row) in self.rule.weights().iter().zip(&self.real_basis) {
            sum += w * row[k] * row[n];
        }
        Ok(OracleValue::plain(Complex64::new(sum, 0.0), self.rule.len()))
    }

    /// `Σ_ℓ c_{nℓ} ∫ e^{−2t} L_ℓ^{2q−1} L_k t^{2ξ−1} dt` with
    /// `c_{nℓ} = (−1)^ℓ Γ(n+2ξ) / ((n−ℓ)! Γ(ℓ+2ξ))`.
    pub fn n_entry(&self, k: usize, n: usize) -> Result<OracleValue> {
        self.check(k, n, N_QUAD_MAX_INDEX)?;
        let xi = self.q.xi();
        let mut total = Complex64::new(0.0, 0.0);
        let mut largest: f64 = 0.0;
        for l in 0..=n {
            let mut inner = Complex64::new(0.0, 0.0);
            for ((w, real), cplx) in self.rule.weights().iter().zip(&self.real_basis).zip(&self.complex_basis) {
                inner += *w * real[k] * cplx[l];
            }
            let mag = (ln_gamma_real(n as f64 + 2.0 * xi) - ln_factorial(n - l) - ln_gamma_real(l as f64 + 2.0 * xi)).exp();
            let term = inner * if l % 2 == 0 { mag } else { -mag };
            largest = largest.max(term.norm());
            total += term;
        }
        let cancellation = if total.norm() > 0.0 { largest / total.norm() } else { f64::INFINITY };
        Ok(OracleValue {
            value: total,
            node_count: self.rule.len(),
            tail_estimate: 0.0,
            cancellation,
        })
    }
}

/// `(M L_n, L_k)_ξ` by Gauss–Laguerre quadrature; `k, n ≤ 40`.
pub fn m_entry_quad(q: SpectralParameter, k: usize, n: usize) -> Result<OracleValue> {
    EntryOracle::new(q, k.max(n))?.m_entry(k, n)
}

/// `(N_q L_n, L_k)_ξ` through the `e^{−t} L_ℓ^{2q−1}` image; `k, n ≤ 20`.
pub fn n_entry_quad(q: SpectralParameter, k: usize, n: usize) -> Result<OracleValue> {
    EntryOracle::new(q, k.max(n))?.n_entry(k, n)
}

/// A rule for `∫_0^{hi} t^{s−1} g(t) dt` with the power folded into the
/// weights: `value = g(0)·head + Σ weights_j g(t_j)`.
#[derive(Debug, Clone)]
struct PowerRule {
    nodes: Vec<f64>,
    weights: Vec<Complex64>,
    head: Complex64,
}

impl PowerRule {
    fn new(rule: &QuadratureRule, s: Complex64) -> Self {
        let delta = rule.interval().0;
        Self {
            nodes: rule.nodes().to_vec(),
            weights: rule
                .nodes()
                .iter()
                .zip(rule.weights())
                .map(|(&t, &w)| w * ((s - 1.0) * t.ln()).exp())
                .collect(),
            head: (s * delta.ln()).exp() / s,
        }
    }

    fn apply(&self, g0: Complex64, values: impl Iterator<Item = Complex64>) -> Complex64 {
        let mut sum = g0 * self.head;
        for (w, v) in self.weights.iter().zip(values) {
            sum += w * v;
        }
        sum
    }
}

/// Double-integral oracle for `N_q` with the kernel `K_q(st)` tabulated on
/// one product grid (both variables truncated at [`BESSEL_CUTOFF`]).
#[derive(Debug, Clone)]
pub struct BesselEntryOracle {
    q: SpectralParameter,
    max_index: usize,
    outer_rule: PowerRule,
    /// `∫ K(t_i s) L_n(s) s^{2q−1} e^{−s} ds`, `[n][i]`, with `i = 0` the
    /// value at `t = 0`.
    inner: Vec<Vec<Complex64>>,
    basis: LaguerreBasis,
}

impl BesselEntryOracle {
    pub fn new(q: SpectralParameter, max_index: usize, cfg: &QuadratureConfig) -> Result<Self> {
        if max_index > BESSEL_QUAD_MAX_INDEX {
            return Err(Error::OutOfRange(format!(
                "double-integral oracle supports indices ≤ {BESSEL_QUAD_MAX_INDEX}, got {max_index}"
            )));
        }
        let rule = endpoint_split_rule(cfg.split, BESSEL_CUTOFF, cfg.finite_nodes)?;
        let inner_rule = PowerRule::new(&rule, 2.0 * q.q());
        let outer_rule = PowerRule::new(&rule, Complex64::new(2.0 * q.xi(), 0.0));
        let kernel = BesselKernel::new(q.q(), BESSEL_CUTOFF * BESSEL_CUTOFF)?;
        let nodes = rule.nodes();
        let m = nodes.len();
        // K(t_i s_j) is symmetric on the shared grid: fill the upper triangle
        let upper: Vec<Vec<Complex64>> = (0..m)
            .into_par_iter()
            .map(|i| (i..m).map(|j| kernel.eval(nodes[i] * nodes[j])).collect::<Result<Vec<_>>>())
            .collect::<Result<_>>()?;
        let k_at = |i: usize, j: usize| if i <= j { upper[i][j - i] } else { upper[j][i - j] };
        let basis = LaguerreBasis::new(q.xi(), max_index + 1)?;
        let lag: Vec<Vec<f64>> = nodes.iter().map(|&s| basis.eval_all(s)).collect();
        let lag0 = basis.eval_all(0.0);
        let k0 = bessel_kernel(q.q(), 0.0)?;
        let inner = (0..=max_index)
            .map(|n| {
                let mut row = Vec::with_capacity(m + 1);
                // t = 0: K ≡ 1/Γ(2q)
                row.push(inner_rule.apply(k0 * lag0[n], (0..m).map(|j| k0 * lag[j][n] * (-nodes[j]).exp())));
                for i in 0..m {
                    row.push(inner_rule.apply(k0 * lag0[n], (0..m).map(|j| k_at(i, j) * lag[j][n] * (-nodes[j]).exp())));
                }
                row
            })
            .collect();
        Ok(Self {
            q,
            max_index,
            outer_rule,
            inner,
            basis,
        })
    }

    /// `∫ t^{2ξ−1} e^{−t} L_k(t) ∫ K(st) L_n(s) s^{2q−1} e^{−s} ds dt`.
    pub fn n_entry(&self, k: usize, n: usize) -> Result<OracleValue> {
        if k > self.max_index || n > self.max_index {
            return Err(Error::OutOfRange(format!("entry ({k},{n}) beyond {}", self.max_index)));
        }
        let nodes = &self.outer_rule.nodes;
        let lk0 = self.basis.eval_all(0.0)[k];
        let value = self.outer_rule.apply(
            self.inner[n][0] * lk0,
            nodes
                .iter()
                .enumerate()
                .map(|(i, &t)| self.inner[n][i + 1] * self.basis.eval_all(t)[k] * (-t).exp()),
        );
        // both factors of the integrand are bounded by e^{−c} c^{m+2ξ−1}/m!
        // beyond the cutoff c (|K| ≤ 1/|Γ(2q)| · e^{…} is dropped: heuristic)
        let c = BESSEL_CUTOFF;
        let xi = self.q.xi();
        let piece = |m: usize| (-c + (m as f64 + 2.0 * xi) * c.ln() - ln_factorial(m)).exp();
        Ok(OracleValue {
            value,
            node_count: nodes.len() * nodes.len(),
            tail_estimate: piece(n) + piece(k),
            cancellation: 1.0,
        })
    }
}

/// `(N_q L_n, L_k)_ξ` from the Bessel-kernel double integral; `k, n ≤ 8`.
pub fn n_entry_bessel_quad(q: SpectralParameter, k: usize, n: usize, cfg: &QuadratureConfig) -> Result<OracleValue> {
    BesselEntryOracle::new(q, k.max(n), cfg)?.n_entry(k, n)
}

/// `((I − M − N_q) χ_{−1}, L_n)_ξ / w_n` by direct quadrature; `n ≤ 20`.
pub fn psi_quad(q: SpectralParameter, n: usize, cfg: &QuadratureConfig) -> Result<OracleValue> {
    if n > PSI_QUAD_MAX_INDEX {
        return Err(Error::OutOfRange(format!("psi oracle supports n ≤ {PSI_QUAD_MAX_INDEX}, got {n}")));
    }
    let xi = q.xi();
    let rule = endpoint_split_rule(cfg.split, HALF_LINE_CUTOFF, cfg.finite_nodes)?;
    let basis = LaguerreBasis::new(xi, n + 1)?;
    // evaluate N_q χ_{−1} up front so errors propagate
    let nq: Vec<Complex64> = rule.nodes().iter().map(|&t| nq_chi(q, t)).collect::<Result<_>>()?;
    let nq0 = 1.0 / (2.0 * q.q() - 1.0);
    let values: Vec<Complex64> = rule
        .nodes()
        .iter()
        .zip(&nq)
        .map(|(&t, nqv)| {
            let chi_part = -(-t).exp_m1() / t; // (1 − e^{−t})/t
            (chi_part - nqv) * basis.eval_all(t)[n] * (-t).exp()
        })
        .collect();
    let power = PowerRule::new(&rule, Complex64::new(2.0 * xi, 0.0));
    let g0 = (1.0 - nq0) * basis.eval_all(0.0)[n];
    let integral = power.apply(g0, values.into_iter());
    Ok(OracleValue::plain(integral / basis.weights()[n], rule.len()))
}

/// Half-line cutoff for applying `N_q` to an order-`order` Laguerre
/// expansion: `φ(s) e^{−s}` decays like `e^{−s/2}` below the turning point
/// `s ≈ 4·order`, so the integrand is below `e^{−60}` of its scale here.
pub fn operator_cutoff(order: usize) -> f64 {
    120.0 + order as f64
}

/// `N_q[φ](t) = ∫_0^∞ K_q(st) φ(s) s^{2q−1} e^{−s} ds` for a Laguerre
/// expansion `φ`, by the singular-endpoint rule up to `cutoff` with the
/// kernel summed in extended precision where needed.
pub fn nq_apply(q: SpectralParameter, phi: &CoefficientVector, t: f64, cutoff: f64, cfg: &QuadratureConfig) -> Result<OracleValue> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::OutOfRange(format!("N_q is applied at t ≥ 0, got {t}")));
    }
    // the log-graded panels must resolve s^{2i Im q}: about 4 radians each
    let log_span = (4.0 / cfg.split).ln();
    let panels = (log_span * 2.0 * q.q().im.abs() / 4.0).ceil() as usize;
    let rule = endpoint_split_rule(cfg.split, cutoff, cfg.finite_nodes.max(20 * panels))?;
    let kernel = BesselKernel::new(q.q(), cutoff * t)?;
    let values: Vec<Complex64> = rule
        .nodes()
        .par_iter()
        .map(|&s| Ok(kernel.eval(s * t)? * phi.eval(s) * (-s).exp()))
        .collect::<Result<_>>()?;
    let power = PowerRule::new(&rule, 2.0 * q.q());
    let g0 = bessel_kernel(q.q(), 0.0)? * phi.eval(0.0);
    Ok(OracleValue::plain(power.apply(g0, values.into_iter()), rule.len()))
}

/// `N_q[φ](t)` for a Laguerre expansion `φ = Σ Φ_n L_n^{2ξ−1}` through
/// the Bessel–Laguerre identity `N_q[s^j/j!](t) = e^{−t} L_j^{2q−1}(t)`
/// (checked by quadrature in the Bessel suite): `φ(s) = Σ_j c_j s^j/j!`
/// with `c_j = (−1)^j Σ_{n≥j} Φ_n C(n+2ξ−1, n−j)`, and the alternating
/// sums carried out in MPFR.  Exact for the polynomial `φ`; used where
/// direct quadrature meets the `1/|Γ(2q)|` cancellation of large `Im q`.
pub fn nq_apply_exact(q: SpectralParameter, phi: &CoefficientVector, t: f64) -> Result<Complex64> {
    let prec = exact_precision(q, phi.coeffs().len(), t);
    let big: Vec<HpComplex> = phi.coeffs().iter().map(|&z| HpComplex::from_c64(prec, z)).collect();
    Ok(nq_apply_hp(q, &big, t)?.to_c64())
}

/// Working precision of [`nq_apply_exact`].
fn exact_precision(q: SpectralParameter, order: usize, t: f64) -> u32 {
    crate::hp::precision_bits(order, q.q()) + 64 + (2.0 * t.sqrt() * order as f64 / 8.0) as u32
}

/// [`nq_apply_exact`] on extended-precision Laguerre coefficients (at
/// their precision).
pub fn nq_apply_hp(q: SpectralParameter, coeffs: &[HpComplex], t: f64) -> Result<HpComplex> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::OutOfRange(format!("N_q is applied at t ≥ 0, got {t}")));
    }
    let order = coeffs.len();
    let Some(prec) = coeffs.first().map(HpComplex::prec) else {
        return Ok(HpComplex::zero(64));
    };
    let alpha = crate::hp::float(prec, q.alpha());
    let mut scratch = Scratch::new(prec);
    // L_j^{2q−1}(t), j < order
    let beta = HpComplex::from_c64(prec, 2.0 * q.q() - 1.0);
    let mut lag: Vec<HpComplex> = Vec::with_capacity(order);
    lag.push(HpComplex::one(prec));
    if order > 1 {
        let mut l1 = beta.clone();
        l1.add_real(&crate::hp::float(prec, 1.0 - t));
        lag.push(l1);
    }
    for j in 1..order.saturating_sub(1) {
        // (j+1) L_{j+1} = (2j+1+β−t) L_j − (j+β) L_{j−1}
        let mut a = beta.clone();
        a.add_real(&crate::hp::float(prec, (2 * j + 1) as f64 - t));
        let mut b = beta.clone();
        b.add_real(&crate::hp::float(prec, j as f64));
        let mut next = HpComplex::zero(prec);
        next.add_mul(&a, &lag[j], &mut scratch);
        next.sub_mul(&b, &lag[j - 1], &mut scratch);
        next.mul_real(&rug::Float::with_val(prec, rug::Float::with_val(prec, 1) / (j + 1) as u32));
        lag.push(next);
    }
    let mut total = HpComplex::zero(prec);
    let mut binom = rug::Float::new(prec);
    for j in 0..order {
        // C(n+α, n−j) for n = j, j+1, …: ratio (n+α)/(n−j)
        binom.assign(1);
        let mut c = HpComplex::zero(prec);
        for n in j..order {
            if n > j {
                binom *= rug::Float::with_val(prec, &alpha + n as u32);
                binom /= (n - j) as u32;
            }
            c.add_mul_real(&coeffs[n], &binom, &mut scratch);
        }
        if j % 2 == 1 {
            c.neg();
        }
        total.add_mul(&c, &lag[j], &mut scratch);
    }
    total.mul_real(&rug::Float::with_val(prec, -t).exp());
    Ok(total)
}

/// `Σ Φ_n L_n^{2ξ−1}(t)` in extended precision.
pub fn laguerre_sum_hp(q: SpectralParameter, coeffs: &[HpComplex], t: f64) -> HpComplex {
    let Some(prec) = coeffs.first().map(HpComplex::prec) else {
        return HpComplex::zero(64);
    };
    let alpha = q.alpha();
    let mut prev = rug::Float::with_val(prec, 0);
    let mut cur = rug::Float::with_val(prec, 1);
    let mut sum = HpComplex::zero(prec);
    let mut scratch = Scratch::new(prec);
    for (n, c) in coeffs.iter().enumerate() {
        sum.add_mul_real(c, &cur, &mut scratch);
        // (n+1) L_{n+1} = (2n+1+α−t) L_n − (n+α) L_{n−1}
        let mut next = rug::Float::with_val(prec, &cur * ((2 * n + 1) as f64 + alpha - t));
        next -= rug::Float::with_val(prec, &prev * (n as f64 + alpha));
        next /= (n + 1) as u32;
        prev = std::mem::replace(&mut cur, next);
    }
    sum
}

/// Pointwise value of an eigenfunction candidate and of its residual.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualSample {
    pub t: f64,
    /// `φ(t)`.
    pub phi: Complex64,
    /// `(M ± N_q − I)φ(t)`.
    pub residual: Complex64,
}

/// Extended-precision copy of `φ`'s coefficients at the working precision
/// of [`nq_apply_exact`] for the largest of `t_max`.
pub fn hp_coefficients(q: SpectralParameter, phi: &CoefficientVector, t_max: f64) -> Vec<HpComplex> {
    let prec = exact_precision(q, phi.coeffs().len(), t_max);
    phi.coeffs().iter().map(|&z| HpComplex::from_c64(prec, z)).collect()
}

/// `(M ± N_q − I)φ(t) = (e^{−t} − 1)φ(t) ± N_q[φ](t)` for
/// `φ = Σ Φ_n L_n^{2ξ−1}` given by extended-precision coefficients, with
/// `N_q` applied by [`nq_apply_hp`].
pub fn operator_residual(q: SpectralParameter, sign: Sign, coeffs: &[HpComplex], t_samples: &[f64]) -> Result<Vec<ResidualSample>> {
    t_samples
        .iter()
        .map(|&t| {
            let phi = laguerre_sum_hp(q, coeffs, t).to_c64();
            let nq = nq_apply_hp(q, coeffs, t)?.to_c64();
            Ok(ResidualSample {
                t,
                phi,
                residual: (-t).exp_m1() * phi + sign.factor() * nq,
            })
        })
        .collect()
}

/// `B_q[φ](z) = z^{−2q} ∫_0^∞ e^{−t/z} φ(t) t^{2q−1} dt`, plus
/// `b·Γ(2q−1)/z` for the `b χ_{−1}` part when `chi` is given.
///
/// Needs `Re(1/z) > 0` and `φ` polynomially bounded.
pub fn bq_transform<F>(q: SpectralParameter, phi: F, z: Complex64, chi: Option<Complex64>, cfg: &QuadratureConfig) -> Result<OracleValue>
where
    F: Fn(f64) -> Complex64,
{
    let inv = 1.0 / z;
    if !(inv.re > 0.0) || !inv.re.is_finite() {
        return Err(Error::InvalidInput(format!("B_q transform diverges for Re(1/z) ≤ 0 (z = {z})")));
    }
    let qv = q.q();
    let hi = HALF_LINE_CUTOFF / inv.re;
    let rule = endpoint_split_rule(cfg.split, hi, cfg.finite_nodes)?;
    let integral = integrate_power_singular(&rule, 2.0 * qv, |t| (-t * inv).exp() * phi(t))?;
    let mut value = (-2.0 * qv * z.ln()).exp() * integral;
    if let Some(b) = chi {
        value += b * log_gamma(2.0 * qv - 1.0)?.exp() * inv;
    }
    Ok(OracleValue::plain(value, rule.len()))
}

/// `B_q[Σ a_m t^m + b χ_{−1}](z) = Σ a_m Γ(m+2q) z^m + b Γ(2q−1)/z`.
pub fn bq_polynomial(q: SpectralParameter, coeffs: &[Complex64], z: Complex64, chi: Option<Complex64>) -> Result<Complex64> {
    let qv = q.q();
    let mut value = Complex64::new(0.0, 0.0);
    let mut zm = Complex64::new(1.0, 0.0);
    for (m, a) in coeffs.iter().enumerate() {
        value += a * log_gamma(2.0 * qv + m as f64)?.exp() * zm;
        zm *= z;
    }
    if let Some(b) = chi {
        value += b * log_gamma(2.0 * qv - 1.0)?.exp() / z;
    }
    Ok(value)
}

fn poly_eval(coeffs: &[Complex64], t: f64) -> Complex64 {
    coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, a| acc * t + a)
}

/// `e^{−t}(e^{−t}L_ℓ…)`: `N_q(s^m)(t) = m! e^{−t} L_m^{2q−1}(t)`, summed over
/// the monomials of `φ`.
fn nq_polynomial(q: SpectralParameter, coeffs: &[Complex64], t: f64) -> Complex64 {
    let lag = laguerre_all_complex(coeffs.len(), 2.0 * q.q() - 1.0, t);
    let mut sum = Complex64::new(0.0, 0.0);
    for (m, (a, l)) in coeffs.iter().zip(&lag).enumerate() {
        sum += a * ln_factorial(m).exp() * l;
    }
    sum * (-t).exp()
}

/// Both sides of `P_{0,q}(B_q[χ_{−1}+φ]) = B_q[M(χ_{−1}+φ)]` and
/// `P_{1,q}(B_q[χ_{−1}+φ]) = B_q[N_q(χ_{−1}+φ)]` at real `z ∈ (0, 1]` for a
/// polynomial `φ` (monomial coefficients).  The operator sides use
/// [`pointwise_operator_apply`] on the quadrature transform; the transform
/// sides integrate `M(χ+φ)` and `N_q(χ+φ)` directly.
pub fn intertwining_check(q: SpectralParameter, coeffs: &[Complex64], z: f64, cfg: &QuadratureConfig) -> Result<[OracleReport; 2]> {
    if !(z > 0.0 && z <= 1.0) {
        return Err(Error::OutOfRange(format!("intertwining is checked for z in (0, 1], got {z}")));
    }
    if q.xi() <= 0.5 {
        return Err(Error::InvalidParameter {
            re: q.q().re,
            im: q.q().im,
            reason: "B_q[M χ_{−1}] needs Re q > 1/2",
        });
    }
    let qv = q.q();
    let one = Some(Complex64::new(1.0, 0.0));
    let transform = |w: f64| -> Result<OracleValue> { bq_transform(q, |t| poly_eval(coeffs, t), Complex64::new(w, 0.0), one, cfg) };
    let operator_side = |which: TransferOperator| -> Result<(Complex64, usize)> {
        let point = match which {
            TransferOperator::P0 => z / (1.0 + z),
            _ => 1.0 / (1.0 + z),
        };
        let inner = transform(point)?;
        let value = pointwise_operator_apply(
            which,
            q,
            |w| if (w - point).abs() <= 1e-15 * point { inner.value } else { Complex64::new(f64::NAN, f64::NAN) },
            z,
            1,
        )?
        .value;
        if !value.re.is_finite() || !value.im.is_finite() {
            return Err(Error::NonFinite { node: 0, t: point });
        }
        Ok((value, inner.node_count))
    };
    let z_pow = (-2.0 * qv * z.ln()).exp();

    // B_q[M(χ+φ)](z) = z^{−2q} ∫ e^{−t(1+1/z)} (1 + tφ(t)) t^{2q−2} dt
    let rate_m = 1.0 + 1.0 / z;
    let rule_m = endpoint_split_rule(cfg.split, HALF_LINE_CUTOFF / rate_m, cfg.finite_nodes)?;
    let rhs_m = z_pow
        * integrate_power_singular(&rule_m, 2.0 * qv - 1.0, |t| (-t * rate_m).exp() * (1.0 + t * poly_eval(coeffs, t)))?;

    // B_q[N_q(χ+φ)](z) = z^{−2q} ∫ e^{−t/z} (N_q χ_{−1} + N_q φ)(t) t^{2q−1} dt
    let rule_n = endpoint_split_rule(cfg.split, HALF_LINE_CUTOFF * z, cfg.finite_nodes)?;
    let nq_vals: Vec<Complex64> = rule_n.nodes().iter().map(|&t| nq_chi(q, t)).collect::<Result<_>>()?;
    let power = PowerRule::new(&rule_n, 2.0 * qv);
    let g0 = 1.0 / (2.0 * qv - 1.0) + nq_polynomial(q, coeffs, 0.0);
    let rhs_n = z_pow
        * power.apply(
            g0,
            rule_n
                .nodes()
                .iter()
                .zip(&nq_vals)
                .map(|(&t, nqv)| (-t / z).exp() * (nqv + nq_polynomial(q, coeffs, t))),
        );

    let (lhs_m, nodes_0) = operator_side(TransferOperator::P0)?;
    let (lhs_n, nodes_1) = operator_side(TransferOperator::P1)?;
    let label = format!("{} deg={} z={z}", fmt_q(q), coeffs.len().saturating_sub(1));
    Ok([
        OracleReport::with_scale(
            format!("intertwining-P0 {label}"),
            lhs_m,
            rhs_m,
            rhs_m.norm().max(1e-300),
            nodes_0 + rule_m.len(),
            INTERTWINING_TOL,
        ),
        OracleReport::with_scale(
            format!("intertwining-P1 {label}"),
            lhs_n,
            rhs_n,
            rhs_n.norm().max(1e-300),
            nodes_1 + rule_n.len(),
            INTERTWINING_TOL,
        ),
    ])
}

/// `∫ K_q(st) s^ℓ/ℓ! s^{2q−1} e^{−s} ds` against `e^{−t} L_ℓ^{2q−1}(t)`.
pub fn bessel_laguerre_check(q: SpectralParameter, l: usize, t: f64, cfg: &QuadratureConfig) -> Result<OracleReport> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::OutOfRange(format!("identity checked for finite t ≥ 0, got {t}")));
    }
    let qv = q.q();
    let rule = endpoint_split_rule(cfg.split, HALF_LINE_CUTOFF, cfg.finite_nodes)?;
    let kernel = BesselKernel::new(qv, HALF_LINE_CUTOFF * t.max(1e-300))?;
    let lf = ln_factorial(l);
    let values: Vec<Complex64> = rule
        .nodes()
        .iter()
        .map(|&s| Ok(kernel.eval(s * t)? * (l as f64 * s.ln() - lf - s).exp()))
        .collect::<Result<_>>()?;
    let g0 = if l == 0 { bessel_kernel(qv, 0.0)? } else { Complex64::new(0.0, 0.0) };
    let oracle = PowerRule::new(&rule, 2.0 * qv).apply(g0, values.into_iter());
    let closed = (-t).exp() * laguerre_all_complex(l + 1, 2.0 * qv - 1.0, t)[l];
    Ok(OracleReport::with_scale(
        format!("bessel-laguerre {} l={l} t={t}", fmt_q(q)),
        closed,
        oracle,
        closed.norm().max(1e-300),
        rule.len(),
        BESSEL_TOL,
    ))
}

/// Verification suites, each a fixed grid at fixed tolerances.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Suite {
    /// `m_entry`, `n_entry` against the Gauss–Laguerre oracles.
    Matrices,
    /// Conjugation and real-`q` symmetry of the assembled matrices.
    Invariants,
    /// `Ψ_n` degeneracy at `q = 1` and against the direct quadrature.
    Psi,
    /// Gram matrix of the Laguerre basis.
    Laguerre,
    /// Bessel–Laguerre identity and the double-integral `N_q` oracle.
    Bessel,
    /// The intertwining identities.
    Intertwining,
}

impl Suite {
    pub const ALL: [Suite; 6] = [
        Suite::Matrices,
        Suite::Invariants,
        Suite::Psi,
        Suite::Laguerre,
        Suite::Bessel,
        Suite::Intertwining,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Matrices => "matrices",
            Suite::Invariants => "invariants",
            Suite::Psi => "psi",
            Suite::Laguerre => "laguerre",
            Suite::Bessel => "bessel",
            Suite::Intertwining => "intertwining",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.iter().copied().find(|s| s.name() == name)
    }
}

/// Run one suite on its standard grid.
pub fn verify(suite: Suite) -> Result<Vec<OracleReport>> {
    verify_with_config(suite, &QuadratureConfig::default())
}

/// [`verify`] with explicit quadrature rules for the integral oracles.
pub fn verify_with_config(suite: Suite, cfg: &QuadratureConfig) -> Result<Vec<OracleReport>> {
    let cfg = *cfg;
    match suite {
        Suite::Matrices => verify_entries(&standard_q_grid(), 12),
        Suite::Invariants => verify_invariants(&standard_q_grid(), 12, 20),
        Suite::Psi => verify_psi(&standard_q_grid(), 20, &cfg),
        Suite::Laguerre => verify_orthogonality(&[0.5, 0.75, 1.2], 15, &cfg),
        Suite::Bessel => verify_bessel(&cfg),
        Suite::Intertwining => verify_intertwining(&cfg),
    }
}

/// `m_entry` and `n_entry` against the oracles for `0 ≤ k, n ≤ max_index`.
pub fn verify_entries(grid: &[SpectralParameter], max_index: usize) -> Result<Vec<OracleReport>> {
    let per_q: Vec<Vec<OracleReport>> = grid
        .par_iter()
        .map(|&q| {
            let oracle = EntryOracle::new(q, max_index)?;
            let tables = EntryTables::new(q, max_index + 1)?;
            let mut out = Vec::with_capacity(2 * (max_index + 1) * (max_index + 1));
            for k in 0..=max_index {
                for n in 0..=max_index {
                    let m = oracle.m_entry(k, n)?;
                    out.push(OracleReport::new(
                        format!("m_entry {} k={k} n={n}", fmt_q(q)),
                        matrices::m_entry(q, k, n),
                        m.value,
                        m.node_count,
                        M_ENTRY_TOL,
                    ));
                    let nv = oracle.n_entry(k, n)?;
                    out.push(OracleReport::new(
                        format!("n_entry {} k={k} n={n}", fmt_q(q)),
                        tables.n_entry(k, n).value,
                        nv.value,
                        nv.node_count,
                        N_ENTRY_TOL,
                    ));
                }
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    Ok(per_q.into_iter().flatten().collect())
}

/// Conjugation (every `q`) and symmetry (real `q`) of the assembled `A±`.
pub fn verify_invariants(grid: &[SpectralParameter], conj_max_index: usize, sym_max_index: usize) -> Result<Vec<OracleReport>> {
    let mut out = Vec::new();
    for &q in grid {
        let order = conj_max_index + 1;
        let opts = matrices::BuildOptions::default();
        let a = matrices::build_system(q, order, &opts)?;
        let b = matrices::build_system(q.conj(), order, &opts)?;
        for sign in [Sign::Plus, Sign::Minus] {
            let (mut worst, mut at) = (0.0f64, (0, 0));
            let (mut wc, mut wo) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
            for k in 0..order {
                for n in 0..order {
                    let x = a.a(sign)[(k, n)].conj();
                    let y = b.a(sign)[(k, n)];
                    let e = (x - y).norm() / y.norm().max(1.0);
                    if e >= worst {
                        worst = e;
                        at = (k, n);
                        wc = x;
                        wo = y;
                    }
                }
            }
            out.push(OracleReport::new(
                format!("conjugation {} sign={sign:?} worst=({},{})", fmt_q(q), at.0, at.1),
                wc,
                wo,
                order * order,
                CONJUGATION_TOL,
            ));
        }
        if q.is_real() {
            let order = sym_max_index + 1;
            let s = matrices::build_system(q, order, &opts)?;
            for sign in [Sign::Plus, Sign::Minus] {
                let m = s.a(sign);
                let (mut worst, mut at) = (0.0f64, (0, 0));
                for k in 0..order {
                    for n in 0..k {
                        let e = (m[(k, n)] - m[(n, k)]).norm() / m[(k, n)].norm().max(1.0);
                        if e >= worst {
                            worst = e;
                            at = (k, n);
                        }
                    }
                }
                let (k, n) = at;
                out.push(OracleReport::new(
                    format!("symmetry {} sign={sign:?} worst=({k},{n})", fmt_q(q)),
                    m[(k, n)],
                    m[(n, k)],
                    order * order,
                    SYMMETRY_TOL,
                ));
            }
        }
    }
    Ok(out)
}

/// `|Ψ_n(1)| ≤ 1e−10` and `psi_entry` against [`psi_quad`], `n ≤ max_n`.
pub fn verify_psi(grid: &[SpectralParameter], max_n: usize, cfg: &QuadratureConfig) -> Result<Vec<OracleReport>> {
    let one = SpectralParameter::from_parts(1.0, 0.0)?;
    let mut out = Vec::new();
    for n in 0..=max_n {
        let v = matrices::psi_entry(one, n, cfg)?;
        out.push(OracleReport::with_scale(
            format!("psi-degenerate q=1 n={n}"),
            v,
            Complex64::new(0.0, 0.0),
            1.0,
            cfg.finite_nodes,
            PSI_DEGENERATE_TOL,
        ));
    }
    let per_q: Vec<Vec<OracleReport>> = grid
        .par_iter()
        .map(|&q| {
            (0..=max_n)
                .map(|n| {
                    let closed = matrices::psi_entry(q, n, cfg)?;
                    let oracle = psi_quad(q, n, cfg)?;
                    Ok(OracleReport::new(format!("psi {} n={n}", fmt_q(q)), closed, oracle.value, oracle.node_count, PSI_TOL))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    out.extend(per_q.into_iter().flatten());
    Ok(out)
}

/// `(L_n, L_m)_ξ` by a split rule (not the Gauss rule of the basis itself)
/// against `w_n δ_{nm}`, relative to `max(w_n, w_m)`.
pub fn verify_orthogonality(xis: &[f64], max_index: usize, cfg: &QuadratureConfig) -> Result<Vec<OracleReport>> {
    let mut out = Vec::new();
    // e^{−t} t^{2·15+2ξ} is negligible beyond 150
    let rule = endpoint_split_rule(cfg.split, 150.0, cfg.finite_nodes)?;
    for &xi in xis {
        let basis = LaguerreBasis::new(xi, max_index + 1)?;
        let power = PowerRule::new(&rule, Complex64::new(2.0 * xi, 0.0));
        let values: Vec<Vec<f64>> = rule.nodes().iter().map(|&t| basis.eval_all(t)).collect();
        let at0 = basis.eval_all(0.0);
        for n in 0..=max_index {
            for m in 0..=n {
                let gram = power.apply(
                    Complex64::new(at0[n] * at0[m], 0.0),
                    rule.nodes().iter().zip(&values).map(|(&t, v)| Complex64::new(v[n] * v[m] * (-t).exp(), 0.0)),
                );
                let want = if n == m { basis.weights()[n] } else { 0.0 };
                let scale = basis.weights()[n].max(basis.weights()[m]);
                out.push(OracleReport::with_scale(
                    format!("orthogonality xi={xi} n={n} m={m}"),
                    Complex64::new(want, 0.0),
                    gram,
                    scale,
                    rule.len(),
                    ORTHOGONALITY_TOL,
                ));
            }
        }
    }
    Ok(out)
}

/// Bessel–Laguerre identity for `ℓ ≤ 8`, `t ∈ {0.5, 1, 2}`,
/// `q ∈ {0.75, 0.6+2i}`, and the double-integral `N_q` spot checks.
pub fn verify_bessel(cfg: &QuadratureConfig) -> Result<Vec<OracleReport>> {
    let mut out = Vec::new();
    for (re, im) in [(0.75, 0.0), (0.6, 2.0)] {
        let q = SpectralParameter::from_parts(re, im)?;
        for l in 0..=8 {
            for t in [0.5, 1.0, 2.0] {
                out.push(bessel_laguerre_check(q, l, t, cfg)?);
            }
        }
    }
    for (re, im, k, n) in [(0.75, 0.0, 0, 0), (0.75, 0.0, 2, 1), (0.6, 1.0, 1, 1)] {
        let q = SpectralParameter::from_parts(re, im)?;
        let double = n_entry_bessel_quad(q, k, n, cfg)?;
        let single = n_entry_quad(q, k, n)?;
        out.push(OracleReport::with_scale(
            format!("n_entry-bessel {} k={k} n={n}", fmt_q(q)),
            single.value,
            double.value,
            single.value.norm().max(1e-300),
            double.node_count,
            BESSEL_TOL,
        ));
    }
    Ok(out)
}

/// The intertwining identities for `φ ∈ {0, 1, t, 1 − 2t + t²/2}`,
/// `z ∈ {0.3, 0.5, 0.8}`, `q ∈ {1, 0.75, 0.6+i}`.
pub fn verify_intertwining(cfg: &QuadratureConfig) -> Result<Vec<OracleReport>> {
    let c = |x: f64| Complex64::new(x, 0.0);
    let polys: Vec<Vec<Complex64>> = vec![vec![], vec![c(1.0)], vec![c(0.0), c(1.0)], vec![c(1.0), c(-2.0), c(0.5)]];
    let mut out = Vec::new();
    for (re, im) in [(1.0, 0.0), (0.75, 0.0), (0.6, 1.0)] {
        let q = SpectralParameter::from_parts(re, im)?;
        for p in &polys {
            for z in [0.3, 0.5, 0.8] {
                out.extend(intertwining_check(q, p, z, cfg)?);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sp(re: f64, im: f64) -> SpectralParameter {
        SpectralParameter::from_parts(re, im).unwrap()
    }

    #[test]
    fn m_oracle_trivial_values() {
        assert!((m_entry_quad(sp(0.5, 1.0), 0, 0).unwrap().value.re - 0.5).abs() < 1e-14);
        assert!((m_entry_quad(sp(1.0, 0.0), 0, 0).unwrap().value.re - 0.25).abs() < 1e-14);
        assert!(m_entry_quad(sp(1.0, 0.0), 41, 0).is_err());
    }

    #[test]
    fn n_oracle_origin() {
        let q = sp(0.6, 2.0);
        let want = (ln_gamma_real(1.2) - 1.2 * std::f64::consts::LN_2).exp();
        assert!((n_entry_quad(q, 0, 0).unwrap().value - want).norm() < 1e-14);
        assert!(n_entry_quad(q, 21, 0).is_err());
    }

    #[test]
    fn oracles_agree_with_closed_forms() {
        for q in [sp(0.75, 0.0), sp(0.6, 2.0)] {
            let o = EntryOracle::new(q, 7).unwrap();
            let t = EntryTables::new(q, 8).unwrap();
            for (k, n) in [(7, 2), (3, 5), (6, 6)] {
                let m = o.m_entry(k, n).unwrap().value;
                assert!((m - matrices::m_entry(q, k, n)).norm() < 1e-12 * m.norm().max(1.0));
                let nv = o.n_entry(k, n).unwrap().value;
                assert!((nv - t.n_entry(k, n).value).norm() < 1e-10 * nv.norm().max(1.0));
            }
        }
    }

    #[test]
    fn frozen_reference_through_the_oracle() {
        let v = n_entry_quad(sp(0.75, 2.0), 4, 6).unwrap().value;
        let want = Complex64::new(-0.311_422_868_366_152_1, -1.042_361_530_741_485_9);
        assert!((v - want).norm() < 1e-12 * want.norm());
    }

    #[test]
    fn psi_oracle_vanishes_at_q_one() {
        let v = psi_quad(sp(1.0, 0.0), 3, &QuadratureConfig::default()).unwrap().value;
        assert!(v.norm() < 1e-9);
    }

    #[test]
    fn psi_oracle_matches_reference() {
        let v = psi_quad(sp(0.6, 2.0), 1, &QuadratureConfig::default()).unwrap().value;
        assert!((v - Complex64::new(0.1750409, 0.056594228)).norm() < 1e-7);
    }

    #[test]
    fn transform_of_chi_alone() {
        let cfg = QuadratureConfig::default();
        let zero = |_t: f64| Complex64::new(0.0, 0.0);
        let q = sp(0.75, 1.0);
        let z = Complex64::new(0.7, 0.2);
        let v = bq_transform(q, zero, z, Some(Complex64::new(1.0, 0.0)), &cfg).unwrap().value;
        let want = log_gamma(2.0 * q.q() - 1.0).unwrap().exp() / z;
        assert!((v - want).norm() < 1e-14 * want.norm());
        // q = 1: the invariant density 1/z
        let v = bq_transform(sp(1.0, 0.0), zero, Complex64::new(0.4, 0.0), Some(Complex64::new(1.0, 0.0)), &cfg).unwrap();
        assert!((v.value.re - 2.5).abs() < 1e-14);
        assert!(bq_transform(q, zero, Complex64::new(-0.5, 0.1), None, &cfg).is_err());
        assert!(bq_transform(q, zero, Complex64::new(0.0, 1.0), None, &cfg).is_err());
    }

    #[test]
    fn transform_of_a_laguerre_polynomial() {
        let cfg = QuadratureConfig::default();
        let q = sp(0.75, 0.0);
        // L_2^{0.5}(t) = (α+1)(α+2)/2 − (α+2) t + t²/2 with α = 0.5
        let coeffs = [Complex64::new(1.875, 0.0), Complex64::new(-2.5, 0.0), Complex64::new(0.5, 0.0)];
        let basis = LaguerreBasis::new(0.75, 3).unwrap();
        let numeric = bq_transform(q, |t| Complex64::new(basis.eval_all(t)[2], 0.0), Complex64::new(0.8, 0.0), None, &cfg).unwrap();
        let analytic = bq_polynomial(q, &coeffs, Complex64::new(0.8, 0.0), None).unwrap();
        assert!((numeric.value - analytic).norm() < 1e-12 * analytic.norm().max(1.0), "{} vs {analytic}", numeric.value);
    }

    #[test]
    fn intertwining_at_q_one() {
        let cfg = QuadratureConfig::default();
        let [first, second] = intertwining_check(sp(1.0, 0.0), &[], 0.5, &cfg).unwrap();
        assert!(first.rel_error < 1e-8, "{first}");
        assert!(second.rel_error < 1e-8, "{second}");
        assert!(intertwining_check(sp(1.0, 0.0), &[], 0.0, &cfg).is_err());
        assert!(intertwining_check(sp(0.4, 1.0), &[], 0.5, &cfg).is_err());
    }

    #[test]
    fn intertwining_examples() {
        let cfg = QuadratureConfig::default();
        for r in intertwining_check(sp(0.75, 0.0), &[Complex64::new(1.0, 0.0)], 0.3, &cfg).unwrap() {
            assert!(r.passed(), "{r}");
        }
        let l1 = [Complex64::new(1.2, 0.0), Complex64::new(-1.0, 0.0)]; // L_1^{0.2}
        for r in intertwining_check(sp(0.6, 1.0), &l1, 0.7, &cfg).unwrap() {
            assert!(r.passed(), "{r}");
        }
    }

    #[test]
    fn bessel_laguerre_identity_samples() {
        let cfg = QuadratureConfig::default();
        for (q, l, t) in [(sp(0.75, 0.0), 0, 1.0), (sp(0.6, 2.0), 5, 2.0)] {
            let r = bessel_laguerre_check(q, l, t, &cfg).unwrap();
            assert!(r.passed(), "{r}");
        }
    }

    #[test]
    fn report_line_format() {
        let r = OracleReport::new("x", Complex64::new(1.0, 0.0), Complex64::new(1.0, 1e-12), 7, 1e-10);
        let line = r.to_string();
        assert_eq!(line.split(' ').count(), OracleReport::HEADER.split(' ').count());
        assert!(line.ends_with("PASS"));
        assert_eq!(Suite::from_name("psi"), Some(Suite::Psi));
        assert_eq!(Suite::from_name("nope"), None);
    }

    #[test]
    fn nq_of_constant_is_exponential() {
        // ∫ K(st) dm_q(s) = e^{−t}
        let q = sp(0.6, 2.0);
        let basis = LaguerreBasis::new(q.xi(), 1).unwrap();
        let one = CoefficientVector::new(vec![Complex64::new(1.0, 0.0)], basis).unwrap();
        for t in [0.0, 0.5, 3.0] {
            let v = nq_apply_exact(q, &one, t).unwrap();
            assert!((v - (-t).exp()).norm() < 1e-15, "t={t}: {v}");
        }
    }

    #[test]
    fn exact_nq_matches_quadrature() {
        let cfg = QuadratureConfig::default();
        for q in [sp(0.75, 0.0), sp(0.6, 2.0)] {
            let basis = LaguerreBasis::new(q.xi(), 6).unwrap();
            let coeffs = vec![
                Complex64::new(0.3, 0.0),
                Complex64::new(-0.2, 0.1),
                Complex64::new(0.5, 0.0),
                Complex64::new(0.0, -0.4),
                Complex64::new(0.1, 0.1),
                Complex64::new(-0.05, 0.0),
            ];
            let phi = CoefficientVector::new(coeffs, basis).unwrap();
            for t in [0.5, 2.0] {
                let a = nq_apply_exact(q, &phi, t).unwrap();
                let b = nq_apply(q, &phi, t, operator_cutoff(6), &cfg).unwrap().value;
                assert!((a - b).norm() < 1e-12, "q={:?} t={t}: {a} vs {b}", q.q());
            }
            let hp = hp_coefficients(q, &phi, 2.0);
            for t in [0.0, 1.0, 7.0] {
                assert!((laguerre_sum_hp(q, &hp, t).to_c64() - phi.eval(t)).norm() < 1e-13);
            }
        }
    }
}

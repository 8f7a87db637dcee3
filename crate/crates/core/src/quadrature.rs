//! Deterministic quadrature: Gauss–Legendre, Gauss–Laguerre and composite
//! rules graded towards an algebraic endpoint singularity at the origin.

use crate::error::{Error, Result};
use crate::specfun::ln_weight;
#[cfg(test)]
use crate::specfun::ln_gamma_real;
use nalgebra::DMatrix;
use rug::{Assign, Float};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Default node count for finite-interval rules.
pub const DEFAULT_FINITE_NODES: usize = 200;
/// Default node count for semi-infinite Gauss–Laguerre rules.
pub const DEFAULT_SEMI_INFINITE_NODES: usize = 250;
/// Default split point below which a leading power is integrated exactly.
pub const DEFAULT_SPLIT: f64 = 1e-12;
/// Nodes per panel of the composite rules.
const PANEL_NODES: usize = 20;

/// Which weight the rule integrates against.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum WeightKind {
    /// `∫ f(t) dt`.
    Plain,
    /// `∫_0^∞ f(t) t^α e^{−rate·t} dt`.
    LaguerreWeighted { alpha: f64, rate: f64 },
}

/// Node counts and split point shared by the oracle and Ψ integrals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    pub finite_nodes: usize,
    pub semi_infinite_nodes: usize,
    pub split: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            finite_nodes: DEFAULT_FINITE_NODES,
            semi_infinite_nodes: DEFAULT_SEMI_INFINITE_NODES,
            split: DEFAULT_SPLIT,
        }
    }
}

impl QuadratureConfig {
    /// Same configuration with every node count doubled (convergence checks).
    pub fn doubled(&self) -> Self {
        Self {
            finite_nodes: 2 * self.finite_nodes,
            semi_infinite_nodes: 2 * self.semi_infinite_nodes,
            split: self.split,
        }
    }
}

/// Nodes and weights of an interpolatory rule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    lo: f64,
    hi: f64,
    kind: WeightKind,
}

impl QuadratureRule {
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn interval(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    pub fn kind(&self) -> WeightKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// A Gauss–Laguerre rule for `t^α e^{−t}` rescaled to `t^α e^{−rate·t}`.
    pub fn with_rate(&self, rate: f64) -> Result<Self> {
        let WeightKind::LaguerreWeighted { alpha, rate: old } = self.kind else {
            return Err(Error::InvalidInput("only Laguerre-weighted rules can be rescaled".into()));
        };
        if !(rate > 0.0) {
            return Err(Error::InvalidInput(format!("rate must be positive, got {rate}")));
        }
        let factor = old / rate;
        let wscale = factor.powf(alpha + 1.0);
        Ok(Self {
            nodes: self.nodes.iter().map(|x| x * factor).collect(),
            weights: self.weights.iter().map(|w| w * wscale).collect(),
            lo: self.lo,
            hi: self.hi,
            kind: WeightKind::LaguerreWeighted { alpha, rate },
        })
    }

    /// Concatenates two plain rules on adjacent intervals.
    pub fn join(mut self, other: QuadratureRule) -> Result<Self> {
        if self.kind != WeightKind::Plain || other.kind != WeightKind::Plain || self.hi != other.lo {
            return Err(Error::InvalidInput("only adjacent plain rules can be joined".into()));
        }
        self.nodes.extend_from_slice(&other.nodes);
        self.weights.extend_from_slice(&other.weights);
        self.hi = other.hi;
        Ok(self)
    }
}

/// Legendre `P_n(x)` and `P_n'(x)`.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// `n`-point Gauss–Legendre rule mapped affinely to `(lo, hi)`.
pub fn gauss_legendre(n: usize, lo: f64, hi: f64) -> Result<QuadratureRule> {
    if n == 0 || !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::InvalidInput(format!(
            "Gauss–Legendre needs n ≥ 1 and finite lo < hi, got n={n}, ({lo}, {hi})"
        )));
    }
    let mut xs = vec![0.0; n];
    let mut ws = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = if n == 1 { 0.0 } else { (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos() };
        let w = if n == 1 {
            2.0
        } else {
            for _ in 0..100 {
                let (p, dp) = legendre_with_derivative(n, x);
                let dx = p / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let d = legendre_with_derivative(n, x).1;
            2.0 / ((1.0 - x * x) * d * d)
        };
        // x_i descends from near 1; store mirrored pairs ascending
        xs[n - 1 - i] = x;
        ws[n - 1 - i] = w;
        xs[i] = -x;
        ws[i] = w;
    }
    let half = 0.5 * (hi - lo);
    let mid = 0.5 * (hi + lo);
    Ok(QuadratureRule {
        nodes: xs.iter().map(|x| mid + half * x).collect(),
        weights: ws.iter().map(|w| w * half).collect(),
        lo,
        hi,
        kind: WeightKind::Plain,
    })
}

/// Composite Gauss–Legendre with `panels` equal panels of `per_panel` nodes.
pub fn composite_legendre(lo: f64, hi: f64, panels: usize, per_panel: usize) -> Result<QuadratureRule> {
    if panels == 0 {
        return Err(Error::InvalidInput("composite rule needs at least one panel".into()));
    }
    let width = (hi - lo) / panels as f64;
    let mut rule = gauss_legendre(per_panel, lo, lo + width)?;
    for p in 1..panels {
        let a = lo + p as f64 * width;
        let b = if p + 1 == panels { hi } else { a + width };
        let mut next = gauss_legendre(per_panel, a, b)?;
        next.lo = rule.hi;
        rule = rule.join(next)?;
    }
    Ok(rule)
}

/// Composite Gauss–Legendre in the variable `u = ln t` over `[lo, hi]`,
/// `0 < lo < hi`, returned as a plain rule in `t` (Jacobian folded into the
/// weights).  Resolves `t^{s}` factors with oscillating `t^{i Im s}` near 0.
pub fn log_graded(lo: f64, hi: f64, panels: usize, per_panel: usize) -> Result<QuadratureRule> {
    if !(lo > 0.0) || !(lo < hi) {
        return Err(Error::InvalidInput(format!("log-graded rule needs 0 < lo < hi, got ({lo}, {hi})")));
    }
    let u = composite_legendre(lo.ln(), hi.ln(), panels, per_panel)?;
    let nodes: Vec<f64> = u.nodes.iter().map(|v| v.exp()).collect();
    let weights = u.weights.iter().zip(&nodes).map(|(w, t)| w * t).collect();
    Ok(QuadratureRule {
        nodes,
        weights,
        lo,
        hi,
        kind: WeightKind::Plain,
    })
}

/// End of the log-graded part of [`endpoint_split_rule`].  Uniform panels
/// start here, far enough from the branch point of `t^{i Im s}` at the
/// origin for 25-node panels of width ≤ 8 to converge to rounding level.
const LOG_GRADED_END: f64 = 4.0;
/// Maximum width of the uniform panels.
const UNIFORM_PANEL_WIDTH: f64 = 8.0;

/// Rule on `[split, hi]` for integrands with an algebraic singularity at 0:
/// log-graded panels on `[split, min(4, hi)]` and, beyond, uniform panels of
/// width at most 8.  `finite_nodes` sets the log-part budget (in panels of
/// 20 nodes) and scales the uniform panel count proportionally.
pub fn endpoint_split_rule(split: f64, hi: f64, finite_nodes: usize) -> Result<QuadratureRule> {
    let log_hi = hi.min(LOG_GRADED_END);
    let log_panels = (finite_nodes / PANEL_NODES).max(1);
    let rule = log_graded(split, log_hi, log_panels, PANEL_NODES)?;
    if hi > LOG_GRADED_END {
        let scale = (finite_nodes / DEFAULT_FINITE_NODES).max(1);
        let lin_panels = ((hi - LOG_GRADED_END) / UNIFORM_PANEL_WIDTH).ceil().max(1.0) as usize * scale;
        let tail = composite_legendre(LOG_GRADED_END, hi, lin_panels, PANEL_NODES + 5)?;
        rule.join(tail)
    } else {
        Ok(rule)
    }
}

/// Working precision for polishing Gauss–Laguerre nodes: the forward
/// recurrence loses about `n² ε` near the smallest roots in double precision.
const LAGUERRE_POLISH_BITS: u32 = 128;

/// `ln |L_{n−1}^α(x)|` and the Newton correction `L_n/L_n'` at `x`, from the
/// three-term recurrence in 128-bit arithmetic.
fn laguerre_root_data(n: usize, alpha: f64, x: f64) -> (f64, f64) {
    let p = LAGUERRE_POLISH_BITS;
    let a = Float::with_val(p, alpha);
    let xf = Float::with_val(p, x);
    let mut prev = Float::with_val(p, 1);
    let mut cur = Float::with_val(p, 1) + &a - &xf;
    let mut t1 = Float::new(p);
    let mut t2 = Float::new(p);
    for k in 1..n {
        // ((2k+1+α−x) L_k − (k+α) L_{k−1}) / (k+1)
        t1.assign(&a - &xf);
        t1 += (2 * k + 1) as u32;
        t1 *= &cur;
        t2.assign(&a + k as u32);
        t2 *= &prev;
        t1 -= &t2;
        t1 /= (k + 1) as u32;
        std::mem::swap(&mut prev, &mut cur);
        std::mem::swap(&mut cur, &mut t1);
    }
    // step = x L_n / (n L_n − (n+α) L_{n−1})
    t1.assign(&cur * n as u32);
    t2.assign(&a + n as u32);
    t2 *= &prev;
    t1 -= &t2;
    let mut step = Float::with_val(p, &cur * &xf);
    step /= &t1;
    let ln_abs = Float::with_val(p, prev.abs_ref()).ln();
    (ln_abs.to_f64(), step.to_f64())
}

/// `n`-point Gauss–Laguerre rule for `∫_0^∞ f(t) t^α e^{−t} dt`.
///
/// Nodes from the Golub–Welsch eigenproblem, polished by Newton's method;
/// weights from `w_i = Γ(n+α+1) x_i / (n! (n+α)² L_{n−1}^α(x_i)²)` in log
/// space so tiny weights keep full relative accuracy.
pub fn weighted_semiinfinite(n: usize, alpha: f64) -> Result<QuadratureRule> {
    if n == 0 || !(alpha > -1.0) {
        return Err(Error::InvalidInput(format!(
            "Gauss–Laguerre needs n ≥ 1 and α > −1, got n={n}, α={alpha}"
        )));
    }
    let jac = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            2.0 * i as f64 + alpha + 1.0
        } else if i + 1 == j || j + 1 == i {
            let k = i.max(j) as f64;
            (k * (k + alpha)).sqrt()
        } else {
            0.0
        }
    });
    let mut nodes: Vec<f64> = nalgebra::SymmetricEigen::new(jac).eigenvalues.iter().copied().collect();
    nodes.sort_by(|a, b| a.total_cmp(b));
    let ln_norm = ln_weight(n, alpha + 1.0) - 2.0 * (n as f64 + alpha).ln();
    let mut weights = Vec::with_capacity(n);
    for x in nodes.iter_mut() {
        *x = x.max(f64::MIN_POSITIVE);
        for _ in 0..8 {
            let (_, step) = laguerre_root_data(n, alpha, *x);
            let next = *x - step;
            if !next.is_finite() || next <= 0.0 {
                break;
            }
            let done = (next - *x).abs() <= 1e-16 * x.abs();
            *x = next;
            if done {
                break;
            }
        }
        let (ln_lm1, _) = laguerre_root_data(n, alpha, *x);
        weights.push((ln_norm + x.ln() - 2.0 * ln_lm1).exp());
    }
    if nodes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidInput(format!("Gauss–Laguerre nodes not separated for n={n}, α={alpha}")));
    }
    Ok(QuadratureRule {
        nodes,
        weights,
        lo: 0.0,
        hi: f64::INFINITY,
        kind: WeightKind::LaguerreWeighted { alpha, rate: 1.0 },
    })
}

/// `Σ w_i f(x_i)` with compensated summation; fails on the first non-finite
/// integrand value, naming the node.
pub fn integrate<F>(rule: &QuadratureRule, f: F) -> Result<Complex64>
where
    F: Fn(f64) -> Complex64,
{
    let mut sum = Complex64::new(0.0, 0.0);
    let mut comp = Complex64::new(0.0, 0.0);
    for (i, (&x, &w)) in rule.nodes.iter().zip(&rule.weights).enumerate() {
        let v = f(x);
        if !v.re.is_finite() || !v.im.is_finite() {
            return Err(Error::NonFinite { node: i, t: x });
        }
        let term = v * w;
        let y = term - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    Ok(sum)
}

/// Real-valued convenience wrapper around [`integrate`].
pub fn integrate_real<F>(rule: &QuadratureRule, f: F) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    integrate(rule, |t| Complex64::new(f(t), 0.0)).map(|z| z.re)
}

/// `∫_0^{hi} t^{s−1} g(t) dt` for `Re s > 0` and `g` smooth at 0, where `rule`
/// covers `[δ, hi]`: the piece on `(0, δ)` is `g(0) δ^s / s` (exact for the
/// leading power; remainder `O(δ^{Re s + 1})`), the rest is quadrature.
pub fn integrate_power_singular<G>(rule: &QuadratureRule, s: Complex64, g: G) -> Result<Complex64>
where
    G: Fn(f64) -> Complex64,
{
    if !(s.re > 0.0) {
        return Err(Error::InvalidInput(format!("power singularity t^(s−1) needs Re s > 0, got {s}")));
    }
    let delta = rule.lo;
    let g0 = g(0.0);
    let head = if delta > 0.0 { g0 * (s * delta.ln()).exp() / s } else { Complex64::new(0.0, 0.0) };
    let body = integrate(rule, |t| ((s - 1.0) * t.ln()).exp() * g(t))?;
    Ok(head + body)
}

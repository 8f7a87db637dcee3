//! Double-precision closed forms for the matrix entries and Ψ_n.

use crate::error::Result;
use crate::quadrature::{endpoint_split_rule, gauss_legendre, integrate, integrate_power_singular, QuadratureConfig};
use crate::specfun::{hyp2f1_terminating_with_bound, ln_factorial, ln_gamma_real, ln_weight, log_gamma, SpectralParameter};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::LN_2;

/// Ratio of the largest term to the result above which an `N_q` entry is
/// flagged as cancellation-dominated.
pub const CANCELLATION_FLAG: f64 = 1e12;

/// An `N_q` entry with its cancellation diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntryValue {
    pub value: Complex64,
    /// Largest term magnitude of the nested ℓ/j sums divided by `|value|`.
    pub cancellation: f64,
    /// `cancellation > CANCELLATION_FLAG`.
    pub flagged: bool,
}

/// Compensated (Neumaier) complex accumulator that also tracks the largest
/// term magnitude.
#[derive(Debug, Clone, Copy, Default)]
struct Accumulator {
    sum: Complex64,
    comp: Complex64,
    max_term: f64,
}

impl Accumulator {
    fn add(&mut self, x: Complex64) {
        self.max_term = self.max_term.max(x.norm());
        self.sum.re = neumaier(&mut self.comp.re, self.sum.re, x.re);
        self.sum.im = neumaier(&mut self.comp.im, self.sum.im, x.im);
    }

    fn total(&self) -> Complex64 {
        self.sum + self.comp
    }
}

fn neumaier(comp: &mut f64, sum: f64, x: f64) -> f64 {
    let t = sum + x;
    if sum.abs() >= x.abs() {
        *comp += (sum - t) + x;
    } else {
        *comp += (x - t) + sum;
    }
    t
}

/// Per-`q` tables shared by every entry of one build: log-factorials,
/// `ln Γ(ℓ+2ξ)`, `ln Γ(j+2q)` and the terminating `₂F₁(−(ℓ−j), 2ξ+j; 2q+j; 1/2)`.
#[derive(Debug, Clone)]
pub struct EntryTables {
    q: SpectralParameter,
    size: usize,
    ln_fact: Vec<f64>,
    ln_gamma_xi: Vec<f64>,
    ln_gamma_q: Vec<Complex64>,
    hyp: Vec<Vec<(Complex64, f64)>>,
}

impl EntryTables {
    /// Tables for indices `0 ≤ k, n < size`.
    pub fn new(q: SpectralParameter, size: usize) -> Result<Self> {
        let xi = q.xi();
        let two_q = 2.0 * q.q();
        let ln_fact = (0..2 * size.max(1)).map(ln_factorial).collect();
        let ln_gamma_xi = (0..size).map(|l| ln_gamma_real(l as f64 + 2.0 * xi)).collect();
        let ln_gamma_q = (0..size)
            .map(|j| log_gamma(two_q + j as f64))
            .collect::<Result<Vec<_>>>()?;
        let half = Complex64::new(0.5, 0.0);
        let mut hyp = Vec::with_capacity(size);
        for l in 0..size {
            let row = (0..=l)
                .map(|j| {
                    let jf = j as f64;
                    hyp2f1_terminating_with_bound(l - j, Complex64::new(2.0 * xi + jf, 0.0), two_q + jf, half)
                })
                .collect::<Result<Vec<_>>>()?;
            hyp.push(row);
        }
        Ok(Self {
            q,
            size,
            ln_fact,
            ln_gamma_xi,
            ln_gamma_q,
            hyp,
        })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// Inner sum `Σ_{j ≤ min(ℓ,k)} Γ(ℓ+2q) 2^{−j} ₂F₁(…) / (j! (ℓ−j)! (k−j)! Γ(j+2q))`.
    ///
    /// Returns the sum and its largest term magnitude.
    fn inner(&self, l: usize, k: usize) -> (Complex64, f64) {
        let mut acc = Accumulator::default();
        let lg_l = self.ln_gamma_q[l];
        for j in 0..=l.min(k) {
            let log_mag = lg_l - self.ln_gamma_q[j]
                - j as f64 * LN_2
                - self.ln_fact[j]
                - self.ln_fact[l - j]
                - self.ln_fact[k - j];
            let (value, bound) = self.hyp[l][j];
            let scale = log_mag.exp();
            acc.add(scale * value);
            acc.max_term = acc.max_term.max(scale.norm() * bound);
        }
        (acc.total(), acc.max_term)
    }

    /// `N_q` entry `(N_q L_n, L_k)_ξ` from the double sum.
    pub fn n_entry(&self, k: usize, n: usize) -> EntryValue {
        let xi = self.q.xi();
        let outer = self.ln_gamma_xi[n] + self.ln_gamma_xi[k] - (k as f64 + 2.0 * xi) * LN_2;
        let mut acc = Accumulator::default();
        for l in 0..=n {
            let mag = (outer - self.ln_fact[n - l] - self.ln_gamma_xi[l]).exp();
            let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
            let (inner, inner_max) = self.inner(l, k);
            acc.add(inner * (sign * mag));
            acc.max_term = acc.max_term.max(inner_max * mag);
        }
        finish(acc)
    }

    /// Every `N_q` entry `0 ≤ k, n < size`, sharing the inner sums:
    /// `out[k][n]`.
    pub fn n_block(&self) -> Vec<Vec<EntryValue>> {
        let size = self.size;
        let xi = self.q.xi();
        let inner: Vec<Vec<(Complex64, f64)>> = (0..size)
            .into_par_iter()
            .map(|l| (0..size).map(|k| self.inner(l, k)).collect())
            .collect();
        (0..size)
            .into_par_iter()
            .map(|k| {
                (0..size)
                    .map(|n| {
                        let outer = self.ln_gamma_xi[n] + self.ln_gamma_xi[k] - (k as f64 + 2.0 * xi) * LN_2;
                        let mut acc = Accumulator::default();
                        for (l, row) in inner.iter().enumerate().take(n + 1) {
                            let mag = (outer - self.ln_fact[n - l] - self.ln_gamma_xi[l]).exp();
                            let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
                            let (inner, inner_max) = row[k];
                            acc.add(inner * (sign * mag));
                            acc.max_term = acc.max_term.max(inner_max * mag);
                        }
                        finish(acc)
                    })
                    .collect()
            })
            .collect()
    }

    /// `M` entry `Γ(k+n+2ξ) 2^{−(k+n+2ξ)} / (k! n!)`.
    pub fn m_entry(&self, k: usize, n: usize) -> f64 {
        m_entry_value(self.q.xi(), k, n)
    }
}

fn finish(acc: Accumulator) -> EntryValue {
    let value = acc.total();
    let cancellation = if value.norm() > 0.0 { acc.max_term / value.norm() } else if acc.max_term > 0.0 { f64::INFINITY } else { 1.0 };
    EntryValue {
        value,
        cancellation,
        flagged: cancellation > CANCELLATION_FLAG,
    }
}

fn m_entry_value(xi: f64, k: usize, n: usize) -> f64 {
    let s = (k + n) as f64 + 2.0 * xi;
    (ln_gamma_real(s) - ln_factorial(k) - ln_factorial(n) - s * LN_2).exp()
}

/// `(M L_n, L_k)_ξ = Γ(k+n+2ξ) 2^{−(k+n+2ξ)} / (k! n!)` (real, positive).
pub fn m_entry(q: SpectralParameter, k: usize, n: usize) -> Complex64 {
    Complex64::new(m_entry_value(q.xi(), k, n), 0.0)
}

/// `(N_q L_n, L_k)_ξ` from the closed-form double sum, with cancellation
/// diagnostics.
pub fn n_entry(q: SpectralParameter, k: usize, n: usize) -> Result<EntryValue> {
    Ok(EntryTables::new(q, k.max(n) + 1)?.n_entry(k, n))
}

/// Sign selecting `A⁺ = M + N_q` or `A⁻ = M − N_q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn factor(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

/// `a±_{kn} = m_{kn} ± n_{kn}`.
pub fn a_entry(sign: Sign, q: SpectralParameter, k: usize, n: usize) -> Result<Complex64> {
    Ok(m_entry(q, k, n) + sign.factor() * n_entry(q, k, n)?.value)
}

/// `d_k = Γ(k+2ξ)/k!`.
pub fn d_entry(q: SpectralParameter, k: usize) -> f64 {
    ln_weight(k, 2.0 * q.xi()).exp()
}

/// First integral of Ψ_n, `∫_{1/2}^1 t^{2ξ−2} (1−t)^n dt`, by Gauss–Legendre.
pub fn psi_first_integral(q: SpectralParameter, n: usize, cfg: &QuadratureConfig) -> Result<f64> {
    let rule = gauss_legendre(cfg.finite_nodes, 0.5, 1.0)?;
    let e = 2.0 * q.xi() - 2.0;
    integrate(&rule, |t| Complex64::new(t.powf(e) * (1.0 - t).powi(n as i32), 0.0)).map(|z| z.re)
}

/// Binomial closed form of the first integral,
/// `Σ_ℓ C(n,ℓ) (−1)^ℓ (1 − 2^{1−ℓ−2ξ}) / (ℓ+2ξ−1)` (with `ln 2` for a zero
/// denominator).  Alternating, so only a cross-check for small `n`.
pub fn psi_first_closed_form(q: SpectralParameter, n: usize) -> f64 {
    let xi = q.xi();
    let mut binom = 1.0;
    let mut sum = 0.0;
    for l in 0..=n {
        if l > 0 {
            binom *= (n - l + 1) as f64 / l as f64;
        }
        let e = l as f64 + 2.0 * xi - 1.0;
        let term = if e == 0.0 { LN_2 } else { -(-e * LN_2).exp_m1() / e };
        let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign * binom * term;
    }
    sum
}

/// Second integral of Ψ_n,
/// `∫_0^1 t^{n+2q−2} (1+t)^{−n−2ξ−1} ((2ξ+4q)t − n − 2(2ξ+1)t²/(1+t) + 2nt/(1+t)) dt`,
/// with the `t^{s−1}` endpoint behaviour integrated exactly below the split.
pub fn psi_second_integral(q: SpectralParameter, n: usize, cfg: &QuadratureConfig) -> Result<Complex64> {
    let xi = q.xi();
    let qv = q.q();
    let nf = n as f64;
    let rule = endpoint_split_rule(cfg.split, 1.0, cfg.finite_nodes)?;
    let lead = 2.0 * xi + 4.0 * qv;
    if n == 0 {
        // the bracket vanishes at 0: t^{2q−2}·bracket = t^{2q−1}·(bracket/t)
        integrate_power_singular(&rule, 2.0 * qv, |t| {
            let reduced = lead - 2.0 * (2.0 * xi + 1.0) * t / (1.0 + t);
            reduced * (1.0 + t).powf(-2.0 * xi - 1.0)
        })
    } else {
        integrate_power_singular(&rule, nf + 2.0 * qv - 1.0, |t| {
            let bracket = lead * t - nf - 2.0 * (2.0 * xi + 1.0) * t * t / (1.0 + t) + 2.0 * nf * t / (1.0 + t);
            bracket * (1.0 + t).powf(-nf - 2.0 * xi - 1.0)
        })
    }
}

/// `Ψ_n = ∫_{1/2}^1 t^{2ξ−2}(1−t)^n dt − (2q−1)^{−1} · (second integral)`.
pub fn psi_entry(q: SpectralParameter, n: usize, cfg: &QuadratureConfig) -> Result<Complex64> {
    let first = psi_first_integral(q, n, cfg)?;
    let second = psi_second_integral(q, n, cfg)?;
    Ok(first - second / (2.0 * q.q() - 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sp(re: f64, im: f64) -> SpectralParameter {
        SpectralParameter::from_parts(re, im).unwrap()
    }

    #[test]
    fn m_entries() {
        assert!((m_entry(sp(1.5, 0.0), 0, 0).re - 0.25 * 2.0 / 2.0 * 1.0 / 1.0 * 0.5).abs() < 1.0);
        let half = sp(0.5, 1.0);
        assert!((m_entry(half, 0, 0).re - 0.5).abs() < 1e-15);
        assert!((m_entry(half, 1, 0).re - 0.25).abs() < 1e-15);
        assert!((m_entry(sp(1.0, 0.0), 0, 0).re - 0.25).abs() < 1e-15);
    }

    #[test]
    fn n_entry_origin() {
        for q in [sp(0.75, 0.0), sp(0.6, 2.0), sp(1.3, -4.0)] {
            let want = (ln_gamma_real(2.0 * q.xi()) - 2.0 * q.xi() * LN_2).exp();
            let v = n_entry(q, 0, 0).unwrap();
            assert!((v.value - want).norm() < 1e-15 * want);
            assert!(!v.flagged);
        }
        // ξ = 1: Γ(2)·2^{−2}
        assert!((n_entry(sp(1.0, 0.0), 0, 0).unwrap().value.re - 0.25).abs() < 1e-15);
    }

    #[test]
    fn a_entry_origin() {
        let q = sp(0.9, 3.0);
        assert!(a_entry(Sign::Minus, q, 0, 0).unwrap().norm() < 1e-16);
        assert!((a_entry(Sign::Plus, sp(1.0, 0.0), 0, 0).unwrap().re - 0.5).abs() < 1e-15);
        assert!((a_entry(Sign::Plus, sp(0.5, 1.0), 0, 0).unwrap().re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn block_matches_single_entries() {
        let q = sp(0.6, 2.0);
        let t = EntryTables::new(q, 7).unwrap();
        let block = t.n_block();
        for k in 0..7 {
            for n in 0..7 {
                let single = n_entry(q, k, n).unwrap().value;
                assert!((block[k][n].value - single).norm() < 1e-14 * single.norm().max(1.0));
            }
        }
    }

    #[test]
    fn real_q_gives_real_entries_and_symmetry() {
        let q = sp(0.75, 0.0);
        let t = EntryTables::new(q, 10).unwrap();
        let b = t.n_block();
        for k in 0..10 {
            for n in 0..10 {
                assert_eq!(b[k][n].value.im, 0.0);
                let (x, y) = (b[k][n].value.re, b[n][k].value.re);
                assert!((x - y).abs() < 1e-12 * x.abs().max(1.0), "({k},{n})");
            }
        }
    }

    #[test]
    fn real_q_n_operator_has_monomial_image() {
        // for real q, N_q L_n = e^{−t} t^n/n!, so (N L_n, L_k) = ∫ e^{−2t} t^{n+2ξ−1} L_k / n! dt
        let q = sp(1.25, 0.0);
        let xi = q.xi();
        for n in 0..6 {
            for k in 0..6 {
                // ∫ e^{−2t} t^{n+α} L_k^α(t) dt = Σ_ℓ (−1)^ℓ C(k+α, k−ℓ) Γ(n+ℓ+2ξ) / (ℓ! 2^{n+ℓ+2ξ})
                let mut want = 0.0;
                for l in 0..=k {
                    let c = (ln_gamma_real(k as f64 + 2.0 * xi) - ln_factorial(k - l) - ln_gamma_real(l as f64 + 2.0 * xi)).exp();
                    let m = (ln_gamma_real((n + l) as f64 + 2.0 * xi) - ln_factorial(l) - ((n + l) as f64 + 2.0 * xi) * LN_2).exp();
                    want += if l % 2 == 0 { c * m } else { -c * m };
                }
                want /= ln_factorial(n).exp();
                let got = n_entry(q, k, n).unwrap().value.re;
                assert!((got - want).abs() < 1e-13 * want.abs().max(1.0), "({k},{n}): {got} vs {want}");
            }
        }
    }

    #[test]
    fn d_entries() {
        assert!((d_entry(sp(0.5, 2.0), 7) - 1.0).abs() < 1e-14);
        assert!((d_entry(sp(1.0, 0.0), 0) - 1.0).abs() < 1e-15);
        assert!((d_entry(sp(1.0, 0.0), 3) - 4.0).abs() < 1e-14);
    }

    #[test]
    fn psi_vanishes_at_q_one() {
        let cfg = QuadratureConfig::default();
        let one = sp(1.0, 0.0);
        assert!((psi_first_integral(one, 0, &cfg).unwrap() - 0.5).abs() < 1e-15);
        for n in 0..=20 {
            let v = psi_entry(one, n, &cfg).unwrap();
            assert!(v.norm() <= 1e-10, "Ψ_{n}(1) = {v}");
        }
    }

    #[test]
    fn psi_first_integral_matches_binomial_form() {
        let cfg = QuadratureConfig::default();
        for q in [sp(0.5, 3.0), sp(0.75, 0.0), sp(1.25, 0.0), sp(0.3, 1.0)] {
            for n in 0..12 {
                let quad = psi_first_integral(q, n, &cfg).unwrap();
                let closed = psi_first_closed_form(q, n);
                assert!((quad - closed).abs() < 1e-12, "ξ={} n={n}", q.xi());
            }
        }
    }
}

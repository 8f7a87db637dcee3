//! Generalised Laguerre polynomials and the weighted basis `L_n^{2ξ−1}`.

use super::gamma::ln_weight;
use crate::error::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// `L_n^α(t)` by the three-term recurrence
/// `(k+1) L_{k+1} = (2k+1+α−t) L_k − (k+α) L_{k−1}`.
pub fn laguerre_eval(n: usize, alpha: f64, t: f64) -> f64 {
    let mut prev = 1.0;
    if n == 0 {
        return prev;
    }
    let mut cur = 1.0 + alpha - t;
    for k in 1..n {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 + alpha - t) * cur - (kf + alpha) * prev) / (kf + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// Values `L_0^α(t), …, L_{count−1}^α(t)` in one recurrence pass.
pub fn laguerre_all(count: usize, alpha: f64, t: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(count);
    if count == 0 {
        return out;
    }
    out.push(1.0);
    if count == 1 {
        return out;
    }
    out.push(1.0 + alpha - t);
    for k in 1..count - 1 {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 + alpha - t) * out[k] - (kf + alpha) * out[k - 1]) / (kf + 1.0);
        out.push(next);
    }
    out
}

/// `L_n^α(t) = Σ_ℓ (−1)^ℓ C(n+α, n−ℓ) t^ℓ/ℓ!` summed term by term, each
/// binomial formed as the product `Π_{i=1}^{n−ℓ} (α+ℓ+i)/i`.  Independent of
/// the recurrence; used to cross-check it.
pub fn laguerre_explicit(n: usize, alpha: f64, t: f64) -> f64 {
    let mut sum = 0.0;
    let mut power = 1.0;
    for l in 0..=n {
        if l > 0 {
            power *= -t / l as f64;
        }
        let binom: f64 = (1..=n - l).map(|i| (alpha + (l + i) as f64) / i as f64).product();
        sum += binom * power;
    }
    sum
}

/// `L_n^α(t)` for complex `α` by the explicit finite sum.
///
/// Coefficients `C(n+α, n−ℓ) = (α+ℓ+1)_{n−ℓ}/(n−ℓ)!` are built by the backward
/// product recursion, so no Gamma function of `α` is needed.
pub fn laguerre_eval_complex_alpha(n: usize, alpha: Complex64, t: f64) -> Complex64 {
    // coeff[ℓ] = C(n+α, n−ℓ); coeff[n] = 1; coeff[ℓ] = coeff[ℓ+1] (α+ℓ+1)/(n−ℓ)
    let mut coeff = vec![Complex64::new(1.0, 0.0); n + 1];
    for l in (0..n).rev() {
        coeff[l] = coeff[l + 1] * (alpha + (l + 1) as f64) / (n - l) as f64;
    }
    let mut sum = Complex64::new(0.0, 0.0);
    let mut power = 1.0;
    for (l, c) in coeff.iter().enumerate() {
        if l > 0 {
            power *= -t / l as f64;
        }
        sum += c * power;
    }
    sum
}

/// The first `order` members of the family `L_n^{2ξ−1}` together with their
/// squared norms `w_n = Γ(n+2ξ)/n!` in `L²(t^{2ξ−1} e^{−t} dt)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LaguerreBasis {
    alpha: f64,
    order: usize,
    log_weights: Vec<f64>,
    weights: Vec<f64>,
}

impl LaguerreBasis {
    /// Basis for `ξ > 0` with `order` members.
    pub fn new(xi: f64, order: usize) -> Result<Self> {
        if !(xi > 0.0) || !xi.is_finite() {
            return Err(Error::InvalidInput(format!("Laguerre basis needs ξ > 0, got {xi}")));
        }
        let log_weights: Vec<f64> = (0..order)
            .map(|n| ln_weight(n, 2.0 * xi))
            .collect();
        let weights = log_weights.iter().map(|l| l.exp()).collect();
        Ok(Self {
            alpha: 2.0 * xi - 1.0,
            order,
            log_weights,
            weights,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// `w_n = Γ(n+2ξ)/n!`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `ln w_n`.
    pub fn log_weights(&self) -> &[f64] {
        &self.log_weights
    }

    /// All basis functions at `t`.
    pub fn eval_all(&self, t: f64) -> Vec<f64> {
        laguerre_all(self.order, self.alpha, t)
    }

    /// `Σ_n c_n L_n(t)`.
    pub fn expand(&self, coeffs: &[Complex64], t: f64) -> Complex64 {
        laguerre_all(coeffs.len(), self.alpha, t)
            .iter()
            .zip(coeffs)
            .map(|(l, c)| c * l)
            .sum()
    }

    /// Weighted norm squared `Σ |c_n|² w_n`.
    pub fn weighted_norm_sq(&self, coeffs: &[Complex64]) -> f64 {
        coeffs
            .iter()
            .zip(&self.weights)
            .map(|(c, w)| c.norm_sqr() * w)
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn low_degree_closed_forms() {
        for &t in &[0.0, 0.3, 2.0, 11.0] {
            assert_eq!(laguerre_eval(0, 0.7, t), 1.0);
            let xi = 0.85;
            assert!((laguerre_eval(1, 2.0 * xi - 1.0, t) - (2.0 * xi - t)).abs() < 1e-14);
            let want = (t * t - 4.0 * t + 2.0) / 2.0;
            assert!((laguerre_eval(2, 0.0, t) - want).abs() < 1e-13 * want.abs().max(1.0));
        }
    }

    #[test]
    fn recurrence_matches_explicit_sum() {
        for &alpha in &[-0.5, 0.0, 0.5, 1.4] {
            for &t in &[0.1, 1.0, 5.0, 20.0] {
                let all = laguerre_all(11, alpha, t);
                for n in 0..=10 {
                    let explicit = laguerre_explicit(n, alpha, t);
                    let scale = explicit.abs().max(1.0);
                    assert!((all[n] - explicit).abs() < 1e-10 * scale, "n={n} α={alpha} t={t}");
                    assert_eq!(all[n], laguerre_eval(n, alpha, t));
                }
            }
        }
    }

    #[test]
    fn complex_alpha_reduces_to_real() {
        for n in 0..12 {
            for &t in &[0.2, 3.0, 9.0] {
                let c = laguerre_eval_complex_alpha(n, Complex64::new(0.3, 0.0), t);
                let r = laguerre_eval(n, 0.3, t);
                assert!((c.re - r).abs() < 1e-11 * r.abs().max(1.0));
                assert_eq!(c.im, 0.0);
            }
        }
    }

    #[test]
    fn complex_alpha_conjugation() {
        let a = Complex64::new(0.2, 4.0);
        for n in 0..9 {
            let z = laguerre_eval_complex_alpha(n, a, 1.7);
            assert_eq!(laguerre_eval_complex_alpha(n, a.conj(), 1.7), z.conj());
        }
    }

    #[test]
    fn basis_weights() {
        let b = LaguerreBasis::new(0.5, 6).unwrap();
        assert!(b.weights().iter().all(|w| (w - 1.0).abs() < 1e-14));
        let b = LaguerreBasis::new(1.0, 4).unwrap();
        assert!((b.weights()[3] - 4.0).abs() < 1e-13);
        assert!(LaguerreBasis::new(0.0, 3).is_err());
        let e0 = [Complex64::new(2.0, 0.0)];
        assert_eq!(b.expand(&e0, 7.0), Complex64::new(2.0, 0.0));
    }
}

//! Terminating Gauss hypergeometric sums `₂F₁(−m, b; c; z)`.

use crate::error::{Error, Result};
use num_complex::Complex64;

/// `₂F₁(−m, b; c; z) = Σ_{i=0}^{m} (−m)_i (b)_i / ((c)_i i!) z^i`, summed exactly
/// (m + 1 terms).  Fails if a denominator `c + i` used by the sum vanishes.
pub fn hyp2f1_terminating(m: usize, b: Complex64, c: Complex64, z: Complex64) -> Result<Complex64> {
    hyp2f1_terminating_with_bound(m, b, c, z).map(|(sum, _)| sum)
}

/// [`hyp2f1_terminating`] together with the largest term magnitude, so
/// callers can gauge the cancellation in the sum.
pub fn hyp2f1_terminating_with_bound(m: usize, b: Complex64, c: Complex64, z: Complex64) -> Result<(Complex64, f64)> {
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = term;
    let mut max_term: f64 = 1.0;
    for i in 0..m {
        let den = c + i as f64;
        if den.norm() == 0.0 {
            return Err(Error::Pole(format!("₂F₁ denominator c + {i} = 0 (c = {c})")));
        }
        let fi = i as f64;
        term = term * (fi - m as f64) * (b + fi) / (den * (fi + 1.0)) * z;
        sum += term;
        max_term = max_term.max(term.norm());
    }
    Ok((sum, max_term))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn trivial_cases() {
        let b = c(1.3, 0.4);
        let cc = c(2.1, -3.0);
        assert_eq!(hyp2f1_terminating(0, b, cc, c(0.5, 0.0)).unwrap(), c(1.0, 0.0));
        let two = hyp2f1_terminating(1, b, cc, c(0.5, 0.0)).unwrap();
        assert!((two - (1.0 - b / (2.0 * cc))).norm() < 1e-15);
    }

    #[test]
    fn equal_parameters_collapse_to_a_power() {
        // ₂F₁(−m, b; b; z) = (1 − z)^m
        for m in 0..30 {
            let b = c(0.75 + m as f64, 2.0);
            let v = hyp2f1_terminating(m, b, b, c(0.5, 0.0)).unwrap();
            let want = 2f64.powi(-(m as i32));
            assert!((v - want).norm() < 1e-14 * want, "m={m}");
        }
    }

    #[test]
    fn chu_vandermonde_at_unit_argument() {
        // ₂F₁(−m, b; c; 1) = (c−b)_m/(c)_m
        let b = c(0.4, 1.0);
        let cc = c(2.5, -0.5);
        for m in 0..12 {
            let v = hyp2f1_terminating(m, b, cc, c(1.0, 0.0)).unwrap();
            let want = crate::specfun::pochhammer(cc - b, m) / crate::specfun::pochhammer(cc, m);
            assert!((v - want).norm() < 1e-12 * want.norm().max(1.0));
        }
    }

    #[test]
    fn pole_detection_and_conjugation() {
        assert!(hyp2f1_terminating(3, c(1.0, 0.0), c(-1.0, 0.0), c(0.5, 0.0)).is_err());
        assert!(hyp2f1_terminating(1, c(1.0, 0.0), c(-1.0, 0.0), c(0.5, 0.0)).is_ok());
        let (b, cc) = (c(1.5, 2.0), c(0.7, -4.0));
        let v = hyp2f1_terminating(6, b, cc, c(0.5, 0.0)).unwrap();
        assert_eq!(hyp2f1_terminating(6, b.conj(), cc.conj(), c(0.5, 0.0)).unwrap(), v.conj());
    }
}

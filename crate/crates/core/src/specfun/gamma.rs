//! Principal-branch complex log-Gamma and derived ratios.
//!
//! Small arguments are shifted upward with `ln Γ(z) = ln Γ(z + m) − Σ ln(z + k)`
//! (principal logarithms preserve the principal branch).

use crate::error::{Error, Result};
use num_complex::Complex64;
use std::f64::consts::PI;

/// `B_{2k} / (2k (2k − 1))` for k = 1..8.
const STIRLING: [f64; 8] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360360.0,
    1.0 / 156.0,
    -3617.0 / 122400.0,
];

/// Minimum modulus and real part at which the Stirling series is applied.
const STIRLING_MIN_ABS: f64 = 17.0;
const STIRLING_MIN_RE: f64 = 8.0;

/// Lanczos coefficients for g = 607/128 (Godfrey), 15 terms.
const LANCZOS_G: f64 = 607.0 / 128.0;
const LANCZOS: [f64; 15] = [
    0.999_999_999_999_997_1,
    57.156_235_665_862_923_517,
    -59.597_960_355_475_491_248,
    14.136_097_974_741_747_174,
    -0.491_913_816_097_620_199_78,
    0.339_946_499_848_118_886_99e-4,
    0.465_236_289_270_485_756_65e-4,
    -0.983_744_753_048_795_646_77e-4,
    0.158_088_703_224_912_488_84e-3,
    -0.210_264_441_724_104_883_19e-3,
    0.217_439_618_115_212_643_20e-3,
    -0.164_318_106_536_763_890_22e-3,
    0.844_182_239_838_527_432_93e-4,
    -0.261_908_384_015_814_086_70e-4,
    0.368_991_826_595_316_227_04e-5,
];

/// Principal branch of `ln Γ(z)`.
///
/// Large arguments (`Re z ≥ 8`, `|z| ≥ 17`) use the Stirling series directly;
/// elsewhere the argument is shifted to `Re z ≥ 1/2` and the Lanczos form is
/// used.  Absolute error about 1e−15 near the real axis, relative error
/// ≤ 1e−13 for |z| ≤ 10³; conjugation-symmetric bit for bit.
pub fn log_gamma(z: Complex64) -> Result<Complex64> {
    if !z.re.is_finite() || !z.im.is_finite() {
        return Err(Error::OutOfRange(format!("log_gamma of non-finite {z}")));
    }
    if z.im == 0.0 && z.re <= 0.0 && z.re == z.re.round() {
        return Err(Error::Pole(format!("Γ at non-positive integer {}", z.re)));
    }
    if z.re >= STIRLING_MIN_RE && z.norm() >= STIRLING_MIN_ABS {
        return Ok(stirling(z));
    }
    let mut w = z;
    let mut shift = Complex64::new(0.0, 0.0);
    while w.re < 0.5 {
        shift += w.ln();
        w += 1.0;
    }
    Ok(lanczos(w) - shift)
}

fn stirling(w: Complex64) -> Complex64 {
    let inv = w.inv();
    let inv2 = inv * inv;
    let mut series = Complex64::new(0.0, 0.0);
    let mut power = inv;
    for c in STIRLING {
        series += power * c;
        power *= inv2;
    }
    let half_ln_two_pi = 0.5 * (2.0 * PI).ln();
    (w - 0.5) * w.ln() - w + half_ln_two_pi + series
}

fn lanczos(z: Complex64) -> Complex64 {
    let zm1 = z - 1.0;
    let mut a = Complex64::new(LANCZOS[0], 0.0);
    for (k, c) in LANCZOS.iter().enumerate().skip(1) {
        a += *c / (zm1 + k as f64);
    }
    let t = zm1 + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (zm1 + 0.5) * t.ln() - t + a.ln()
}

/// `ln Γ(x)` for real `x > 0`.
pub fn ln_gamma_real(x: f64) -> f64 {
    debug_assert!(x > 0.0, "ln_gamma_real needs a positive argument");
    log_gamma(Complex64::new(x, 0.0))
        .map(|v| v.re)
        .unwrap_or(f64::INFINITY)
}

/// `ln n!`.
pub fn ln_factorial(n: usize) -> f64 {
    if n < 2 {
        0.0
    } else {
        ln_gamma_real(n as f64 + 1.0)
    }
}

/// `ln(Γ(n + c) / n!)` for real `c > 0`, as `ln Γ(c) + Σ_{k≤n} ln(1 + (c−1)/k)`.
///
/// Avoids subtracting two large log-Gammas, so the result keeps full
/// relative accuracy for large `n` (these are the basis weights `w_n` with
/// `c = 2ξ` and the Gauss–Laguerre normalisation with `c = α + 1`).
pub fn ln_weight(n: usize, c: f64) -> f64 {
    let shift = c - 1.0;
    let mut acc = ln_gamma_real(c);
    for k in 1..=n {
        acc += (shift / k as f64).ln_1p();
    }
    acc
}

/// `Γ(num) / Γ(den)` formed in log space, so moderate ratios of huge
/// Gammas do not overflow.
pub fn gamma_ratio(num: Complex64, den: Complex64) -> Result<Complex64> {
    Ok((log_gamma(num)? - log_gamma(den)?).exp())
}

/// Rising factorial `(a)_n = a (a+1) ⋯ (a+n−1)` by direct product.
pub fn pochhammer(a: Complex64, n: usize) -> Complex64 {
    (0..n).fold(Complex64::new(1.0, 0.0), |acc, i| acc * (a + i as f64))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn rel(a: Complex64, b: Complex64) -> f64 {
        (a - b).norm() / b.norm().max(1e-300)
    }

    #[test]
    fn trivial_values() {
        assert!(log_gamma(c(1.0, 0.0)).unwrap().norm() < 1e-15);
        assert!(log_gamma(c(2.0, 0.0)).unwrap().norm() < 1e-15);
        let half = log_gamma(c(0.5, 0.0)).unwrap();
        assert!((half.re - 0.5 * PI.ln()).abs() < 1e-15);
        assert_eq!(half.im, 0.0);
        assert!((ln_factorial(10) - 3628800f64.ln()).abs() < 1e-13);
    }

    #[test]
    fn reference_values() {
        // 40-digit mpmath references
        let cases = [
            (c(3.0, 4.0), c(-1.756626784603784110530604181623275785157, 4.742664438034657928194889407550022740888)),
            (c(0.3, -20.0), c(-31.09611695026360461038650132837355249634, -39.60156965128523705107869661492456388016)),
            (c(-2.5, 0.5), c(-0.9350856212982774786825883849413803034468, -8.870962885247459198645824716484508629678)),
            (c(200.0, 700.0), c(210.9393730083495828426679587113202677225, 4171.074275096070846285291551241464765503)),
        ];
        for (z, want) in cases {
            let got = log_gamma(z).unwrap();
            assert!(rel(got, want) < 1e-14, "log_gamma({z}) = {got}, want {want}");
        }
    }

    #[test]
    fn poles_are_rejected() {
        assert!(matches!(log_gamma(c(0.0, 0.0)), Err(Error::Pole(_))));
        assert!(matches!(log_gamma(c(-3.0, 0.0)), Err(Error::Pole(_))));
        assert!(log_gamma(c(-3.0, 1e-9)).is_ok());
    }

    #[test]
    fn conjugation_is_exact() {
        for z in [c(3.0, 4.0), c(0.2, 7.5), c(-4.3, 0.25), c(151.5, 27.56)] {
            assert_eq!(log_gamma(z.conj()).unwrap(), log_gamma(z).unwrap().conj());
        }
    }

    #[test]
    fn ratios() {
        assert!(rel(gamma_ratio(c(5.0, 0.0), c(4.0, 0.0)).unwrap(), c(4.0, 0.0)) < 1e-14);
        let z = c(2.5, -1.5);
        assert!(rel(gamma_ratio(z, z).unwrap(), c(1.0, 0.0)) < 1e-15);
        let want = c(9.0, 2.0) * c(8.0, 2.0);
        assert!(rel(gamma_ratio(c(10.0, 2.0), c(8.0, 2.0)).unwrap(), want) < 1e-13);
        // Both Gammas overflow, the ratio does not.
        let r = gamma_ratio(c(400.5, 0.0), c(399.5, 0.0)).unwrap();
        assert!(rel(r, c(399.5, 0.0)) < 1e-12);
    }

    #[test]
    fn recurrence_holds_on_a_grid() {
        for re in [-7.3, -0.4, 0.1, 1.7, 12.0, 80.0] {
            for im in [-30.0, -2.0, 0.3, 5.0, 60.0] {
                let z = c(re, im);
                let lhs = log_gamma(z + 1.0).unwrap();
                let rhs = log_gamma(z).unwrap() + z.ln();
                assert!((lhs - rhs).norm() < 1e-12 * lhs.norm().max(1.0), "z = {z}");
            }
        }
    }

    #[test]
    fn ln_weight_matches_log_gamma_difference() {
        for &c in &[0.5, 1.0, 1.5, 2.4] {
            for n in [0usize, 1, 7, 60, 250] {
                let direct = ln_gamma_real(n as f64 + c) - ln_factorial(n);
                assert!((ln_weight(n, c) - direct).abs() < 1e-12, "n={n} c={c}");
            }
        }
        assert!((ln_weight(3, 2.0) - 4f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn pochhammer_matches_gamma_ratio() {
        let a = c(0.75, 2.0);
        let p = pochhammer(a, 7);
        assert!(rel(p, gamma_ratio(a + 7.0, a).unwrap()) < 1e-13);
        assert_eq!(pochhammer(a, 0), c(1.0, 0.0));
    }
}

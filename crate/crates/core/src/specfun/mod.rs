//! Complex-parameter special functions.
//!
//! Everything here is plain `f64` arithmetic except the large-argument
//! branch of [`bessel_kernel`], which sums the same series in extended
//! precision because its alternating terms cancel like `e^{2√x}`.

mod bessel;
mod gamma;
mod hypergeometric;
mod incomplete;
mod laguerre;

pub use bessel::{bessel_j_series, bessel_kernel, bessel_kernel_f64, BesselKernel, BESSEL_SERIES_MAX_T};
pub use gamma::{gamma_ratio, ln_factorial, ln_gamma_real, ln_weight, log_gamma, pochhammer};
pub use hypergeometric::{hyp2f1_terminating, hyp2f1_terminating_with_bound};
pub use incomplete::{lower_incomplete_gamma, nq_chi, nq_chi_series, NQ_CHI_MAX_T};
pub use laguerre::{
    laguerre_all, laguerre_eval, laguerre_eval_complex_alpha, laguerre_explicit, LaguerreBasis,
};

use crate::error::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Distance from `q = 1/2` below which a temperature is rejected
/// (`Γ(2q − 1)` has a pole there).
pub const HALF_EXCLUSION: f64 = 1e-12;

/// Complex temperature `q` with `ξ = Re q > 0` and `q ≠ 1/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Complex64", into = "Complex64")]
pub struct SpectralParameter {
    q: Complex64,
    xi: f64,
}

impl SpectralParameter {
    /// Validates and wraps `q`.
    pub fn new(q: Complex64) -> Result<Self> {
        let invalid = |reason| Error::InvalidParameter {
            re: q.re,
            im: q.im,
            reason,
        };
        if !q.re.is_finite() || !q.im.is_finite() {
            return Err(invalid("q must be finite"));
        }
        if q.re <= 0.0 {
            return Err(invalid("Re q must be positive"));
        }
        if (q - Complex64::new(0.5, 0.0)).norm() < HALF_EXCLUSION {
            return Err(invalid("q = 1/2 is excluded (pole of Γ(2q−1))"));
        }
        Ok(Self { q, xi: q.re })
    }

    /// Convenience constructor from real and imaginary parts.
    pub fn from_parts(re: f64, im: f64) -> Result<Self> {
        Self::new(Complex64::new(re, im))
    }

    /// The temperature `q`.
    pub fn q(&self) -> Complex64 {
        self.q
    }

    /// `ξ = Re q`.
    pub fn xi(&self) -> f64 {
        self.xi
    }

    /// Laguerre order parameter `α = 2ξ − 1` of the working basis.
    pub fn alpha(&self) -> f64 {
        2.0 * self.xi - 1.0
    }

    /// The parameter at `conj(q)`.
    pub fn conj(&self) -> Self {
        Self {
            q: self.q.conj(),
            xi: self.xi,
        }
    }

    /// True when `Im q` is exactly zero.
    pub fn is_real(&self) -> bool {
        self.q.im == 0.0
    }
}

impl TryFrom<Complex64> for SpectralParameter {
    type Error = Error;
    fn try_from(q: Complex64) -> Result<Self> {
        Self::new(q)
    }
}

impl From<SpectralParameter> for Complex64 {
    fn from(p: SpectralParameter) -> Complex64 {
        p.q
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accepts_standard_temperatures() {
        let p = SpectralParameter::from_parts(0.75, 2.0).unwrap();
        assert_eq!(p.xi(), 0.75);
        assert_eq!(p.alpha(), 0.5);
        assert_eq!(p.conj().q(), Complex64::new(0.75, -2.0));
    }

    #[test]
    fn rejects_half_and_nonpositive_real_part() {
        assert!(SpectralParameter::from_parts(0.5, 0.0).is_err());
        assert!(SpectralParameter::from_parts(0.5 + 1e-13, 0.0).is_err());
        assert!(SpectralParameter::from_parts(0.0, 3.0).is_err());
        assert!(SpectralParameter::from_parts(-0.1, 1.0).is_err());
        assert!(SpectralParameter::from_parts(f64::NAN, 1.0).is_err());
        // Re q = 1/2 off the real axis is the Maass line and must be allowed.
        assert!(SpectralParameter::from_parts(0.5, 9.5).is_ok());
    }
}

//! Farey map, Gauss map, continued fractions, return times, and pointwise
//! evaluation of the two-branch transfer operators.

use crate::error::{Error, Result};
use crate::specfun::SpectralParameter;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Default number of terms of the `Q_q` series.
pub const DEFAULT_SERIES_CUTOFF: usize = 10_000;

/// A point of the closed unit interval.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct UnitIntervalPoint(f64);

impl UnitIntervalPoint {
    pub fn new(value: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&value) {
            Ok(Self(value))
        } else {
            Err(Error::OutOfRange(format!("{value} is not in [0, 1]")))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Which inverse branch of the Farey map.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    /// `φ_0(x) = x/(1+x)`, onto `[0, 1/2]`.
    Parabolic,
    /// `φ_1(x) = 1/(1+x)`, onto `[1/2, 1]`.
    Expanding,
}

/// Farey map `F(x) = x/(1−x)` on `[0, 1/2]`, `(1−x)/x` on `(1/2, 1]`.
/// The point `1/2` is assigned to the parabolic branch (both give 1).
pub fn farey_apply(x: UnitIntervalPoint) -> UnitIntervalPoint {
    let x = x.0;
    let y = if x <= 0.5 { x / (1.0 - x) } else { (1.0 - x) / x };
    UnitIntervalPoint(y.clamp(0.0, 1.0))
}

/// The local inverses `φ_0(x) = x/(1+x)` and `φ_1(x) = 1/(1+x)`.
pub fn farey_inverse(branch: Branch, x: UnitIntervalPoint) -> UnitIntervalPoint {
    let x = x.0;
    UnitIntervalPoint(match branch {
        Branch::Parabolic => x / (1.0 + x),
        Branch::Expanding => 1.0 / (1.0 + x),
    })
}

/// Gauss map `G(x) = frac(1/x)`, `G(0) = 0`.
pub fn gauss_apply(x: UnitIntervalPoint) -> UnitIntervalPoint {
    if x.0 == 0.0 {
        return UnitIntervalPoint(0.0);
    }
    let inv = 1.0 / x.0;
    UnitIntervalPoint((inv - inv.floor()).clamp(0.0, 1.0))
}

/// First-entry time of the Farey orbit into `(1/2, 1]`, plus one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ReturnTime {
    Finite(u64),
    /// The orbit of 0 never enters `(1/2, 1]`.
    Infinite,
}

/// `τ(x) = n` for `x ∈ (1/(n+1), 1/n]`, from `⌊1/x⌋` with the endpoints
/// re-checked against the interval bounds.
pub fn return_time(x: UnitIntervalPoint) -> ReturnTime {
    let x = x.0;
    if x == 0.0 {
        return ReturnTime::Infinite;
    }
    let mut n = (1.0 / x).floor().max(1.0) as u64;
    while n > 1 && x > 1.0 / n as f64 {
        n -= 1;
    }
    while x <= 1.0 / (n + 1) as f64 {
        n += 1;
    }
    ReturnTime::Finite(n)
}

/// `τ(x)` by iterating `F` until the orbit lands in `(1/2, 1]`; gives up
/// (reporting `Infinite`) after `max_iter` steps.  Cross-check only: the
/// parabolic branch loses precision linearly in the number of steps.
pub fn return_time_by_orbit(x: UnitIntervalPoint, max_iter: u64) -> ReturnTime {
    let mut y = x;
    for k in 1..=max_iter {
        if y.0 > 0.5 {
            return ReturnTime::Finite(k);
        }
        y = farey_apply(y);
    }
    ReturnTime::Infinite
}

/// `[a0; a1, a2, …]` with an optional unexpanded tail in `[0, 1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuedFraction {
    pub a0: u64,
    pub digits: Vec<u64>,
    /// `G^n(x)` after the listed digits; `None` means the expansion
    /// terminated (the number is rational).
    pub remainder: Option<f64>,
}

impl ContinuedFraction {
    /// True when the expansion terminated.
    pub fn is_terminating(&self) -> bool {
        self.remainder.is_none()
    }

    /// Re-folds the digits (and tail) into a real number.
    pub fn value(&self) -> f64 {
        let mut acc = self.remainder.unwrap_or(0.0);
        for &d in self.digits.iter().rev() {
            acc = 1.0 / (d as f64 + acc);
        }
        self.a0 as f64 + acc
    }
}

/// Relative error budget beyond which digits are no longer trustworthy.
const CF_MAX_ERROR: f64 = 1e-3;

/// Continued fraction of `x ≥ 0` with at most `max_digits` digits via the
/// Gauss shift `a_n = ⌊1/G^{n−1}(x)⌋`.
///
/// The floating-point error of the tail is tracked (it grows by `1/y²` per
/// step); a tail indistinguishable from 0 or 1 ends the expansion, which is
/// how rationals such as 7/10 terminate exactly.  Expansion also stops early
/// once the tracked error exceeds 1e−3, leaving the tail as remainder.
pub fn cf_expand(x: f64, max_digits: usize) -> Result<ContinuedFraction> {
    if !(x >= 0.0) || !x.is_finite() {
        return Err(Error::InvalidInput(format!("cf_expand needs finite x ≥ 0, got {x}")));
    }
    let a0 = x.floor();
    let mut y = x - a0;
    let mut err = f64::EPSILON * x.max(1.0);
    let mut digits = Vec::new();
    let terminated = |digits: Vec<u64>| ContinuedFraction {
        a0: a0 as u64,
        digits,
        remainder: None,
    };
    if y <= err {
        return Ok(terminated(digits));
    }
    while digits.len() < max_digits {
        let inv = 1.0 / y;
        let err_inv = err / (y * y) + f64::EPSILON * inv;
        let a = inv.floor();
        let frac = inv - a;
        if frac <= err_inv {
            digits.push(a as u64);
            return Ok(terminated(digits));
        }
        if 1.0 - frac <= err_inv {
            digits.push(a as u64 + 1);
            return Ok(terminated(digits));
        }
        if err_inv > CF_MAX_ERROR {
            break;
        }
        digits.push(a as u64);
        y = frac;
        err = err_inv;
    }
    Ok(ContinuedFraction {
        a0: a0 as u64,
        digits,
        remainder: Some(y),
    })
}

/// Exact continued fraction of `num/den` by the Euclidean algorithm.
pub fn cf_expand_rational(num: u64, den: u64, max_digits: usize) -> Result<ContinuedFraction> {
    if den == 0 {
        return Err(Error::InvalidInput("zero denominator".into()));
    }
    let a0 = num / den;
    let (mut p, mut q) = (den, num % den);
    let mut digits = Vec::new();
    while q != 0 && digits.len() < max_digits {
        digits.push(p / q);
        let r = p % q;
        p = q;
        q = r;
    }
    let remainder = if q == 0 { None } else { Some(q as f64 / p as f64) };
    Ok(ContinuedFraction { a0, digits, remainder })
}

/// The operators evaluated by [`pointwise_operator_apply`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TransferOperator {
    /// `P_{0,q} f(x) = (1+x)^{−2q} f(x/(1+x))`.
    P0,
    /// `P_{1,q} f(x) = (1+x)^{−2q} f(1/(1+x))`.
    P1,
    /// `P_{0,q} + P_{1,q}`.
    Pplus,
    /// `P_{0,q} − P_{1,q}`.
    Pminus,
    /// `Q_q f(x) = Σ_{n≥1} (n+x)^{−2q} f(1/(n+x))`, truncated.
    QTruncated,
}

/// Value of an operator at a point, with the truncation bound of the
/// `Q_q` series (zero for the finite operators, infinite when the series is
/// not absolutely convergent, `ξ ≤ 1/2`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatorValue {
    pub value: Complex64,
    pub tail_bound: f64,
}

/// `|φ'(x)|^q` for the branches, `|φ_i'(x)| = (1+x)^{−2}`: `exp(−2q ln(1+x))`.
fn branch_weight(q: Complex64, x: f64) -> Complex64 {
    (-2.0 * q * x.ln_1p()).exp()
}

/// Evaluates `which` applied to `f` at `x`.
///
/// `x = 0` is rejected for `P0`, `P±` (the parabolic branch returns to the
/// singular point of `χ_{−1}`-type functions) but allowed for `P1` and the
/// `Q` series, whose arguments `1/(n+x)` stay regular.
pub fn pointwise_operator_apply<F>(
    which: TransferOperator,
    q: SpectralParameter,
    f: F,
    x: f64,
    series_cutoff: usize,
) -> Result<OperatorValue>
where
    F: Fn(f64) -> Complex64,
{
    let zero_ok = matches!(which, TransferOperator::P1 | TransferOperator::QTruncated);
    let valid = if zero_ok { (0.0..=1.0).contains(&x) } else { x > 0.0 && x <= 1.0 };
    if !valid {
        return Err(Error::OutOfRange(format!("{which:?} evaluated at x = {x}")));
    }
    let qv = q.q();
    let finite = |value| Ok(OperatorValue { value, tail_bound: 0.0 });
    let w = branch_weight(qv, x);
    match which {
        TransferOperator::P0 => finite(w * f(x / (1.0 + x))),
        TransferOperator::P1 => finite(w * f(1.0 / (1.0 + x))),
        TransferOperator::Pplus => finite(w * (f(x / (1.0 + x)) + f(1.0 / (1.0 + x)))),
        TransferOperator::Pminus => finite(w * (f(x / (1.0 + x)) - f(1.0 / (1.0 + x)))),
        TransferOperator::QTruncated => {
            if series_cutoff == 0 {
                return Err(Error::InvalidInput("Q series needs a cutoff ≥ 1".into()));
            }
            // sum small terms first
            let mut value = Complex64::new(0.0, 0.0);
            for n in (1..=series_cutoff).rev() {
                let y = n as f64 + x;
                value += (-2.0 * qv * y.ln()).exp() * f(1.0 / y);
            }
            let xi = q.xi();
            let tail_bound = if xi > 0.5 {
                let k = series_cutoff as f64 + x;
                let near_zero = [1.0 / (k + 1.0), 0.5 / (k + 1.0), 0.0]
                    .iter()
                    .map(|&t| f(t).norm())
                    .fold(0.0, f64::max);
                near_zero * k.powf(1.0 - 2.0 * xi) / (2.0 * xi - 1.0)
            } else {
                f64::INFINITY
            };
            Ok(OperatorValue { value, tail_bound })
        }
    }
}

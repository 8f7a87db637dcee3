//! Error type shared by every module of the crate.

use num_complex::Complex64;
use thiserror::Error;

/// Result alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// Failures surfaced by the numerical layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// The temperature violates `Re q > 0`, `q != 1/2`, or is not finite.
    #[error("invalid spectral parameter q = {re}{im:+}i: {reason}")]
    InvalidParameter {
        re: f64,
        im: f64,
        reason: &'static str,
    },

    /// A Gamma function (or a Pochhammer denominator) hit a pole.
    #[error("pole at {0}")]
    Pole(String),

    /// Argument outside the documented domain of a routine.
    #[error("argument out of range: {0}")]
    OutOfRange(String),

    /// A series exhausted its term budget before meeting its stopping rule.
    #[error("{what}: no convergence after {terms} terms")]
    NoConvergence { what: String, terms: usize },

    /// An integrand returned a non-finite value.
    #[error("non-finite integrand value at node {node} (t = {t:e})")]
    NonFinite { node: usize, t: f64 },

    /// Generic precondition violation.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Dense linear algebra failed for the system built at `q`.
    #[error("linear algebra failure at q = {}{:+}i: {reason}", q.re, q.im)]
    LinearAlgebra { q: Complex64, reason: String },

    /// Refinement was asked to polish a minimum that is not inside the search window.
    #[error("no interior minimum of the indicator within radius {radius} of q = {}{:+}i", q0.re, q0.im)]
    NoInteriorMinimum { q0: Complex64, radius: f64 },
}

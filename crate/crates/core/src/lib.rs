//! Spectral numerics for the signed transfer operators of the Farey map.
//!
//! The eigenvalue-one problems `P±_q h = h` for the two-branch transfer
//! operators of the Farey map are transported, through an integral
//! transform, to problems `(M ± N_q) φ = φ` on `L²(t^{2ξ−1} e^{−t} dt)`,
//! and then to infinite linear systems in the generalised Laguerre basis
//! `L_n^{2ξ−1}`.  This crate provides:
//!
//! * [`dynamics`] — Farey/Gauss maps, continued fractions, return times and
//!   pointwise evaluation of the transfer operators;
//! * [`specfun`] — complex log-Gamma, Laguerre polynomials, terminating
//!   `₂F₁`, Bessel and incomplete-gamma series;
//! * [`quadrature`] — Gauss–Legendre, Gauss–Laguerre and log-graded rules;
//! * [`matrices`] — closed-form matrix entries, the inhomogeneous vector and
//!   the assembled truncated systems (double and extended precision);
//! * [`oracle`] — brute-force quadrature recomputation of every closed form;
//! * [`solver`] — indicator scans, refinement and the inhomogeneous
//!   norm-growth diagnostic.

pub mod dynamics;
pub mod error;
pub mod hp;
pub mod matrices;
pub mod oracle;
pub mod quadrature;
pub mod solver;
pub mod specfun;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use specfun::{LaguerreBasis, SpectralParameter};

//! Truncated linear systems in the Laguerre basis.
//!
//! With `ξ = Re q`, the basis `L_n = L_n^{2ξ−1}` of `L²(t^{2ξ−1}e^{−t}dt)`
//! has Gram diagonal `d_n = Γ(n+2ξ)/n!`.  The eigenvalue-one problems
//! `(M ± N_q) φ = φ` become `A± Φ = D Φ` with `a±_{kn} = (M L_n, L_k) ±
//! (N_q L_n, L_k)`, and the inhomogeneous problem `(I − M − N_q) φ =
//! (M + N_q − I) χ_{−1}` becomes `(D − A⁺) Φ = Ψ`.  The solver works in the
//! symmetrized frame `Φ̃ = D^{1/2} Φ`, where `Ã± = D^{−1/2} A± D^{−1/2}` and
//! `Ψ̃ = D^{−1/2} Ψ` scaled so that the weighted norm of `Φ` is the plain
//! ℓ² norm of `Φ̃`.

mod entries;
pub mod extended;

pub use entries::{
    a_entry, d_entry, m_entry, n_entry, psi_entry, psi_first_closed_form, psi_first_integral,
    psi_second_integral, EntryTables, EntryValue, Sign, CANCELLATION_FLAG,
};
pub use extended::ExtendedSystem;

use crate::error::{Error, Result};
use crate::hp::precision_bits;
use crate::quadrature::QuadratureConfig;
use crate::specfun::{LaguerreBasis, SpectralParameter};
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// Cancellation ratio above which [`PrecisionMode::Auto`] switches to
/// extended precision.  Much stricter than the warning flag: it keeps the
/// double-precision path within about `1e−12` relative error.
pub const AUTO_CANCELLATION: f64 = 1e4;

/// Arithmetic used to assemble a system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum PrecisionMode {
    /// Double-precision closed forms only.
    Double,
    /// MPFR assembly at [`precision_bits`] (or an explicit bit count).
    Extended,
    /// Double precision unless some entry's cancellation ratio exceeds
    /// [`AUTO_CANCELLATION`].
    #[default]
    Auto,
}

/// Options for [`build_system`].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BuildOptions {
    pub precision: PrecisionMode,
    /// Override for the extended working precision in bits.
    pub extended_bits: Option<u32>,
    /// Rules used for the double-precision Ψ integrals.
    pub quadrature: QuadratureConfig,
}

impl BuildOptions {
    pub fn with_precision(precision: PrecisionMode) -> Self {
        Self {
            precision,
            ..Self::default()
        }
    }
}

/// Order-`N` truncation of the systems at one `q`.  Immutable once built.
#[derive(Debug, Clone)]
pub struct TruncatedSystem {
    q: SpectralParameter,
    order: usize,
    a_plus: DMatrix<Complex64>,
    a_minus: DMatrix<Complex64>,
    d: Vec<f64>,
    psi: Vec<Complex64>,
    symmetrized_plus: DMatrix<Complex64>,
    symmetrized_minus: DMatrix<Complex64>,
    psi_tilde: Vec<Complex64>,
    cancellation: DMatrix<f64>,
    extended: Option<Arc<ExtendedSystem>>,
}

impl TruncatedSystem {
    pub fn q(&self) -> SpectralParameter {
        self.q
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn a(&self, sign: Sign) -> &DMatrix<Complex64> {
        match sign {
            Sign::Plus => &self.a_plus,
            Sign::Minus => &self.a_minus,
        }
    }

    pub fn a_plus(&self) -> &DMatrix<Complex64> {
        &self.a_plus
    }

    pub fn a_minus(&self) -> &DMatrix<Complex64> {
        &self.a_minus
    }

    /// Diagonal `d_k = Γ(k+2ξ)/k!`.
    pub fn d(&self) -> &[f64] {
        &self.d
    }

    pub fn psi(&self) -> &[Complex64] {
        &self.psi
    }

    /// `Ã± = D^{−1/2} A± D^{−1/2}`.
    pub fn symmetrized(&self, sign: Sign) -> &DMatrix<Complex64> {
        match sign {
            Sign::Plus => &self.symmetrized_plus,
            Sign::Minus => &self.symmetrized_minus,
        }
    }

    /// `Ψ̃ = D^{1/2} Ψ`, the right-hand side of `(I − Ã⁺) Φ̃ = Ψ̃`.
    pub fn psi_tilde(&self) -> &[Complex64] {
        &self.psi_tilde
    }

    /// Per-entry cancellation ratio of the double-precision `N_q` sum
    /// (recorded even when the system was assembled in extended precision).
    pub fn cancellation(&self) -> &DMatrix<f64> {
        &self.cancellation
    }

    /// Number of entries whose ratio exceeds [`CANCELLATION_FLAG`].
    pub fn flagged_count(&self) -> usize {
        self.cancellation.iter().filter(|&&r| r > CANCELLATION_FLAG).count()
    }

    pub fn max_cancellation(&self) -> f64 {
        self.cancellation.iter().copied().fold(1.0, f64::max)
    }

    /// The extended-precision assembly, if one was made.
    pub fn extended(&self) -> Option<&Arc<ExtendedSystem>> {
        self.extended.as_ref()
    }

    pub fn is_extended(&self) -> bool {
        self.extended.is_some()
    }

    /// Largest `|Ã±_{kn} − Ã±_{nk}|`.
    pub fn asymmetry(&self, sign: Sign) -> f64 {
        let a = self.symmetrized(sign);
        let n = self.order;
        let mut worst: f64 = 0.0;
        for k in 0..n {
            for j in 0..k {
                worst = worst.max((a[(k, j)] - a[(j, k)]).norm());
            }
        }
        worst
    }

    /// Weighted squared norm `Σ_{n<N} |Ψ_n|² d_n`.
    pub fn psi_weighted_norm_sq(&self) -> f64 {
        self.psi_tilde.iter().map(|z| z.norm_sqr()).sum()
    }
}

/// Assemble the order-`order` truncation at `q`.
pub fn build_system(q: SpectralParameter, order: usize, opts: &BuildOptions) -> Result<TruncatedSystem> {
    if order == 0 {
        return Err(Error::InvalidInput("truncation order must be at least 1".into()));
    }
    let tables = EntryTables::new(q, order)?;
    let block = tables.n_block();
    let d: Vec<f64> = (0..order).map(|k| d_entry(q, k)).collect();
    let cancellation = DMatrix::from_fn(order, order, |k, n| block[k][n].cancellation);
    let max_ratio = cancellation.iter().copied().fold(1.0, f64::max);
    let flagged = cancellation.iter().filter(|&&r| r > CANCELLATION_FLAG).count();
    if flagged > 0 {
        log::warn!(
            "q = {}: {flagged} of {} N-entries lose more than 12 digits to cancellation (worst ratio {max_ratio:.1e})",
            q.q(),
            order * order
        );
    }
    let use_extended = match opts.precision {
        PrecisionMode::Double => false,
        PrecisionMode::Extended => true,
        PrecisionMode::Auto => max_ratio > AUTO_CANCELLATION,
    };

    if use_extended {
        let bits = opts.extended_bits.unwrap_or_else(|| precision_bits(order, q.q()));
        log::debug!("q = {}: assembling order {order} at {bits} bits", q.q());
        let ext = ExtendedSystem::build(q, order, bits)?;
        let to_mat = |v: Vec<Complex64>| DMatrix::from_row_slice(order, order, &v);
        let a_plus = to_mat(ext.a_unsymmetrized(Sign::Plus));
        let a_minus = to_mat(ext.a_unsymmetrized(Sign::Minus));
        let symmetrized_plus = to_mat(ext.a_tilde(Sign::Plus).to_c64());
        let symmetrized_minus = to_mat(ext.a_tilde(Sign::Minus).to_c64());
        let psi = ext.psi().iter().map(|z| z.to_c64()).collect();
        let psi_tilde = ext.psi_tilde().iter().map(|z| z.to_c64()).collect();
        let system = TruncatedSystem {
            q,
            order,
            a_plus,
            a_minus,
            d,
            psi,
            symmetrized_plus,
            symmetrized_minus,
            psi_tilde,
            cancellation,
            extended: Some(Arc::new(ext)),
        };
        return check_finite(system);
    }

    let m = DMatrix::from_fn(order, order, |k, n| tables.m_entry(k, n));
    let nq = DMatrix::from_fn(order, order, |k, n| block[k][n].value);
    let a_plus = DMatrix::from_fn(order, order, |k, n| m[(k, n)] + nq[(k, n)]);
    let a_minus = DMatrix::from_fn(order, order, |k, n| m[(k, n)] - nq[(k, n)]);
    let sqrt_d: Vec<f64> = d.iter().map(|x| x.sqrt()).collect();
    let sym = |a: &DMatrix<Complex64>| DMatrix::from_fn(order, order, |k, n| a[(k, n)] / (sqrt_d[k] * sqrt_d[n]));
    let symmetrized_plus = sym(&a_plus);
    let symmetrized_minus = sym(&a_minus);
    let psi: Vec<Complex64> = {
        use rayon::prelude::*;
        (0..order)
            .into_par_iter()
            .map(|n| psi_entry(q, n, &opts.quadrature))
            .collect::<Result<_>>()?
    };
    let psi_tilde = psi.iter().zip(&sqrt_d).map(|(p, s)| p * *s).collect();
    check_finite(TruncatedSystem {
        q,
        order,
        a_plus,
        a_minus,
        d,
        psi,
        symmetrized_plus,
        symmetrized_minus,
        psi_tilde,
        cancellation,
        extended: None,
    })
}

fn check_finite(s: TruncatedSystem) -> Result<TruncatedSystem> {
    let bad = s.a_plus.iter().chain(s.a_minus.iter()).chain(s.psi.iter()).any(|z| !z.re.is_finite() || !z.im.is_finite());
    if bad {
        return Err(Error::OutOfRange(format!(
            "non-finite entry in the order-{} system at q = {}",
            s.order,
            s.q.q()
        )));
    }
    Ok(s)
}

/// Coefficients `Φ_n` of an expansion `φ = Σ Φ_n L_n^{2ξ−1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientVector {
    coeffs: Vec<Complex64>,
    basis: LaguerreBasis,
}

impl CoefficientVector {
    /// Wrap raw coefficients; the basis order must match their count.
    pub fn new(coeffs: Vec<Complex64>, basis: LaguerreBasis) -> Result<Self> {
        if coeffs.len() != basis.order() {
            return Err(Error::InvalidInput(format!(
                "{} coefficients for a basis of order {}",
                coeffs.len(),
                basis.order()
            )));
        }
        if coeffs.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidInput("non-finite coefficient".into()));
        }
        Ok(Self { coeffs, basis })
    }

    /// Recover `Φ = D^{−1/2} Φ̃` from symmetrized coordinates.
    pub fn from_symmetrized(tilde: &[Complex64], xi: f64) -> Result<Self> {
        let basis = LaguerreBasis::new(xi, tilde.len())?;
        let coeffs = tilde
            .iter()
            .zip(basis.weights())
            .map(|(z, w)| z / w.sqrt())
            .collect();
        Self::new(coeffs, basis)
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn basis(&self) -> &LaguerreBasis {
        &self.basis
    }

    /// `Σ |Φ_n|² w_n`.
    pub fn weighted_norm_sq(&self) -> f64 {
        self.basis.weighted_norm_sq(&self.coeffs)
    }

    /// `φ(t) = Σ Φ_n L_n(t)`.
    pub fn eval(&self, t: f64) -> Complex64 {
        self.basis.expand(&self.coeffs, t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sp(re: f64, im: f64) -> SpectralParameter {
        SpectralParameter::from_parts(re, im).unwrap()
    }

    fn rel(a: Complex64, b: Complex64) -> f64 {
        (a - b).norm() / b.norm().max(1e-300)
    }

    // high-precision references computed independently with mpmath
    #[test]
    fn reference_entries() {
        let m = m_entry(sp(0.75, 0.0), 5, 3).re;
        assert!((m - 0.228_820_824_709_273_35).abs() < 1e-15);
        let n = n_entry(sp(0.75, 2.0), 4, 6).unwrap().value;
        let want = Complex64::new(-0.311_422_868_366_152_1, -1.042_361_530_741_485_9);
        assert!(rel(n, want) < 1e-12, "{n}");
        let a = a_entry(Sign::Plus, sp(0.6, 3.0), 2, 2).unwrap();
        let want = Complex64::new(-2.220_969_200_951_419_5, -0.079_131_919_273_803_53);
        assert!(rel(a, want) < 1e-12, "{a}");
    }

    #[test]
    fn reference_psi() {
        let cfg = QuadratureConfig::default();
        let cases = [
            (sp(0.75, 0.0), [Complex64::new(-0.82842712, 0.0), Complex64::new(-0.080880229, 0.0), Complex64::new(-0.017563731, 0.0)]),
            (sp(1.25, 0.0), [Complex64::new(0.19526215, 0.0), Complex64::new(0.030964406, 0.0), Complex64::new(0.007592421, 0.0)]),
            (
                sp(0.6, 2.0),
                [Complex64::new(0.65873176, 0.10987375), Complex64::new(0.1750409, 0.056594228), Complex64::new(0.05681217, 0.027956219)],
            ),
        ];
        for (q, want) in cases {
            let ext = ExtendedSystem::build(q, 3, 256).unwrap();
            for (n, w) in want.iter().enumerate() {
                let quad = psi_entry(q, n, &cfg).unwrap();
                let closed = ext.psi()[n].to_c64();
                // references carry 8 significant digits
                assert!((quad - w).norm() < 3e-8 * w.norm(), "q={} n={n}: {quad}", q.q());
                assert!((closed - w).norm() < 3e-8 * w.norm(), "q={} n={n}: {closed}", q.q());
            }
        }
    }

    #[test]
    fn extended_matches_double_where_well_conditioned() {
        let cfg = QuadratureConfig::default();
        for q in [sp(0.75, 0.0), sp(0.6, 2.0), sp(0.5, 3.0), sp(1.25, -1.0)] {
            let order = 14;
            let dbl = build_system(q, order, &BuildOptions::with_precision(PrecisionMode::Double)).unwrap();
            let ext = build_system(q, order, &BuildOptions::with_precision(PrecisionMode::Extended)).unwrap();
            for sign in [Sign::Plus, Sign::Minus] {
                let (a, b) = (dbl.symmetrized(sign), ext.symmetrized(sign));
                let scale = b.iter().map(|z| z.norm()).fold(1.0, f64::max);
                let err = (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max);
                assert!(err < 1e-12 * scale * dbl.max_cancellation(), "q={} err={err:e}", q.q());
            }
            for n in 0..order {
                let quad = psi_entry(q, n, &cfg).unwrap();
                let closed = ext.psi()[n];
                assert!((quad - closed).norm() < 1e-11 * closed.norm().max(1e-2), "q={} n={n}: {quad} vs {closed}", q.q());
            }
        }
    }

    #[test]
    fn origin_entries_and_scalar_system() {
        // ξ = 1: a⁺_{00} = 2·Γ(2)·2^{−2} and d_0 = Γ(2)
        let s = build_system(sp(1.0, 0.0), 1, &BuildOptions::default()).unwrap();
        assert!((s.symmetrized(Sign::Plus)[(0, 0)] - 0.5).norm() < 1e-15);
        for mode in [PrecisionMode::Double, PrecisionMode::Extended] {
            let q = sp(0.7, 5.0);
            let s = build_system(q, 3, &BuildOptions::with_precision(mode)).unwrap();
            assert!(s.a_minus()[(0, 0)].norm() < 1e-15);
            let want = 2.0 * (crate::specfun::ln_gamma_real(1.4) - 1.4 * std::f64::consts::LN_2).exp();
            assert!((s.a_plus()[(0, 0)] - want).norm() < 1e-14);
        }
    }

    #[test]
    fn conjugation_invariant() {
        for mode in [PrecisionMode::Double, PrecisionMode::Extended] {
            let q = sp(0.8, 2.5);
            let a = build_system(q, 10, &BuildOptions::with_precision(mode)).unwrap();
            let b = build_system(q.conj(), 10, &BuildOptions::with_precision(mode)).unwrap();
            for sign in [Sign::Plus, Sign::Minus] {
                for (x, y) in a.a(sign).iter().zip(b.a(sign).iter()) {
                    assert!((x.conj() - y).norm() <= 1e-14 * x.norm().max(1.0));
                }
            }
            for (x, y) in a.psi().iter().zip(b.psi()) {
                assert!((x.conj() - y).norm() <= 1e-14 * x.norm().max(1.0));
            }
        }
    }

    #[test]
    fn real_q_symmetric() {
        let s = build_system(sp(0.75, 0.0), 8, &BuildOptions::default()).unwrap();
        assert!(s.asymmetry(Sign::Plus) < 1e-12);
        assert!(s.asymmetry(Sign::Minus) < 1e-12);
        let s = build_system(sp(1.25, 0.0), 21, &BuildOptions::with_precision(PrecisionMode::Extended)).unwrap();
        for sign in [Sign::Plus, Sign::Minus] {
            let a = s.a(sign);
            for k in 0..21 {
                for n in 0..21 {
                    assert_eq!(a[(k, n)].im, 0.0);
                    assert!((a[(k, n)] - a[(n, k)]).norm() <= 1e-11 * a[(k, n)].norm().max(1.0));
                }
            }
        }
    }

    #[test]
    fn rejects_zero_order() {
        assert!(build_system(sp(1.0, 0.0), 0, &BuildOptions::default()).is_err());
        assert!(ExtendedSystem::build(sp(1.0, 0.0), 0, 128).is_err());
    }

    #[test]
    fn coefficient_vector_round_trip() {
        let tilde = vec![Complex64::new(1.0, 0.5), Complex64::new(-0.25, 0.0), Complex64::new(0.0, 2.0)];
        let v = CoefficientVector::from_symmetrized(&tilde, 0.8).unwrap();
        let plain: f64 = tilde.iter().map(|z| z.norm_sqr()).sum();
        assert!((v.weighted_norm_sq() - plain).abs() < 1e-14 * plain);
        let basis = LaguerreBasis::new(0.8, 2).unwrap();
        assert!(CoefficientVector::new(tilde, basis).is_err());
    }
}

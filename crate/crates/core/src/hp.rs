//! Minimal extended-precision complex arithmetic over MPFR floats.
//!
//! Only what the matrix pipeline needs: complex add/mul/reciprocal, dense
//! matrices, Gauss–Jordan inversion and linear solves.  Inner loops use
//! in-place updates with caller-owned temporaries so they do not allocate.

use num_complex::Complex64;
use rug::ops::NegAssign;
use rug::{Assign, Float};

/// Working precision (bits) for a truncation of order `order` at `q`.
///
/// The closed-form sums lose about 1.6 bits per unit of order and the
/// operator norm grows like `e^{π |Im q|}`; 2 bits per unit of each plus a
/// fixed 192-bit guard keeps ≥ 100 correct bits after cancellation.
pub fn precision_bits(order: usize, q: Complex64) -> u32 {
    (2 * order + 192) as u32 + (2.0 * q.im.abs()).ceil() as u32
}

/// Float at precision `prec` holding the exact value of `x`.
pub fn float(prec: u32, x: f64) -> Float {
    Float::with_val(prec, x)
}

/// Complex number with MPFR real and imaginary parts.
#[derive(Debug, Clone, PartialEq)]
pub struct HpComplex {
    pub re: Float,
    pub im: Float,
}

impl HpComplex {
    pub fn zero(prec: u32) -> Self {
        Self {
            re: Float::new(prec),
            im: Float::new(prec),
        }
    }

    pub fn one(prec: u32) -> Self {
        Self::from_real(Float::with_val(prec, 1))
    }

    pub fn from_c64(prec: u32, z: Complex64) -> Self {
        Self {
            re: float(prec, z.re),
            im: float(prec, z.im),
        }
    }

    pub fn from_real(re: Float) -> Self {
        let im = Float::new(re.prec());
        Self { re, im }
    }

    pub fn prec(&self) -> u32 {
        self.re.prec()
    }

    /// Round to the nearest double-precision complex.
    pub fn to_c64(&self) -> Complex64 {
        Complex64::new(self.re.to_f64(), self.im.to_f64())
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        Self {
            re: self.re.clone(),
            im: Float::with_val(self.im.prec(), -&self.im),
        }
    }

    pub fn norm_sqr(&self) -> Float {
        let mut out = Float::with_val(self.prec(), self.re.square_ref());
        out += Float::with_val(self.prec(), self.im.square_ref());
        out
    }

    pub fn add_assign(&mut self, other: &Self) {
        self.re += &other.re;
        self.im += &other.im;
    }

    pub fn sub_assign(&mut self, other: &Self) {
        self.re -= &other.re;
        self.im -= &other.im;
    }

    pub fn add_real(&mut self, r: &Float) {
        self.re += r;
    }

    pub fn mul_real(&mut self, r: &Float) {
        self.re *= r;
        self.im *= r;
    }

    pub fn neg(&mut self) {
        self.re.neg_assign();
        self.im.neg_assign();
    }

    pub fn mul(&self, other: &Self) -> Self {
        let prec = self.prec();
        let mut re = Float::with_val(prec, &self.re * &other.re);
        re -= Float::with_val(prec, &self.im * &other.im);
        let mut im = Float::with_val(prec, &self.re * &other.im);
        im += Float::with_val(prec, &self.im * &other.re);
        Self { re, im }
    }

    /// `self *= other`, using `tmp` as scratch.
    pub fn mul_assign(&mut self, other: &Self, tmp: &mut Scratch) {
        tmp.a.assign(&self.re * &other.re);
        tmp.b.assign(&self.im * &other.im);
        tmp.a -= &tmp.b;
        tmp.b.assign(&self.re * &other.im);
        self.im *= &other.re;
        self.im += &tmp.b;
        self.re.assign(&tmp.a);
    }

    /// `self += a · b`.
    pub fn add_mul(&mut self, a: &Self, b: &Self, tmp: &mut Scratch) {
        tmp.a.assign(&a.re * &b.re);
        self.re += &tmp.a;
        tmp.a.assign(&a.im * &b.im);
        self.re -= &tmp.a;
        tmp.a.assign(&a.re * &b.im);
        self.im += &tmp.a;
        tmp.a.assign(&a.im * &b.re);
        self.im += &tmp.a;
    }

    /// `self −= a · b`.
    pub fn sub_mul(&mut self, a: &Self, b: &Self, tmp: &mut Scratch) {
        tmp.a.assign(&a.re * &b.re);
        self.re -= &tmp.a;
        tmp.a.assign(&a.im * &b.im);
        self.re += &tmp.a;
        tmp.a.assign(&a.re * &b.im);
        self.im -= &tmp.a;
        tmp.a.assign(&a.im * &b.re);
        self.im -= &tmp.a;
    }

    /// `self += a · r` for real `r`.
    pub fn add_mul_real(&mut self, a: &Self, r: &Float, tmp: &mut Scratch) {
        tmp.a.assign(&a.re * r);
        self.re += &tmp.a;
        tmp.a.assign(&a.im * r);
        self.im += &tmp.a;
    }

    /// `1 / self`, or `None` for zero.
    pub fn recip(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        let n = self.norm_sqr();
        let re = Float::with_val(self.prec(), &self.re / &n);
        let mut im = Float::with_val(self.prec(), &self.im / &n);
        im.neg_assign();
        Some(Self { re, im })
    }

    /// `self / other`, or `None` when dividing by zero.
    pub fn div(&self, other: &Self) -> Option<Self> {
        other.recip().map(|r| self.mul(&r))
    }
}

/// Reusable temporaries for allocation-free inner loops.
#[derive(Debug)]
pub struct Scratch {
    a: Float,
    b: Float,
}

impl Scratch {
    pub fn new(prec: u32) -> Self {
        Self {
            a: Float::new(prec),
            b: Float::new(prec),
        }
    }
}

/// Dense row-major complex matrix in extended precision.
#[derive(Debug, Clone, PartialEq)]
pub struct HpMatrix {
    rows: usize,
    cols: usize,
    prec: u32,
    data: Vec<HpComplex>,
}

impl HpMatrix {
    pub fn zeros(rows: usize, cols: usize, prec: u32) -> Self {
        Self {
            rows,
            cols,
            prec,
            data: vec![HpComplex::zero(prec); rows * cols],
        }
    }

    pub fn identity(n: usize, prec: u32) -> Self {
        let mut m = Self::zeros(n, n, prec);
        for i in 0..n {
            m[(i, i)] = HpComplex::one(prec);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    /// Entrywise rounding to double precision (row-major).
    pub fn to_c64(&self) -> Vec<Complex64> {
        self.data.iter().map(HpComplex::to_c64).collect()
    }

    /// `I − self` (square matrices).
    pub fn identity_minus(&self) -> Self {
        let one = Float::with_val(self.prec, 1);
        let mut out = self.clone();
        for z in &mut out.data {
            z.neg();
        }
        for i in 0..self.rows {
            out[(i, i)].add_real(&one);
        }
        out
    }

    /// Entrywise `self + sign · other`.
    pub fn combine(&self, other: &Self, sign: f64) -> Self {
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&other.data) {
            if sign >= 0.0 {
                a.add_assign(b);
            } else {
                a.sub_assign(b);
            }
        }
        out
    }

    /// Matrix–vector product.
    pub fn mul_vec(&self, v: &[HpComplex]) -> Vec<HpComplex> {
        let mut tmp = Scratch::new(self.prec);
        (0..self.rows)
            .map(|i| {
                let mut acc = HpComplex::zero(self.prec);
                for (j, vj) in v.iter().enumerate().take(self.cols) {
                    acc.add_mul(&self[(i, j)], vj, &mut tmp);
                }
                acc
            })
            .collect()
    }

    /// Inverse by in-place Gauss–Jordan elimination with partial pivoting.
    /// Returns `None` if an exactly zero pivot is met.
    pub fn inverse(&self) -> Option<Self> {
        assert_eq!(self.rows, self.cols, "inverse of a non-square matrix");
        let n = self.rows;
        let mut a = self.clone();
        let mut swaps = Vec::with_capacity(n);
        let mut tmp = Scratch::new(self.prec);
        for k in 0..n {
            let p = a.pivot_row(k)?;
            a.swap_rows(k, p);
            swaps.push(p);
            let inv = a[(k, k)].recip()?;
            a[(k, k)] = HpComplex::one(self.prec);
            for j in 0..n {
                a[(k, j)].mul_assign(&inv, &mut tmp);
            }
            let pivot_row: Vec<HpComplex> = a.data[k * n..(k + 1) * n].to_vec();
            for i in 0..n {
                if i == k {
                    continue;
                }
                let f = std::mem::replace(&mut a[(i, k)], HpComplex::zero(self.prec));
                if f.is_zero() {
                    continue;
                }
                let row = &mut a.data[i * n..(i + 1) * n];
                for (dst, src) in row.iter_mut().zip(&pivot_row) {
                    dst.sub_mul(&f, src, &mut tmp);
                }
            }
        }
        for k in (0..n).rev() {
            let p = swaps[k];
            if p != k {
                for i in 0..n {
                    a.data.swap(i * n + k, i * n + p);
                }
            }
        }
        Some(a)
    }

    /// Solves `self · x = b` by Gaussian elimination with partial pivoting.
    pub fn solve(&self, b: &[HpComplex]) -> Option<Vec<HpComplex>> {
        assert_eq!(self.rows, self.cols, "solve with a non-square matrix");
        let n = self.rows;
        let mut a = self.clone();
        let mut x: Vec<HpComplex> = b.to_vec();
        let mut tmp = Scratch::new(self.prec);
        for k in 0..n {
            let p = a.pivot_row(k)?;
            a.swap_rows(k, p);
            x.swap(k, p);
            let inv = a[(k, k)].recip()?;
            for i in k + 1..n {
                let f = a[(i, k)].mul(&inv);
                if f.is_zero() {
                    continue;
                }
                for j in k..n {
                    let src = a[(k, j)].clone();
                    a[(i, j)].sub_mul(&f, &src, &mut tmp);
                }
                let xk = x[k].clone();
                x[i].sub_mul(&f, &xk, &mut tmp);
            }
        }
        for k in (0..n).rev() {
            for j in k + 1..n {
                let xj = x[j].clone();
                x[k].sub_mul(&a[(k, j)], &xj, &mut tmp);
            }
            let inv = a[(k, k)].recip()?;
            x[k].mul_assign(&inv, &mut tmp);
        }
        Some(x)
    }

    fn pivot_row(&self, k: usize) -> Option<usize> {
        let mut best = k;
        let mut best_norm = self[(k, k)].norm_sqr();
        for i in k + 1..self.rows {
            let v = self[(i, k)].norm_sqr();
            if v > best_norm {
                best = i;
                best_norm = v;
            }
        }
        if best_norm.is_zero() {
            None
        } else {
            Some(best)
        }
    }

    fn swap_rows(&mut self, i: usize, j: usize) {
        if i != j {
            let n = self.cols;
            for c in 0..n {
                self.data.swap(i * n + c, j * n + c);
            }
        }
    }
}

impl std::ops::Index<(usize, usize)> for HpMatrix {
    type Output = HpComplex;
    fn index(&self, (i, j): (usize, usize)) -> &HpComplex {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for HpMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut HpComplex {
        &mut self.data[i * self.cols + j]
    }
}

/// Euclidean norm of a vector, rounded to `f64`.
pub fn vec_norm(v: &[HpComplex]) -> f64 {
    match v.first() {
        None => 0.0,
        Some(first) => {
            let mut acc = Float::new(first.prec());
            for z in v {
                acc += z.norm_sqr();
            }
            acc.sqrt().to_f64()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const P: u32 = 256;

    fn hc(re: f64, im: f64) -> HpComplex {
        HpComplex::from_c64(P, Complex64::new(re, im))
    }

    #[test]
    fn complex_arithmetic() {
        let a = hc(1.5, -2.0);
        let b = hc(0.25, 3.0);
        assert_eq!(a.mul(&b).to_c64(), Complex64::new(1.5, -2.0) * Complex64::new(0.25, 3.0));
        let q = a.div(&b).unwrap().mul(&b);
        assert!((q.to_c64() - a.to_c64()).norm() < 1e-30);
        let mut acc = hc(1.0, 1.0);
        let mut tmp = Scratch::new(P);
        acc.add_mul(&a, &b, &mut tmp);
        acc.sub_mul(&a, &b, &mut tmp);
        assert_eq!(acc.to_c64(), Complex64::new(1.0, 1.0));
        let mut m = a.clone();
        m.mul_assign(&b, &mut tmp);
        assert_eq!(m, a.mul(&b));
        assert!(HpComplex::zero(P).recip().is_none());
    }

    #[test]
    fn inverse_and_solve_agree() {
        let n = 5;
        let mut m = HpMatrix::zeros(n, n, P);
        for i in 0..n {
            for j in 0..n {
                // Hilbert-like complex matrix, with zero leading entry to force pivoting
                let v = if i == 0 && j == 0 { 0.0 } else { 1.0 / (i + j + 1) as f64 };
                m[(i, j)] = hc(v, 0.1 * (i as f64 - j as f64));
            }
        }
        let inv = m.inverse().unwrap();
        let mut tmp = Scratch::new(P);
        for i in 0..n {
            for j in 0..n {
                let mut acc = HpComplex::zero(P);
                for k in 0..n {
                    acc.add_mul(&m[(i, k)], &inv[(k, j)], &mut tmp);
                }
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((acc.to_c64() - Complex64::new(want, 0.0)).norm() < 1e-60);
            }
        }
        let b: Vec<HpComplex> = (0..n).map(|i| hc(i as f64, 1.0)).collect();
        let x = m.solve(&b).unwrap();
        let back = m.mul_vec(&x);
        for (u, v) in back.iter().zip(&b) {
            assert!((u.to_c64() - v.to_c64()).norm() < 1e-60);
        }
        let via_inv = inv.mul_vec(&b);
        for (u, v) in via_inv.iter().zip(&x) {
            assert!((u.to_c64() - v.to_c64()).norm() < 1e-50);
        }
    }

    #[test]
    fn singular_matrix_is_detected() {
        let m = HpMatrix::zeros(3, 3, P);
        assert!(m.inverse().is_none());
        assert!(m.solve(&vec![hc(1.0, 0.0); 3]).is_none());
    }

    #[test]
    fn identity_minus_and_norm() {
        let m = HpMatrix::identity(3, P);
        let z = m.identity_minus();
        assert!(z.to_c64().iter().all(|v| v.norm() == 0.0));
        assert_eq!(vec_norm(&[hc(3.0, 0.0), hc(0.0, 4.0)]), 5.0);
    }
}

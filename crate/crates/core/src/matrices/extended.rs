//! Extended-precision assembly of the symmetrized systems.
//!
//! All sums are evaluated in MPFR arithmetic at a caller-chosen precision
//! (see [`crate::hp::precision_bits`]).  The `N_q` block is factored as
//! `S = R·H·C` with
//!
//! * `R[n][ℓ] = (−1)^ℓ / ((n−ℓ)! (2ξ)_ℓ)`,
//! * `H[ℓ][j] = 2^{−j} (j+2q)_{ℓ−j} F(ℓ−j, j) / (j! (ℓ−j)!)`,
//! * `C[j][k] = 1/(k−j)!`,
//!
//! where `F(m, j) = ₂F₁(−m, 2ξ+j; 2q+j; 1/2)`, so that
//! `Ñ_{kn} = 2^{−2ξ} 2^{−k} s_n s_k S[n][k]` with `s_n = √((2ξ)_n n!)`.
//! The `M` block is `M̃_{kn} = 2^{−2ξ} (2ξ)_{k+n} 2^{−k−n} / (s_k s_n)`.

use super::Sign;
use crate::error::{Error, Result};
use crate::hp::{HpComplex, HpMatrix, Scratch};
use crate::specfun::SpectralParameter;
use rug::float::Constant;
use rug::ops::NegAssign;
use rug::{Assign, Float};

/// Extended-precision symmetrized system `M̃`, `Ñ`, `Ψ` and `Ψ̃ = D^{1/2} Ψ`.
#[derive(Debug, Clone)]
pub struct ExtendedSystem {
    q: SpectralParameter,
    order: usize,
    prec: u32,
    m_tilde: HpMatrix,
    n_tilde: HpMatrix,
    psi: Vec<HpComplex>,
    psi_tilde: Vec<HpComplex>,
    sqrt_d: Vec<Float>,
}

impl ExtendedSystem {
    /// Assemble the order-`order` system at working precision `prec` bits.
    pub fn build(q: SpectralParameter, order: usize, prec: u32) -> Result<Self> {
        if order == 0 {
            return Err(Error::InvalidInput("truncation order must be at least 1".into()));
        }
        let p = prec;
        let n_max = order;
        let two_xi = Float::with_val(p, 2.0 * q.xi());
        let two_q = HpComplex::from_c64(p, 2.0 * q.q());

        // factorials, (2ξ)_i and their reciprocals, i ≤ 2N
        let mut fact = Vec::with_capacity(2 * n_max + 1);
        let mut poch = Vec::with_capacity(2 * n_max + 1);
        fact.push(Float::with_val(p, 1));
        poch.push(Float::with_val(p, 1));
        for i in 1..=2 * n_max {
            let f = Float::with_val(p, &fact[i - 1] * i as u32);
            let mut a = Float::with_val(p, &two_xi + (i - 1) as u32);
            a *= &poch[i - 1];
            fact.push(f);
            poch.push(a);
        }
        let inv_fact: Vec<Float> = fact.iter().map(|f| Float::with_val(p, f.recip_ref())).collect();

        let mut c0 = Float::with_val(p, -&two_xi);
        c0.exp2_mut();
        let s: Vec<Float> = (0..n_max)
            .map(|n| {
                let mut v = Float::with_val(p, &poch[n] * &fact[n]);
                v.sqrt_mut();
                v
            })
            .collect();

        // reciprocals 1/(2q+m), grown on demand
        let mut recips = Recips::new(two_q.clone());
        recips.ensure(2 * n_max + 2)?;

        // M̃
        let mut m_tilde = HpMatrix::zeros(n_max, n_max, p);
        for k in 0..n_max {
            for n in 0..n_max {
                let mut v = Float::with_val(p, &c0 * &poch[k + n]);
                v >>= (k + n) as u32;
                v /= &s[k];
                v /= &s[n];
                m_tilde[(k, n)] = HpComplex::from_real(v);
            }
        }

        let n_tilde = n_block(&two_xi, &two_q, &recips, &fact, &inv_fact, &poch, &c0, &s, n_max, p);

        // Ψ_n = Σ_ℓ C(n,ℓ)(−1)^ℓ [E(ℓ) − 2^{−ℓ−2ξ} G(ℓ)/(2q−1)]
        let mut two_q_minus_one = two_q.clone();
        two_q_minus_one.re -= 1u32;
        let inv_tqm1 = two_q_minus_one
            .recip()
            .ok_or_else(|| Error::Pole("Ψ_n is undefined at q = 1/2".into()))?;
        let mut tmp = Scratch::new(p);
        let mut v_l: Vec<HpComplex> = Vec::with_capacity(n_max);
        let ln2 = Float::with_val(p, Constant::Log2);
        for l in 0..n_max {
            let g = g_series(l, &two_xi, &mut recips, p)?;
            let mut coef = Float::with_val(p, &c0 >> l as u32);
            coef.neg_assign();
            let mut term = g;
            term.mul_assign(&inv_tqm1, &mut tmp);
            term.mul_real(&coef);
            // E(ℓ)
            let e = Float::with_val(p, &two_xi + l as u32) - 1u32;
            let e_val = if e.is_zero() {
                ln2.clone()
            } else {
                let mut pw = Float::with_val(p, -&e);
                pw.exp2_mut(); // 2^{1−ℓ−2ξ}
                let num = Float::with_val(p, 1u32 - &pw);
                num / &e
            };
            term.add_real(&e_val);
            v_l.push(term);
        }
        let mut psi = Vec::with_capacity(n_max);
        for n in 0..n_max {
            let mut acc = HpComplex::zero(p);
            let mut binom = Float::with_val(p, 1);
            for (l, v) in v_l.iter().enumerate().take(n + 1) {
                if l > 0 {
                    binom *= (n - l + 1) as u32;
                    binom /= l as u32;
                }
                if l % 2 == 0 {
                    acc.add_mul_real(v, &binom, &mut tmp);
                } else {
                    let mut nb = binom.clone();
                    nb.neg_assign();
                    acc.add_mul_real(v, &nb, &mut tmp);
                }
            }
            psi.push(acc);
        }

        // √d_n = √(Γ(2ξ)(2ξ)_n / n!)
        let gamma = Float::with_val(p, two_xi.gamma_ref());
        let sqrt_d: Vec<Float> = (0..n_max)
            .map(|n| {
                let mut v = Float::with_val(p, &gamma * &poch[n]);
                v /= &fact[n];
                v.sqrt_mut();
                v
            })
            .collect();
        let psi_tilde = psi
            .iter()
            .zip(&sqrt_d)
            .map(|(z, d)| {
                let mut z = z.clone();
                z.mul_real(d);
                z
            })
            .collect();

        Ok(Self {
            q,
            order,
            prec,
            m_tilde,
            n_tilde,
            psi,
            psi_tilde,
            sqrt_d,
        })
    }

    pub fn q(&self) -> SpectralParameter {
        self.q
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    pub fn m_tilde(&self) -> &HpMatrix {
        &self.m_tilde
    }

    pub fn n_tilde(&self) -> &HpMatrix {
        &self.n_tilde
    }

    /// `Ã± = M̃ ± Ñ`.
    pub fn a_tilde(&self, sign: Sign) -> HpMatrix {
        self.m_tilde.combine(&self.n_tilde, sign.factor())
    }

    pub fn psi(&self) -> &[HpComplex] {
        &self.psi
    }

    pub fn psi_tilde(&self) -> &[HpComplex] {
        &self.psi_tilde
    }

    /// `√d_n`, the symmetrizing scale.
    pub fn sqrt_d(&self) -> &[Float] {
        &self.sqrt_d
    }

    /// Unsymmetrized `a±_{kn} = √(d_k d_n) ã±_{kn}`, rounded (row-major).
    pub fn a_unsymmetrized(&self, sign: Sign) -> Vec<num_complex::Complex64> {
        let a = self.a_tilde(sign);
        let n = self.order;
        let mut out = Vec::with_capacity(n * n);
        for k in 0..n {
            for j in 0..n {
                let mut z = a[(k, j)].clone();
                z.mul_real(&self.sqrt_d[k]);
                z.mul_real(&self.sqrt_d[j]);
                out.push(z.to_c64());
            }
        }
        out
    }
}

/// Reciprocals `1/(2q+m)`, `m = 0, 1, …`.
struct Recips {
    two_q: HpComplex,
    values: Vec<HpComplex>,
}

impl Recips {
    fn new(two_q: HpComplex) -> Self {
        Self { two_q, values: Vec::new() }
    }

    fn ensure(&mut self, len: usize) -> Result<()> {
        while self.values.len() < len {
            let m = self.values.len();
            let mut z = self.two_q.clone();
            z.re += m as u32;
            let r = z
                .recip()
                .ok_or_else(|| Error::Pole(format!("2q + {m} vanishes")))?;
            self.values.push(r);
        }
        Ok(())
    }

    fn get(&self, m: usize) -> &HpComplex {
        &self.values[m]
    }
}

/// `G(ℓ) = Σ_i (ℓ+2ξ)_i / (2q)_i · 2^{−i}`, summed to working precision.
fn g_series(l: usize, two_xi: &Float, recips: &mut Recips, p: u32) -> Result<HpComplex> {
    let mut tmp = Scratch::new(p);
    let mut sum = HpComplex::one(p);
    let mut term = HpComplex::one(p);
    let a = Float::with_val(p, two_xi + l as u32);
    let cutoff_bits = p as i32 + 8;
    let mut i = 0usize;
    loop {
        recips.ensure(i + 1)?;
        let mut factor = Float::with_val(p, &a + i as u32);
        factor >>= 1u32;
        term.mul_assign(recips.get(i), &mut tmp);
        term.mul_real(&factor);
        sum.add_assign(&term);
        i += 1;
        // ratio → 1/2 eventually; stop once the term is negligible
        let mag = term.norm_sqr();
        let total = sum.norm_sqr();
        if i > l + 8 && !mag.is_zero() && !total.is_zero() {
            let rel = (mag.get_exp().unwrap_or(i32::MIN) - total.get_exp().unwrap_or(i32::MIN)) / 2;
            if rel < -cutoff_bits {
                break;
            }
        }
        if mag.is_zero() {
            break;
        }
        if i > 100_000 {
            return Err(Error::NoConvergence {
                what: "Ψ hypergeometric tail".into(),
                terms: i,
            });
        }
    }
    Ok(sum)
}

#[allow(clippy::too_many_arguments)]
fn n_block(
    two_xi: &Float,
    two_q: &HpComplex,
    recips: &Recips,
    fact: &[Float],
    inv_fact: &[Float],
    poch: &[Float],
    c0: &Float,
    s: &[Float],
    n_max: usize,
    p: u32,
) -> HpMatrix {
    let mut tmp = Scratch::new(p);

    // F(m, j) = Σ_i (−1)^i C(m,i) u_j[i], u_j[i+1] = u_j[i] (2ξ+j+i) / (2(2q+j+i))
    let mut f_tab: Vec<Vec<HpComplex>> = Vec::with_capacity(n_max);
    for j in 0..n_max {
        let len = n_max - j;
        let mut u = Vec::with_capacity(len);
        u.push(HpComplex::one(p));
        for i in 0..len.saturating_sub(1) {
            let mut next = u[i].clone();
            next.mul_assign(recips.get(j + i), &mut tmp);
            let mut factor = Float::with_val(p, two_xi + (j + i) as u32);
            factor >>= 1u32;
            next.mul_real(&factor);
            u.push(next);
        }
        let mut row = Vec::with_capacity(len);
        for m in 0..len {
            let mut acc = HpComplex::zero(p);
            let mut binom = Float::with_val(p, 1);
            for (i, ui) in u.iter().enumerate().take(m + 1) {
                if i > 0 {
                    binom *= (m - i + 1) as u32;
                    binom /= i as u32;
                }
                if i % 2 == 0 {
                    acc.add_mul_real(ui, &binom, &mut tmp);
                } else {
                    let mut nb = binom.clone();
                    nb.neg_assign();
                    acc.add_mul_real(ui, &nb, &mut tmp);
                }
            }
            row.push(acc);
        }
        f_tab.push(row);
    }

    // H[ℓ][j] = 2^{−j} (j+2q)_{ℓ−j} F(ℓ−j, j) / (j! (ℓ−j)!)
    let mut h: Vec<Vec<HpComplex>> = (0..n_max).map(|l| Vec::with_capacity(l + 1)).collect();
    for j in 0..n_max {
        let mut rising = HpComplex::one(p);
        for l in j..n_max {
            let m = l - j;
            if m > 0 {
                let mut z = two_q.clone();
                z.re += (j + m - 1) as u32;
                rising.mul_assign(&z, &mut tmp);
            }
            let mut entry = rising.mul(&f_tab[j][m]);
            let mut scale = Float::with_val(p, &inv_fact[j] * &inv_fact[m]);
            scale >>= j as u32;
            entry.mul_real(&scale);
            h[l].push(entry);
        }
    }

    // T[ℓ][k] = Σ_{j ≤ min(ℓ,k)} H[ℓ][j] / (k−j)!
    let mut t_tab: Vec<Vec<HpComplex>> = Vec::with_capacity(n_max);
    for row in &h {
        let l = row.len() - 1;
        let mut out = Vec::with_capacity(n_max);
        for k in 0..n_max {
            let mut acc = HpComplex::zero(p);
            for (j, hv) in row.iter().enumerate().take(l.min(k) + 1) {
                acc.add_mul_real(hv, &inv_fact[k - j], &mut tmp);
            }
            out.push(acc);
        }
        t_tab.push(out);
    }
    drop(h);

    // S[n][k] = Σ_ℓ R[n][ℓ] T[ℓ][k];  Ñ_{kn} = c0 2^{−k} s_n s_k S[n][k]
    let mut out = HpMatrix::zeros(n_max, n_max, p);
    let mut r = Float::new(p);
    for n in 0..n_max {
        let r_row: Vec<Float> = (0..=n)
            .map(|l| {
                r.assign(&fact[n - l] * &poch[l]);
                let mut v = Float::with_val(p, r.recip_ref());
                if l % 2 == 1 {
                    v.neg_assign();
                }
                v
            })
            .collect();
        for k in 0..n_max {
            let mut acc = HpComplex::zero(p);
            for (l, rv) in r_row.iter().enumerate() {
                acc.add_mul_real(&t_tab[l][k], rv, &mut tmp);
            }
            let mut scale = Float::with_val(p, c0 * &s[n]);
            scale *= &s[k];
            scale >>= k as u32;
            acc.mul_real(&scale);
            out[(k, n)] = acc;
        }
    }
    out
}

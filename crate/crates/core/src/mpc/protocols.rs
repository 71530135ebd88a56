//! Comparison, equality, division and natural logarithm on shared values.

use crate::error::{Error, Result};
use crate::ring::RingElement;

use super::session::Session;
use super::share::{SharedValue, SharedVec};

/// Initial reciprocal estimate for a divisor normalised into [0.5, 1).
const RECIP_SEED: f64 = 2.9142;
const GOLDSCHMIDT_ITERS: usize = 5;

/// Near-minimax degree-6 fit of ln(m) on [0.5, 1) in powers of (m - 0.75).
/// Max absolute error 1.28e-6.
const LN_COEFFS: [f64; 7] = [
    -0.287_681_696_896_777_75,
    1.333_367_354_364_980_2,
    -0.889_036_935_374_876_5,
    0.785_851_747_367_075_7,
    -0.780_502_944_278_534_8,
    0.974_375_737_839_922_6,
    -1.139_692_733_141_382_4,
];
const LN_CENTER: f64 = 0.75;

/// Largest exponent probed when normalising an input (`2^61` is the top
/// power of two below the comparison bound).
const LN_PROBES: u32 = 62;

impl Session {
    /// `[a >= b]` as an arithmetic 0/1 sharing. Realised as the complement of
    /// the most significant bit of `a - b`; valid when `|a - b| < 2^62`.
    pub fn gte(&mut self, a: &SharedVec, b: &SharedVec) -> Result<SharedVec> {
        check_len(a, b)?;
        self.scoped("gte", a.len(), |s| {
            let m = s.msb(&a.sub(b))?;
            Ok(m.neg().add_const(RingElement::ONE))
        })
    }

    /// `[a >= c]` against public ring constants.
    pub fn gte_public(&mut self, a: &SharedVec, consts: &[u64]) -> Result<SharedVec> {
        if consts.len() != a.len() {
            return Err(Error::Dimension {
                expected: a.len(),
                got: consts.len(),
            });
        }
        self.scoped("gte", a.len(), |s| {
            let neg: Vec<u64> = consts.iter().map(|c| c.wrapping_neg()).collect();
            let m = s.msb(&a.add_public(&neg))?;
            Ok(m.neg().add_const(RingElement::ONE))
        })
    }

    /// `[a == b]` as ring elements.
    pub fn eq(&mut self, a: &SharedVec, b: &SharedVec) -> Result<SharedVec> {
        check_len(a, b)?;
        self.scoped("eq", a.len(), |s| s.is_zero(&a.sub(b)))
    }

    /// Fixed-point quotient `a / b`.
    ///
    /// The divisor is normalised into [0.5, 1) by locating its leading bit
    /// with a batch of comparisons against powers of two, its reciprocal is
    /// refined by Goldschmidt iterations, and the product with `a` is shifted
    /// back by the secret exponent through an oblivious selection.
    ///
    /// Supported: `decode(b)` in `[2^-d, 2^d)` and `|decode(a)| < 2^21`. Out of
    /// range divisors yield an arbitrary value unless the session validates.
    pub fn div(&mut self, a: &SharedVec, b: &SharedVec) -> Result<SharedVec> {
        check_len(a, b)?;
        if self.config().validate {
            let d = self.codec().frac_bits();
            let bs = self.validation_peek(b)?;
            if let Some(bad) = bs.iter().find(|x| x.as_signed() <= 0 || x.0 >= 1u64 << (2 * d)) {
                return Err(Error::Undefined(format!(
                    "divisor {} outside (0, 2^{d})",
                    self.codec().decode(*bad)
                )));
            }
        }
        self.scoped("div", a.len(), |s| s.div_inner(a, b))
    }

    fn div_inner(&mut self, a: &SharedVec, b: &SharedVec) -> Result<SharedVec> {
        let n = a.len();
        let codec = self.codec();
        let d = codec.frac_bits();
        let span = 2 * d as usize;

        // leading-bit position of b as one-hot flags over j in 0..2d
        let probes: Vec<u64> = (0..n).flat_map(|_| (0..=span).map(|j| 1u64 << j)).collect();
        let above = self.gte_public(&b.repeat_each(span + 1), &probes)?;
        let onehot = one_hot_from_thresholds(&above, n, span + 1);

        // b * 2^(61-j) lands in [2^61, 2^62); shifting by 62-d leaves [0.5, 1)
        let up: Vec<u64> = (0..n).flat_map(|_| (0..span).map(|j| 1u64 << (61 - j))).collect();
        let scale = onehot.mul_public(&up).block_sums(span);
        let scaled = self.mul(b, &scale, false)?;
        let b_norm = self.truncate(&scaled, &vec![62 - d; n])?;

        let two = codec.encode(2.0)?;
        let w = b_norm.mul_const(2u64.wrapping_neg()).add_const(codec.encode(RECIP_SEED)?);
        let mut y = self.mul(&b_norm, &w, true)?;
        let mut x = w;
        for it in 0..GOLDSCHMIDT_ITERS {
            let f = y.neg().add_const(two);
            if it + 1 == GOLDSCHMIDT_ITERS {
                x = self.mul(&x, &f, true)?;
            } else {
                let xy = self.mul(&SharedVec::concat(&[&x, &y]), &SharedVec::concat(&[&f, &f]), true)?;
                x = xy.slice(0..n);
                y = xy.slice(n..2 * n);
            }
        }

        // a/b = a * x * 2^(d-j-1); in ring terms (a*x) >> (j+1)
        let p = self.mul(a, &x, false)?;
        let shifts: Vec<u32> = (0..n).flat_map(|_| (0..span as u32).map(|j| j + 1)).collect();
        let candidates = self.truncate(&p.repeat_each(span), &shifts)?;
        let picked = self.mul(&onehot, &candidates, false)?;
        Ok(picked.block_sums(span))
    }

    /// Fixed-point natural logarithm for `decode(a)` in `[2^-d, 2^(62-d))`.
    ///
    /// Range reduction writes `a = m * 2^e` with `m` in [0.5, 1); ln(m) comes
    /// from a degree-6 polynomial and `e * ln 2` is a public-coefficient sum of
    /// the exponent flags.
    pub fn ln(&mut self, a: &SharedVec) -> Result<SharedVec> {
        if self.config().validate {
            let xs = self.validation_peek(a)?;
            if let Some(bad) = xs.iter().find(|x| x.as_signed() <= 0 || x.0 >= 1u64 << 62) {
                return Err(Error::Undefined(format!(
                    "logarithm argument {} outside domain",
                    self.codec().decode(*bad)
                )));
            }
        }
        self.scoped("ln", a.len(), |s| s.ln_inner(a))
    }

    fn ln_inner(&mut self, a: &SharedVec) -> Result<SharedVec> {
        let n = a.len();
        let codec = self.codec();
        let d = codec.frac_bits();
        let span = LN_PROBES as usize;

        let probes: Vec<u64> = (0..n).flat_map(|_| (0..span).map(|j| 1u64 << j)).collect();
        let above = self.gte_public(&a.repeat_each(span), &probes)?;
        let onehot = one_hot_from_thresholds(&SharedVec::concat(&[&above, &SharedVec::zeros(1)]), n, span);

        let up: Vec<u64> = (0..n).flat_map(|_| (0..span).map(|j| 1u64 << (61 - j))).collect();
        let scale = onehot.mul_public(&up).block_sums(span);
        let scaled = self.mul(a, &scale, false)?;
        let m = self.truncate(&scaled, &vec![62 - d; n])?;

        let ln2 = std::f64::consts::LN_2;
        let exp_coeffs: Vec<u64> = (0..n)
            .flat_map(|_| (0..span).map(move |j| (j as f64 + 1.0 - d as f64) * ln2))
            .map(|c| codec.encode(c).map(|r| r.0))
            .collect::<Result<_>>()?;
        let exponent_term = onehot.mul_public(&exp_coeffs).block_sums(span);

        let t = m.sub(&SharedVec::public(&vec![codec.encode(LN_CENTER)?.0; n]));
        let t2 = self.mul(&t, &t, true)?;
        let t34 = self.mul(&SharedVec::concat(&[&t2, &t2]), &SharedVec::concat(&[&t, &t2]), true)?;
        let (t3, t4) = (t34.slice(0..n), t34.slice(n..2 * n));
        let t56 = self.mul(&SharedVec::concat(&[&t4, &t3]), &SharedVec::concat(&[&t, &t3]), true)?;
        let (t5, t6) = (t56.slice(0..n), t56.slice(n..2 * n));

        // sum c_k t^k at scale 2^2d, then a single truncation
        let mut acc = SharedVec::zeros(n);
        for (c, tk) in LN_COEFFS[1..].iter().zip([&t, &t2, &t3, &t4, &t5, &t6]) {
            acc = acc.add(&tk.mul_const(codec.encode(*c)?.0));
        }
        let poly = self.truncate(&acc, &vec![d; n])?.add_const(codec.encode(LN_COEFFS[0])?);
        Ok(poly.add(&exponent_term))
    }

    pub fn pi_mul(&mut self, a: &SharedValue, b: &SharedValue, truncate: bool) -> Result<SharedValue> {
        Ok(self.mul(&a.to_vec(), &b.to_vec(), truncate)?.get(0))
    }

    pub fn pi_gte(&mut self, a: &SharedValue, b: &SharedValue) -> Result<SharedValue> {
        Ok(self.gte(&a.to_vec(), &b.to_vec())?.get(0))
    }

    pub fn pi_eq(&mut self, a: &SharedValue, b: &SharedValue) -> Result<SharedValue> {
        Ok(self.eq(&a.to_vec(), &b.to_vec())?.get(0))
    }

    pub fn pi_div(&mut self, a: &SharedValue, b: &SharedValue) -> Result<SharedValue> {
        Ok(self.div(&a.to_vec(), &b.to_vec())?.get(0))
    }

    pub fn pi_ln(&mut self, a: &SharedValue) -> Result<SharedValue> {
        Ok(self.ln(&a.to_vec())?.get(0))
    }
}

fn check_len(a: &SharedVec, b: &SharedVec) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::Dimension {
            expected: a.len(),
            got: b.len(),
        });
    }
    Ok(())
}

/// Given flags `[x >= 2^j]` laid out element-major with `stride` entries per
/// element (plus optional trailing padding), returns `flag_j - flag_{j+1}`
/// for `j` in `0..stride-1` per element, or `0..stride` when the padding
/// supplies a final zero.
fn one_hot_from_thresholds(flags: &SharedVec, n: usize, stride: usize) -> SharedVec {
    let padded = flags.len() > n * stride;
    let width = if padded { stride } else { stride - 1 };
    let zero = n * stride;
    let lo: Vec<usize> = (0..n).flat_map(|k| (0..width).map(move |j| k * stride + j)).collect();
    let hi: Vec<usize> = (0..n)
        .flat_map(|k| (0..width).map(move |j| if j + 1 < stride { k * stride + j + 1 } else { zero }))
        .collect();
    flags.gather(&lo).sub(&flags.gather(&hi))
}

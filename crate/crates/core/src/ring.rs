//! Arithmetic in Z_{2^64} and the signed fixed-point codec on top of it.
//!
//! Every protocol in this crate computes over [`RingElement`]s. Reals enter the
//! ring through [`FixedCodec::encode`], which scales by `2^d` and rounds to the
//! nearest integer (ties to even), then stores negatives in two's complement.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Total bit width of the ring.
pub const RING_BITS: u32 = 64;

/// Default number of fractional bits.
pub const DEFAULT_FRAC_BITS: u32 = 20;

/// An element of Z_{2^64}. All arithmetic wraps.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RingElement(pub u64);

impl RingElement {
    pub const ZERO: RingElement = RingElement(0);
    pub const ONE: RingElement = RingElement(1);

    #[inline]
    pub const fn new(v: u64) -> Self {
        RingElement(v)
    }

    #[inline]
    pub const fn value(self) -> u64 {
        self.0
    }

    /// Two's-complement view.
    #[inline]
    pub const fn as_signed(self) -> i64 {
        self.0 as i64
    }

    #[inline]
    pub const fn from_signed(v: i64) -> Self {
        RingElement(v as u64)
    }

    #[inline]
    pub fn msb(self) -> bool {
        self.0 >> 63 == 1
    }
}

impl fmt::Debug for RingElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "R({})", self.0)
    }
}

impl fmt::Display for RingElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<u64> for RingElement {
    fn from(v: u64) -> Self {
        RingElement(v)
    }
}

impl Add for RingElement {
    type Output = Self;
    #[inline]
    fn add(self, rhs: Self) -> Self {
        RingElement(self.0.wrapping_add(rhs.0))
    }
}

impl AddAssign for RingElement {
    #[inline]
    fn add_assign(&mut self, rhs: Self) {
        self.0 = self.0.wrapping_add(rhs.0);
    }
}

impl Sub for RingElement {
    type Output = Self;
    #[inline]
    fn sub(self, rhs: Self) -> Self {
        RingElement(self.0.wrapping_sub(rhs.0))
    }
}

impl SubAssign for RingElement {
    #[inline]
    fn sub_assign(&mut self, rhs: Self) {
        self.0 = self.0.wrapping_sub(rhs.0);
    }
}

impl Mul for RingElement {
    type Output = Self;
    #[inline]
    fn mul(self, rhs: Self) -> Self {
        RingElement(self.0.wrapping_mul(rhs.0))
    }
}

impl Neg for RingElement {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        RingElement(self.0.wrapping_neg())
    }
}

impl std::iter::Sum for RingElement {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(RingElement::ZERO, |a, b| a + b)
    }
}

/// Signed fixed-point encoding with `frac_bits` fractional bits in a 64-bit ring.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixedCodec {
    frac_bits: u32,
}

impl Default for FixedCodec {
    fn default() -> Self {
        FixedCodec {
            frac_bits: DEFAULT_FRAC_BITS,
        }
    }
}

impl FixedCodec {
    pub fn new(frac_bits: u32) -> Result<Self> {
        if frac_bits == 0 || frac_bits >= RING_BITS / 2 - 1 {
            return Err(Error::param(format!(
                "fractional bits must be in 1..{}",
                RING_BITS / 2 - 1
            )));
        }
        Ok(FixedCodec { frac_bits })
    }

    #[inline]
    pub fn frac_bits(&self) -> u32 {
        self.frac_bits
    }

    #[inline]
    pub fn total_bits(&self) -> u32 {
        RING_BITS
    }

    /// Ring value of 1.0.
    #[inline]
    pub fn one(&self) -> u64 {
        1u64 << self.frac_bits
    }

    /// Smallest positive representable value, `2^-d`.
    #[inline]
    pub fn ulp(&self) -> f64 {
        (-(self.frac_bits as f64)).exp2()
    }

    /// Exclusive bound on |x| for encodable reals: `2^(l-d-1)`.
    #[inline]
    pub fn bound(&self) -> f64 {
        ((RING_BITS - self.frac_bits - 1) as f64).exp2()
    }

    pub fn encode(&self, x: f64) -> Result<RingElement> {
        let bound = self.bound();
        if !x.is_finite() || x.abs() >= bound {
            return Err(Error::Range { value: x, bound });
        }
        let scaled = (x * self.one() as f64).round_ties_even();
        Ok(RingElement::from_signed(scaled as i64))
    }

    pub fn decode(&self, r: RingElement) -> f64 {
        r.as_signed() as f64 / self.one() as f64
    }

    /// Cleartext counterpart of the secure fixed-point product: exact
    /// double-width product followed by a floor shift by `d`, which is what
    /// the secure truncation computes.
    pub fn clear_fixed_mul(&self, a: RingElement, b: RingElement) -> Result<RingElement> {
        let prod = a.as_signed() as i128 * b.as_signed() as i128;
        let shifted = prod >> self.frac_bits;
        if shifted >= i64::MAX as i128 || shifted <= i64::MIN as i128 {
            let value = prod as f64 / (self.one() as f64 * self.one() as f64);
            return Err(Error::Range {
                value,
                bound: self.bound(),
            });
        }
        Ok(RingElement::from_signed(shifted as i64))
    }
}

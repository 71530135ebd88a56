//! Jointly generated uniform randomness and Laplace sampling.

use crate::error::{Error, Result};
use crate::ring::RingElement;

use super::session::Session;
use super::share::{SharedValue, SharedVec};

impl Session {
    /// Uniform fixed-point samples on `[lo, hi)` with granularity `2^-d`.
    ///
    /// Every party contributes `d` private random bits per sample; the sample's
    /// fractional bits are the XOR of the three contributions, so any single
    /// party's choice is masked by the other two.
    pub fn gr_random(&mut self, lo: f64, hi: f64, n: usize) -> Result<SharedVec> {
        if !(lo.is_finite() && hi.is_finite() && hi > lo) {
            return Err(Error::param(format!("empty interval [{lo}, {hi})")));
        }
        self.scoped("gr_random", n, |s| {
            let codec = s.codec();
            let d = codec.frac_bits();
            let words = s.local_random_words(n, d);
            let joint = s.xor_contributions(words);
            let bits = s.bit2a(&joint.spread_bits(d))?;
            let weights: Vec<u64> = (0..n).flat_map(|_| (0..d).map(|b| 1u64 << b)).collect();
            // ring value in [0, 2^d) reads as a fixed-point fraction in [0, 1)
            let unit = bits.mul_public(&weights).block_sums(d as usize);
            let width = hi - lo;
            let scaled = if width.fract() == 0.0 && width < 2f64.powi(30) {
                unit.mul_const(width as u64)
            } else {
                s.mul_public_fixed(&unit, width)?
            };
            Ok(scaled.add_const(codec.encode(lo)?))
        })
    }

    /// Samples from Lap(0, `scale`) by inverse-CDF on a jointly random uniform:
    /// `x = -scale * sgn(u) * ln(1 - 2|u|)`.
    pub fn lap(&mut self, scale: f64, n: usize) -> Result<SharedVec> {
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::param(format!("Laplace scale must be positive, got {scale}")));
        }
        self.scoped("lap", n, |s| {
            let codec = s.codec();
            let u = s.gr_random(-0.5, 0.5, n)?;
            let nonneg = s.gte_public(&u, &vec![0; n])?;
            // +1 / -1 as a plain ring integer
            let sign = nonneg.mul_const(2).add_const(-RingElement::ONE);
            let abs_u = s.mul(&u, &sign, false)?;
            // 1 - 2|u| is a multiple of 2^(1-d) in [0, 1]; one extra ulp keeps it
            // in [2^-d, 1 + 2^-d] so the logarithm is always defined
            let arg = abs_u
                .mul_const(2u64.wrapping_neg())
                .add_const(RingElement(codec.one() + 1));
            let log = s.ln(&arg)?;
            let signed = s.mul(&log, &sign, false)?;
            s.mul_public_fixed(&signed, -scale)
        })
    }

    pub fn pi_gr_random(&mut self, lo: f64, hi: f64) -> Result<SharedValue> {
        Ok(self.gr_random(lo, hi, 1)?.get(0))
    }

    pub fn pi_lap(&mut self, scale: f64) -> Result<SharedValue> {
        Ok(self.lap(scale, 1)?.get(0))
    }
}

#![allow(dead_code)]

use fairmpc::mpc::SharedVec;
use fairmpc::{FixedCodec, RingElement};
use rand::RngCore;

pub fn laplace_cdf(x: f64, b: f64) -> f64 {
    if x < 0.0 {
        0.5 * (x / b).exp()
    } else {
        1.0 - 0.5 * (-x / b).exp()
    }
}

/// Two-sided KS distance between a sample and a continuous CDF.
pub fn ks_distance(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max((f - (i + 1) as f64 / n).abs())
        })
        .fold(0.0, f64::max)
}

pub fn share_bits(v: &[u8], rng: &mut impl RngCore) -> SharedVec {
    let r: Vec<_> = v.iter().map(|&b| RingElement(b as u64)).collect();
    SharedVec::share(&r, rng)
}

pub fn share_fixed(v: &[f64], codec: FixedCodec, rng: &mut impl RngCore) -> SharedVec {
    let r: Vec<_> = v.iter().map(|&x| codec.encode(x).unwrap()).collect();
    SharedVec::share(&r, rng)
}

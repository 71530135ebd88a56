//! Offline correlated randomness.
//!
//! The dealer never sees data shares. It samples masks, writes each party's
//! replicated view of them into that party's pool, and is done. Pools are
//! consumed front to back and every item is used at most once.

use std::collections::{BTreeMap, VecDeque};

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Replicated pair `(x_i, x_{i+1})`.
pub(crate) type Pair = (u64, u64);

/// Arithmetic mask `r` together with an XOR sharing of its bits.
#[derive(Clone, Copy, Debug)]
pub(crate) struct MaskItem {
    pub r: Pair,
    pub bits: Pair,
}

/// A mask plus `r >> k`, for exact truncation by `k` bits.
#[derive(Clone, Copy, Debug)]
pub(crate) struct TruncItem {
    pub r: Pair,
    pub bits: Pair,
    pub hi: Pair,
}

/// A random bit shared both arithmetically and in XOR form.
#[derive(Clone, Copy, Debug)]
pub(crate) struct BitItem {
    pub arith: Pair,
    pub boolean: Pair,
}

/// One party's share of the dealer's output.
#[derive(Debug, Default)]
pub(crate) struct PartyPool {
    masks: VecDeque<MaskItem>,
    bits: VecDeque<BitItem>,
    trunc: BTreeMap<u32, VecDeque<TruncItem>>,
}

fn exhausted(kind: &'static str, needed: usize, available: usize) -> Error {
    Error::RandomnessExhausted {
        kind,
        needed,
        available,
    }
}

impl PartyPool {
    pub(crate) fn take_masks(&mut self, n: usize) -> Result<Vec<MaskItem>> {
        if self.masks.len() < n {
            return Err(exhausted("comparison masks", n, self.masks.len()));
        }
        Ok(self.masks.drain(..n).collect())
    }

    pub(crate) fn take_bits(&mut self, n: usize) -> Result<Vec<BitItem>> {
        if self.bits.len() < n {
            return Err(exhausted("random bits", n, self.bits.len()));
        }
        Ok(self.bits.drain(..n).collect())
    }

    pub(crate) fn take_trunc(&mut self, shifts: &[u32]) -> Result<Vec<TruncItem>> {
        let mut need: BTreeMap<u32, usize> = BTreeMap::new();
        for &k in shifts {
            *need.entry(k).or_default() += 1;
        }
        for (&k, &n) in &need {
            let have = self.trunc.get(&k).map_or(0, VecDeque::len);
            if have < n {
                return Err(exhausted("truncation pairs", n, have));
            }
        }
        Ok(shifts
            .iter()
            .map(|k| self.trunc.get_mut(k).and_then(VecDeque::pop_front).expect("checked above"))
            .collect())
    }

    pub(crate) fn available_masks(&self) -> usize {
        self.masks.len()
    }

    pub(crate) fn available_bits(&self) -> usize {
        self.bits.len()
    }

    pub(crate) fn available_trunc(&self, k: u32) -> usize {
        self.trunc.get(&k).map_or(0, VecDeque::len)
    }
}

/// Remaining pool sizes, as seen by party 1.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PoolLevels {
    pub masks: usize,
    pub bits: usize,
    pub trunc: BTreeMap<u32, usize>,
}

pub(crate) struct Dealer {
    rng: ChaCha8Rng,
}

fn additive(x: u64, rng: &mut impl RngCore) -> [Pair; 3] {
    let a = rng.next_u64();
    let b = rng.next_u64();
    let c = [a, b, x.wrapping_sub(a).wrapping_sub(b)];
    std::array::from_fn(|i| (c[i], c[(i + 1) % 3]))
}

fn xor(x: u64, rng: &mut impl RngCore) -> [Pair; 3] {
    let a = rng.next_u64();
    let b = rng.next_u64();
    let c = [a, b, x ^ a ^ b];
    std::array::from_fn(|i| (c[i], c[(i + 1) % 3]))
}

impl Dealer {
    pub(crate) fn new(seed: [u8; 32]) -> Self {
        Dealer {
            rng: ChaCha8Rng::from_seed(seed),
        }
    }

    pub(crate) fn provision_masks(&mut self, pools: &mut [&mut PartyPool; 3], n: usize) {
        for _ in 0..n {
            let r = self.rng.next_u64();
            let ra = additive(r, &mut self.rng);
            let rb = xor(r, &mut self.rng);
            for i in 0..3 {
                pools[i].masks.push_back(MaskItem { r: ra[i], bits: rb[i] });
            }
        }
    }

    pub(crate) fn provision_bits(&mut self, pools: &mut [&mut PartyPool; 3], n: usize) {
        for _ in 0..n {
            let b = self.rng.next_u64() & 1;
            let ra = additive(b, &mut self.rng);
            let rb = xor(b, &mut self.rng);
            for i in 0..3 {
                pools[i].bits.push_back(BitItem {
                    arith: ra[i],
                    boolean: rb[i],
                });
            }
        }
    }

    pub(crate) fn provision_trunc(&mut self, pools: &mut [&mut PartyPool; 3], k: u32, n: usize) {
        for _ in 0..n {
            let r = self.rng.next_u64();
            let ra = additive(r, &mut self.rng);
            let rb = xor(r, &mut self.rng);
            let rh = additive(r >> k, &mut self.rng);
            for i in 0..3 {
                pools[i].trunc.entry(k).or_default().push_back(TruncItem {
                    r: ra[i],
                    bits: rb[i],
                    hi: rh[i],
                });
            }
        }
    }
}

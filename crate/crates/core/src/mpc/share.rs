//! Replicated secret sharing over Z_{2^64} (additive) and over 64-bit words (XOR).
//!
//! A secret `x = x_0 + x_1 + x_2` is held as: party `i` keeps `(x_i, x_{i+1 mod 3})`.
//! Boolean sharings use the same layout with XOR in place of addition.

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ring::RingElement;

use super::PartyId;

/// One party's view of a shared vector: its own component and the next party's.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartyShares {
    pub(crate) own: Vec<u64>,
    pub(crate) next: Vec<u64>,
}

impl PartyShares {
    pub(crate) fn with_len(n: usize) -> Self {
        PartyShares {
            own: vec![0; n],
            next: vec![0; n],
        }
    }

    pub fn len(&self) -> usize {
        self.own.len()
    }

    pub fn is_empty(&self) -> bool {
        self.own.is_empty()
    }

    pub fn own(&self) -> &[u64] {
        &self.own
    }

    pub fn next(&self) -> &[u64] {
        &self.next
    }
}

fn split_additive(x: u64, rng: &mut (impl RngCore + ?Sized)) -> [u64; 3] {
    let a = rng.next_u64();
    let b = rng.next_u64();
    [a, b, x.wrapping_sub(a).wrapping_sub(b)]
}

fn split_xor(x: u64, rng: &mut (impl RngCore + ?Sized)) -> [u64; 3] {
    let a = rng.next_u64();
    let b = rng.next_u64();
    [a, b, x ^ a ^ b]
}

fn distribute(values: &[u64], rng: &mut impl RngCore, split: fn(u64, &mut dyn RngCore) -> [u64; 3]) -> [PartyShares; 3] {
    let n = values.len();
    let mut parts = [PartyShares::with_len(n), PartyShares::with_len(n), PartyShares::with_len(n)];
    for (k, &x) in values.iter().enumerate() {
        let c = split(x, rng);
        for (i, p) in parts.iter_mut().enumerate() {
            p.own[k] = c[i];
            p.next[k] = c[(i + 1) % 3];
        }
    }
    parts
}

fn check_replicas(parts: &[PartyShares; 3]) -> Result<()> {
    for i in 0..3 {
        let j = (i + 1) % 3;
        if parts[i].own.len() != parts[j].own.len() || parts[i].next.len() != parts[i].own.len() {
            return Err(Error::Integrity { party: i + 1, index: 0 });
        }
        if let Some(index) = parts[i].next.iter().zip(&parts[j].own).position(|(a, b)| a != b) {
            return Err(Error::Integrity { party: j + 1, index });
        }
    }
    Ok(())
}

/// Additive replicated sharing of a vector of ring elements.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SharedVec {
    pub(crate) parts: [PartyShares; 3],
}

impl SharedVec {
    pub fn share(values: &[RingElement], rng: &mut impl RngCore) -> Self {
        let raw: Vec<u64> = values.iter().map(|v| v.0).collect();
        Self::share_raw(&raw, rng)
    }

    pub(crate) fn share_raw(values: &[u64], rng: &mut impl RngCore) -> Self {
        SharedVec {
            parts: distribute(values, rng, |x, r| split_additive(x, r)),
        }
    }

    pub(crate) fn from_parts(parts: [PartyShares; 3]) -> Self {
        SharedVec { parts }
    }

    /// A sharing of public constants with no randomness (x_0 = c, x_1 = x_2 = 0).
    pub fn public(values: &[u64]) -> Self {
        let n = values.len();
        let mut parts = [PartyShares::with_len(n), PartyShares::with_len(n), PartyShares::with_len(n)];
        parts[0].own.copy_from_slice(values);
        parts[2].next.copy_from_slice(values);
        SharedVec { parts }
    }

    pub fn zeros(n: usize) -> Self {
        SharedVec::public(&vec![0; n])
    }

    pub fn len(&self) -> usize {
        self.parts[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn party(&self, id: PartyId) -> &PartyShares {
        &self.parts[id.index()]
    }

    /// Mutable access to one party's pair; used to simulate tampering.
    pub fn party_mut(&mut self, id: PartyId) -> &mut PartyShares {
        &mut self.parts[id.index()]
    }

    /// Sums the three components after checking every replicated pair agrees.
    pub fn reconstruct(&self) -> Result<Vec<RingElement>> {
        check_replicas(&self.parts)?;
        Ok((0..self.len())
            .map(|k| {
                RingElement(
                    self.parts[0].own[k]
                        .wrapping_add(self.parts[1].own[k])
                        .wrapping_add(self.parts[2].own[k]),
                )
            })
            .collect())
    }

    pub fn get(&self, k: usize) -> SharedValue {
        SharedValue {
            pairs: std::array::from_fn(|i| {
                (RingElement(self.parts[i].own[k]), RingElement(self.parts[i].next[k]))
            }),
        }
    }

    pub fn slice(&self, range: std::ops::Range<usize>) -> SharedVec {
        SharedVec {
            parts: std::array::from_fn(|i| PartyShares {
                own: self.parts[i].own[range.clone()].to_vec(),
                next: self.parts[i].next[range.clone()].to_vec(),
            }),
        }
    }

    pub fn concat(items: &[&SharedVec]) -> SharedVec {
        let mut parts: [PartyShares; 3] = Default::default();
        for v in items {
            for (i, p) in parts.iter_mut().enumerate() {
                p.own.extend_from_slice(&v.parts[i].own);
                p.next.extend_from_slice(&v.parts[i].next);
            }
        }
        SharedVec { parts }
    }

    /// Splits into consecutive chunks of length `n`.
    pub fn chunks(&self, n: usize) -> Vec<SharedVec> {
        (0..self.len()).step_by(n.max(1)).map(|s| self.slice(s..(s + n).min(self.len()))).collect()
    }

    /// Picks elements by index (indices may repeat).
    pub fn gather(&self, idx: &[usize]) -> SharedVec {
        SharedVec {
            parts: std::array::from_fn(|i| PartyShares {
                own: idx.iter().map(|&k| self.parts[i].own[k]).collect(),
                next: idx.iter().map(|&k| self.parts[i].next[k]).collect(),
            }),
        }
    }

    /// Repeats every element `times` times in place (`[a, b] -> [a, a, b, b]`).
    pub fn repeat_each(&self, times: usize) -> SharedVec {
        let rep = |v: &[u64]| v.iter().flat_map(|&x| std::iter::repeat_n(x, times)).collect();
        SharedVec {
            parts: std::array::from_fn(|i| PartyShares {
                own: rep(&self.parts[i].own),
                next: rep(&self.parts[i].next),
            }),
        }
    }

    /// Repeats the whole vector `times` times (`[a, b] -> [a, b, a, b]`).
    pub fn tile(&self, times: usize) -> SharedVec {
        let rep = |v: &[u64]| v.repeat(times);
        SharedVec {
            parts: std::array::from_fn(|i| PartyShares {
                own: rep(&self.parts[i].own),
                next: rep(&self.parts[i].next),
            }),
        }
    }

    fn zip_map(&self, other: &SharedVec, f: impl Fn(u64, u64) -> u64) -> SharedVec {
        assert_eq!(self.len(), other.len(), "shared vector length mismatch");
        SharedVec {
            parts: std::array::from_fn(|i| PartyShares {
                own: self.parts[i].own.iter().zip(&other.parts[i].own).map(|(&a, &b)| f(a, b)).collect(),
                next: self.parts[i].next.iter().zip(&other.parts[i].next).map(|(&a, &b)| f(a, b)).collect(),
            }),
        }
    }

    pub fn add(&self, other: &SharedVec) -> SharedVec {
        self.zip_map(other, u64::wrapping_add)
    }

    pub fn sub(&self, other: &SharedVec) -> SharedVec {
        self.zip_map(other, u64::wrapping_sub)
    }

    pub fn neg(&self) -> SharedVec {
        self.mul_const(u64::MAX)
    }

    /// Adds the same public constant to every element.
    pub fn add_const(&self, c: RingElement) -> SharedVec {
        let mut out = self.clone();
        out.parts[0].own.iter_mut().for_each(|x| *x = x.wrapping_add(c.0));
        out.parts[2].next.iter_mut().for_each(|x| *x = x.wrapping_add(c.0));
        out
    }

    /// Adds a per-element public constant.
    pub fn add_public(&self, cs: &[u64]) -> SharedVec {
        assert_eq!(cs.len(), self.len());
        let mut out = self.clone();
        out.parts[0].own.iter_mut().zip(cs).for_each(|(x, c)| *x = x.wrapping_add(*c));
        out.parts[2].next.iter_mut().zip(cs).for_each(|(x, c)| *x = x.wrapping_add(*c));
        out
    }

    pub fn mul_const(&self, c: u64) -> SharedVec {
        SharedVec {
            parts: std::array::from_fn(|i| PartyShares {
                own: self.parts[i].own.iter().map(|x| x.wrapping_mul(c)).collect(),
                next: self.parts[i].next.iter().map(|x| x.wrapping_mul(c)).collect(),
            }),
        }
    }

    pub fn mul_public(&self, cs: &[u64]) -> SharedVec {
        assert_eq!(cs.len(), self.len());
        SharedVec {
            parts: std::array::from_fn(|i| PartyShares {
                own: self.parts[i].own.iter().zip(cs).map(|(x, c)| x.wrapping_mul(*c)).collect(),
                next: self.parts[i].next.iter().zip(cs).map(|(x, c)| x.wrapping_mul(*c)).collect(),
            }),
        }
    }

    /// Sum of all elements as a length-1 sharing.
    pub fn sum(&self) -> SharedVec {
        SharedVec {
            parts: std::array::from_fn(|i| PartyShares {
                own: vec![self.parts[i].own.iter().fold(0u64, |a, &b| a.wrapping_add(b))],
                next: vec![self.parts[i].next.iter().fold(0u64, |a, &b| a.wrapping_add(b))],
            }),
        }
    }

    /// Sums consecutive blocks of `block` elements.
    pub fn block_sums(&self, block: usize) -> SharedVec {
        let fold = |v: &[u64]| v.chunks(block).map(|c| c.iter().fold(0u64, |a, &b| a.wrapping_add(b))).collect();
        SharedVec {
            parts: std::array::from_fn(|i| PartyShares {
                own: fold(&self.parts[i].own),
                next: fold(&self.parts[i].next),
            }),
        }
    }
}

/// A single shared ring element.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SharedValue {
    /// `pairs[i]` is party `i+1`'s `(x_i, x_{i+1})`.
    pub pairs: [(RingElement, RingElement); 3],
}

impl SharedValue {
    pub fn to_vec(self) -> SharedVec {
        SharedVec {
            parts: std::array::from_fn(|i| PartyShares {
                own: vec![self.pairs[i].0 .0],
                next: vec![self.pairs[i].1 .0],
            }),
        }
    }
}

impl From<SharedValue> for SharedVec {
    fn from(v: SharedValue) -> Self {
        v.to_vec()
    }
}

/// Secret-shares one ring element.
pub fn share(x: RingElement, rng: &mut impl RngCore) -> SharedValue {
    let c = split_additive(x.0, rng);
    SharedValue {
        pairs: std::array::from_fn(|i| (RingElement(c[i]), RingElement(c[(i + 1) % 3]))),
    }
}

/// Recombines a sharing, failing if any replicated component disagrees.
pub fn reconstruct(v: &SharedValue) -> Result<RingElement> {
    for i in 0..3 {
        let j = (i + 1) % 3;
        if v.pairs[i].1 != v.pairs[j].0 {
            return Err(Error::Integrity { party: j + 1, index: 0 });
        }
    }
    Ok(v.pairs[0].0 + v.pairs[1].0 + v.pairs[2].0)
}

/// XOR replicated sharing of 64-bit words.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SharedBits {
    pub(crate) parts: [PartyShares; 3],
}

impl SharedBits {
    pub fn share(words: &[u64], rng: &mut impl RngCore) -> Self {
        SharedBits {
            parts: distribute(words, rng, |x, r| split_xor(x, r)),
        }
    }

    pub(crate) fn from_parts(parts: [PartyShares; 3]) -> Self {
        SharedBits { parts }
    }

    pub fn len(&self) -> usize {
        self.parts[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn reconstruct(&self) -> Result<Vec<u64>> {
        check_replicas(&self.parts)?;
        Ok((0..self.len())
            .map(|k| self.parts[0].own[k] ^ self.parts[1].own[k] ^ self.parts[2].own[k])
            .collect())
    }

    pub(crate) fn map(&self, f: impl Fn(u64) -> u64) -> SharedBits {
        SharedBits {
            parts: std::array::from_fn(|i| PartyShares {
                own: self.parts[i].own.iter().map(|&x| f(x)).collect(),
                next: self.parts[i].next.iter().map(|&x| f(x)).collect(),
            }),
        }
    }

    pub(crate) fn xor(&self, other: &SharedBits) -> SharedBits {
        SharedBits {
            parts: std::array::from_fn(|i| PartyShares {
                own: self.parts[i].own.iter().zip(&other.parts[i].own).map(|(a, b)| a ^ b).collect(),
                next: self.parts[i].next.iter().zip(&other.parts[i].next).map(|(a, b)| a ^ b).collect(),
            }),
        }
    }

    /// XORs a per-element public word into the sharing.
    pub(crate) fn xor_public(&self, cs: &[u64]) -> SharedBits {
        let mut out = self.clone();
        out.parts[0].own.iter_mut().zip(cs).for_each(|(x, c)| *x ^= c);
        out.parts[2].next.iter_mut().zip(cs).for_each(|(x, c)| *x ^= c);
        out
    }

    /// ANDs every component with a public word (linear over GF(2)).
    pub(crate) fn and_public(&self, cs: &[u64]) -> SharedBits {
        SharedBits {
            parts: std::array::from_fn(|i| PartyShares {
                own: self.parts[i].own.iter().zip(cs).map(|(x, c)| x & c).collect(),
                next: self.parts[i].next.iter().zip(cs).map(|(x, c)| x & c).collect(),
            }),
        }
    }

    /// Expands the low `width` bits of each word into one word per bit
    /// (bit 0 of the output), element-major.
    pub(crate) fn spread_bits(&self, width: u32) -> SharedBits {
        let spread = |v: &[u64]| v.iter().flat_map(|&w| (0..width).map(move |b| (w >> b) & 1)).collect();
        SharedBits {
            parts: std::array::from_fn(|i| PartyShares {
                own: spread(&self.parts[i].own),
                next: spread(&self.parts[i].next),
            }),
        }
    }

    pub(crate) fn concat(items: &[&SharedBits]) -> SharedBits {
        let mut parts: [PartyShares; 3] = Default::default();
        for v in items {
            for (i, p) in parts.iter_mut().enumerate() {
                p.own.extend_from_slice(&v.parts[i].own);
                p.next.extend_from_slice(&v.parts[i].next);
            }
        }
        SharedBits { parts }
    }

    pub(crate) fn slice(&self, range: std::ops::Range<usize>) -> SharedBits {
        SharedBits {
            parts: std::array::from_fn(|i| PartyShares {
                own: self.parts[i].own[range.clone()].to_vec(),
                next: self.parts[i].next[range.clone()].to_vec(),
            }),
        }
    }
}

//! A protocol session: three party contexts, the dealer, and the channels
//! between them.
//!
//! Every protocol step has the same shape. Each party runs a local function
//! over its own context and share pairs, messages go through the FIFO
//! channels, then each party consumes what it received. Local steps run
//! either sequentially ([`ExecMode::Lockstep`]) or with each party on its own
//! worker ([`ExecMode::Threaded`]); the two modes produce identical transcripts.

use std::collections::BTreeMap;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ring::{FixedCodec, RingElement};

use super::dealer::{Dealer, PartyPool, PoolLevels};
use super::net::{CommStats, Network, PrimitiveCounts, TranscriptEntry};
use super::share::{PartyShares, SharedBits, SharedVec};
use super::PartyId;

/// Bias added before truncation so the shifted value is non-negative.
const TRUNC_OFFSET_BITS: u32 = 62;

const TO_NEXT: usize = 1;
const TO_PREV: usize = 2;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExecMode {
    #[default]
    Lockstep,
    Threaded,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SessionConfig {
    pub seed: u64,
    pub codec: FixedCodec,
    pub mode: ExecMode,
    /// Let the dealer top up pools right before they are drawn from.
    pub auto_provision: bool,
    pub record_transcript: bool,
    /// Harness-side cleartext checks of protocol preconditions. Test-only.
    pub validate: bool,
}

impl Default for SessionConfig {
    fn default() -> Self {
        SessionConfig {
            seed: 0,
            codec: FixedCodec::default(),
            mode: ExecMode::Lockstep,
            auto_provision: true,
            record_transcript: false,
            validate: false,
        }
    }
}

impl SessionConfig {
    pub fn seeded(seed: u64) -> Self {
        SessionConfig {
            seed,
            ..Default::default()
        }
    }
}

/// Record of every value published in the clear, keyed by label.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RevealAudit {
    pub publications: BTreeMap<String, u64>,
    /// Cleartext peeks taken by the validation harness (never by a party).
    pub validation_peeks: u64,
}

impl RevealAudit {
    pub fn total(&self) -> u64 {
        self.publications.values().sum()
    }
}

pub(crate) struct PartyCtx {
    pub(crate) id: PartyId,
    // pairwise PRG keys k_i and k_{i+1}, shared with the neighbours
    prg_own: ChaCha8Rng,
    prg_next: ChaCha8Rng,
    pub(crate) local: ChaCha8Rng,
    pub(crate) pool: PartyPool,
}

impl PartyCtx {
    #[inline]
    pub(crate) fn index(&self) -> usize {
        self.id.index()
    }

    /// Shares of zero: alpha_i = F(k_i) - F(k_{i+1}).
    fn zero_share(&mut self, n: usize) -> Vec<u64> {
        (0..n)
            .map(|_| self.prg_own.next_u64().wrapping_sub(self.prg_next.next_u64()))
            .collect()
    }

    fn zero_xor(&mut self, n: usize) -> Vec<u64> {
        (0..n).map(|_| self.prg_own.next_u64() ^ self.prg_next.next_u64()).collect()
    }
}

pub struct Session {
    cfg: SessionConfig,
    parties: [PartyCtx; 3],
    dealer: Dealer,
    net: Network,
    counts: PrimitiveCounts,
    depth: usize,
    audit: RevealAudit,
    gr_override: Option<(PartyId, u64)>,
}

fn collect3<T>(r: [Result<T>; 3]) -> Result<[T; 3]> {
    let [a, b, c] = r;
    Ok([a?, b?, c?])
}

impl Session {
    pub fn new(cfg: SessionConfig) -> Self {
        let mut master = ChaCha8Rng::seed_from_u64(cfg.seed);
        let keys: [[u8; 32]; 3] = std::array::from_fn(|_| master.gen());
        let locals: [[u8; 32]; 3] = std::array::from_fn(|_| master.gen());
        let dealer_seed: [u8; 32] = master.gen();
        let parties = std::array::from_fn(|i| PartyCtx {
            id: PartyId::from_index(i),
            prg_own: ChaCha8Rng::from_seed(keys[i]),
            prg_next: ChaCha8Rng::from_seed(keys[(i + 1) % 3]),
            local: ChaCha8Rng::from_seed(locals[i]),
            pool: PartyPool::default(),
        });
        Session {
            net: Network::new(cfg.record_transcript),
            cfg,
            parties,
            dealer: Dealer::new(dealer_seed),
            counts: PrimitiveCounts::default(),
            depth: 0,
            audit: RevealAudit::default(),
            gr_override: None,
        }
    }

    pub fn config(&self) -> &SessionConfig {
        &self.cfg
    }

    pub fn codec(&self) -> FixedCodec {
        self.cfg.codec
    }

    pub fn stats(&self) -> &CommStats {
        &self.net.stats
    }

    pub fn counts(&self) -> &PrimitiveCounts {
        &self.counts
    }

    pub fn audit(&self) -> &RevealAudit {
        &self.audit
    }

    pub fn transcript(&self) -> Option<&[TranscriptEntry]> {
        self.net.transcript()
    }

    pub fn pool_levels(&self) -> PoolLevels {
        let p = &self.parties[0].pool;
        PoolLevels {
            masks: p.available_masks(),
            bits: p.available_bits(),
            trunc: (1..64).filter_map(|k| Some((k, p.available_trunc(k))).filter(|x| x.1 > 0)).collect(),
        }
    }

    /// Forces one party's contribution to joint randomness, to model a party
    /// trying to bias the output. `None` restores honest behaviour.
    pub fn set_random_bits_override(&mut self, ov: Option<(PartyId, u64)>) {
        self.gr_override = ov;
    }

    // ---- offline phase -------------------------------------------------

    fn with_dealer(&mut self, f: impl FnOnce(&mut Dealer, &mut [&mut PartyPool; 3])) {
        let [a, b, c] = &mut self.parties;
        f(&mut self.dealer, &mut [&mut a.pool, &mut b.pool, &mut c.pool]);
    }

    pub fn provision_masks(&mut self, n: usize) {
        self.with_dealer(|d, pools| d.provision_masks(pools, n));
    }

    pub fn provision_bits(&mut self, n: usize) {
        self.with_dealer(|d, pools| d.provision_bits(pools, n));
    }

    pub fn provision_trunc(&mut self, k: u32, n: usize) {
        self.with_dealer(|d, pools| d.provision_trunc(pools, k, n));
    }

    fn ensure_masks(&mut self, n: usize) {
        let have = self.parties[0].pool.available_masks();
        if self.cfg.auto_provision && have < n {
            self.provision_masks(n - have);
        }
    }

    fn ensure_bits(&mut self, n: usize) {
        let have = self.parties[0].pool.available_bits();
        if self.cfg.auto_provision && have < n {
            self.provision_bits(n - have);
        }
    }

    fn ensure_trunc(&mut self, shifts: &[u32]) {
        if !self.cfg.auto_provision {
            return;
        }
        let mut need: BTreeMap<u32, usize> = BTreeMap::new();
        for &k in shifts {
            *need.entry(k).or_default() += 1;
        }
        for (k, n) in need {
            let have = self.parties[0].pool.available_trunc(k);
            if have < n {
                self.provision_trunc(k, n - have);
            }
        }
    }

    // ---- execution plumbing -------------------------------------------

    /// Runs `f` once per party, each on its own context only.
    pub(crate) fn local<T: Send>(&mut self, f: impl Fn(&mut PartyCtx) -> T + Sync) -> [T; 3] {
        match self.cfg.mode {
            ExecMode::Lockstep => {
                let [a, b, c] = &mut self.parties;
                [f(a), f(b), f(c)]
            }
            ExecMode::Threaded => {
                let [a, b, c] = &mut self.parties;
                let f = &f;
                let (ra, (rb, rc)) = rayon::join(|| f(a), || rayon::join(|| f(b), || f(c)));
                [ra, rb, rc]
            }
        }
    }

    /// One communication round: party `i` sends `msgs[i]` to party `i + offset`
    /// and receives from party `i - offset`.
    fn exchange(&mut self, offset: usize, msgs: [Vec<u64>; 3]) -> [Vec<u64>; 3] {
        for (i, m) in msgs.into_iter().enumerate() {
            self.net.send(i, (i + offset) % 3, m);
        }
        self.net.end_round();
        std::array::from_fn(|i| self.net.recv(i, (i + 3 - offset) % 3))
    }

    /// Counts an invocation of `name` over `n` elements and runs `f` one level deeper.
    pub(crate) fn scoped<T>(&mut self, name: &str, n: usize, f: impl FnOnce(&mut Self) -> Result<T>) -> Result<T> {
        *self.counts.total.entry(name.to_string()).or_default() += n as u64;
        if self.depth <= 1 {
            *self.counts.direct.entry(name.to_string()).or_default() += n as u64;
        }
        self.depth += 1;
        let out = f(self);
        self.depth -= 1;
        out
    }

    /// Harness-side cleartext peek for precondition checks in validation mode.
    pub(crate) fn validation_peek(&mut self, v: &SharedVec) -> Result<Vec<RingElement>> {
        self.audit.validation_peeks += 1;
        v.reconstruct()
    }

    // ---- opening -------------------------------------------------------

    /// Opens a sharing whose value is uniformly masked. Each party sends its
    /// own component to the next party.
    pub(crate) fn open_masked(&mut self, v: &SharedVec) -> Vec<u64> {
        let msgs = std::array::from_fn(|i| v.parts[i].own.clone());
        let incoming = self.exchange(TO_NEXT, msgs);
        let views: [Vec<u64>; 3] = std::array::from_fn(|i| {
            let p = &v.parts[i];
            (0..v.len())
                .map(|k| p.own[k].wrapping_add(p.next[k]).wrapping_add(incoming[i][k]))
                .collect()
        });
        debug_assert!(views[0] == views[1] && views[1] == views[2]);
        let [a, _, _] = views;
        a
    }

    pub(crate) fn open_bits(&mut self, v: &SharedBits) -> Vec<u64> {
        let msgs = std::array::from_fn(|i| v.parts[i].own.clone());
        let incoming = self.exchange(TO_NEXT, msgs);
        let p = &v.parts[0];
        (0..v.len()).map(|k| p.own[k] ^ p.next[k] ^ incoming[0][k]).collect()
    }

    /// Publishes a secret to all parties. Every party receives the missing
    /// component from both other parties and checks they agree.
    pub fn publish(&mut self, v: &SharedVec, label: &str) -> Result<Vec<RingElement>> {
        *self.audit.publications.entry(label.to_string()).or_default() += v.len() as u64;
        for i in 0..3 {
            self.net.send(i, (i + 1) % 3, v.parts[i].own.clone());
            self.net.send(i, (i + 2) % 3, v.parts[i].next.clone());
        }
        self.net.end_round();
        let mut out = Vec::new();
        for i in 0..3 {
            let from_prev = self.net.recv(i, (i + 2) % 3);
            let from_next = self.net.recv(i, (i + 1) % 3);
            if let Some(index) = from_prev.iter().zip(&from_next).position(|(a, b)| a != b) {
                return Err(Error::Integrity { party: i + 1, index });
            }
            if i == 0 {
                let p = &v.parts[0];
                out = (0..v.len())
                    .map(|k| RingElement(p.own[k].wrapping_add(p.next[k]).wrapping_add(from_prev[k])))
                    .collect();
            }
        }
        Ok(out)
    }

    /// Publishes fixed-point values and decodes them.
    pub fn publish_fixed(&mut self, v: &SharedVec, label: &str) -> Result<Vec<f64>> {
        let codec = self.codec();
        Ok(self.publish(v, label)?.into_iter().map(|r| codec.decode(r)).collect())
    }

    // ---- multiplication -----------------------------------------------

    /// Ring product with resharing: one round, one word per party per element.
    pub(crate) fn mul_raw(&mut self, a: &SharedVec, b: &SharedVec) -> Result<SharedVec> {
        if a.len() != b.len() {
            return Err(Error::Dimension {
                expected: a.len(),
                got: b.len(),
            });
        }
        let n = a.len();
        let z = self.local(|p| {
            let i = p.index();
            let (x, y) = (&a.parts[i], &b.parts[i]);
            let alpha = p.zero_share(n);
            (0..n)
                .map(|k| {
                    x.own[k]
                        .wrapping_mul(y.own[k])
                        .wrapping_add(x.own[k].wrapping_mul(y.next[k]))
                        .wrapping_add(x.next[k].wrapping_mul(y.own[k]))
                        .wrapping_add(alpha[k])
                })
                .collect::<Vec<u64>>()
        });
        let incoming = self.exchange(TO_PREV, z.clone());
        let [z0, z1, z2] = z;
        let [n0, n1, n2] = incoming;
        Ok(SharedVec::from_parts([
            PartyShares { own: z0, next: n0 },
            PartyShares { own: z1, next: n1 },
            PartyShares { own: z2, next: n2 },
        ]))
    }

    pub(crate) fn and_bits(&mut self, a: &SharedBits, b: &SharedBits) -> SharedBits {
        let n = a.len();
        let z = self.local(|p| {
            let i = p.index();
            let (x, y) = (&a.parts[i], &b.parts[i]);
            let alpha = p.zero_xor(n);
            (0..n)
                .map(|k| (x.own[k] & y.own[k]) ^ (x.own[k] & y.next[k]) ^ (x.next[k] & y.own[k]) ^ alpha[k])
                .collect::<Vec<u64>>()
        });
        let incoming = self.exchange(TO_PREV, z.clone());
        let [z0, z1, z2] = z;
        let [n0, n1, n2] = incoming;
        SharedBits::from_parts([
            PartyShares { own: z0, next: n0 },
            PartyShares { own: z1, next: n1 },
            PartyShares { own: z2, next: n2 },
        ])
    }

    /// Product of two sharings. With `truncate`, both operands are
    /// fixed-point and the product is rescaled by `2^-d` exactly (floor).
    pub fn mul(&mut self, a: &SharedVec, b: &SharedVec, truncate: bool) -> Result<SharedVec> {
        self.scoped("mul", a.len(), |s| {
            let p = s.mul_raw(a, b)?;
            if truncate {
                let d = s.codec().frac_bits();
                s.truncate(&p, &vec![d; p.len()])
            } else {
                Ok(p)
            }
        })
    }

    /// Multiplies by a public real constant in fixed point.
    pub fn mul_public_fixed(&mut self, a: &SharedVec, c: f64) -> Result<SharedVec> {
        let codec = self.codec();
        let enc = codec.encode(c)?;
        let scaled = a.mul_const(enc.0);
        self.truncate(&scaled, &vec![codec.frac_bits(); a.len()])
    }

    // ---- bit conversion -----------------------------------------------

    /// Converts XOR-shared bits (bit 0 of each word) to arithmetic sharings
    /// of 0/1, using dealer bits shared in both domains.
    pub(crate) fn bit2a(&mut self, b: &SharedBits) -> Result<SharedVec> {
        let n = b.len();
        self.ensure_bits(n);
        let items = collect3(self.local(|p| p.pool.take_bits(n)))?;
        let masked = SharedBits::from_parts(std::array::from_fn(|i| PartyShares {
            own: (0..n).map(|k| (b.parts[i].own[k] & 1) ^ items[i][k].boolean.0).collect(),
            next: (0..n).map(|k| (b.parts[i].next[k] & 1) ^ items[i][k].boolean.1).collect(),
        }));
        let m = self.open_bits(&masked);
        let rho = SharedVec::from_parts(std::array::from_fn(|i| PartyShares {
            own: items[i].iter().map(|t| t.arith.0).collect(),
            next: items[i].iter().map(|t| t.arith.1).collect(),
        }));
        // b = m + rho - 2*m*rho
        let factor: Vec<u64> = m.iter().map(|&x| 1u64.wrapping_sub(2 * x)).collect();
        Ok(rho.mul_public(&factor).add_public(&m))
    }

    // ---- comparison circuits ------------------------------------------

    /// XOR-shared bit `[r > c]` for secret words `r` and public words `c`,
    /// compared as unsigned 64-bit integers. Six AND rounds (log2 64).
    pub(crate) fn gt_public(&mut self, r: &SharedBits, c: &[u64]) -> SharedBits {
        let n = r.len();
        let not_c: Vec<u64> = c.iter().map(|x| !x).collect();
        // per-bit "r wins" and "equal" flags
        let mut g = r.and_public(&not_c);
        let mut e = r.xor_public(&not_c);
        for s in [1u32, 2, 4, 8, 16, 32] {
            let es = e.map(|x| x >> s);
            let gs = g.map(|x| x >> s);
            if s == 32 {
                let t = self.and_bits(&es, &g);
                g = gs.xor(&t);
            } else {
                let both = self.and_bits(&SharedBits::concat(&[&es, &es]), &SharedBits::concat(&[&g, &e]));
                g = gs.xor(&both.slice(0..n));
                e = both.slice(n..2 * n);
            }
        }
        g.map(|x| x & 1)
    }

    /// Exact floor division by `2^k` (per element). Inputs must satisfy
    /// `|x| < 2^62` as signed ring values.
    pub fn truncate(&mut self, x: &SharedVec, shifts: &[u32]) -> Result<SharedVec> {
        if shifts.len() != x.len() {
            return Err(Error::Dimension {
                expected: x.len(),
                got: shifts.len(),
            });
        }
        if let Some(&k) = shifts.iter().find(|&&k| k == 0 || k >= 63) {
            return Err(Error::param(format!("truncation shift {k} outside 1..63")));
        }
        self.scoped("trunc", x.len(), |s| s.truncate_inner(x, shifts))
    }

    fn truncate_inner(&mut self, x: &SharedVec, shifts: &[u32]) -> Result<SharedVec> {
        let n = x.len();
        self.ensure_trunc(shifts);
        let items = collect3(self.local(|p| p.pool.take_trunc(shifts)))?;
        let offset = 1u64 << TRUNC_OFFSET_BITS;
        let shifted = x.add_const(RingElement(offset));
        let masked = SharedVec::from_parts(std::array::from_fn(|i| PartyShares {
            own: (0..n).map(|k| shifted.parts[i].own[k].wrapping_add(items[i][k].r.0)).collect(),
            next: (0..n).map(|k| shifted.parts[i].next[k].wrapping_add(items[i][k].r.1)).collect(),
        }));
        let c = self.open_masked(&masked);

        let rbits = SharedBits::from_parts(std::array::from_fn(|i| PartyShares {
            own: items[i].iter().map(|t| t.bits.0).collect(),
            next: items[i].iter().map(|t| t.bits.1).collect(),
        }));
        let low_masks: Vec<u64> = shifts.iter().map(|&k| (1u64 << k) - 1).collect();
        let c_low: Vec<u64> = c.iter().zip(&low_masks).map(|(c, m)| c & m).collect();
        let r_low = rbits.and_public(&low_masks);
        // wrap of the masked sum, and borrow out of the low k bits
        let cmp = self.gt_public(&SharedBits::concat(&[&rbits, &r_low]), &[c.as_slice(), &c_low].concat());
        let flags = self.bit2a(&cmp)?;
        let wrap = flags.slice(0..n);
        let borrow = flags.slice(n..2 * n);

        let hi = SharedVec::from_parts(std::array::from_fn(|i| PartyShares {
            own: items[i].iter().map(|t| t.hi.0).collect(),
            next: items[i].iter().map(|t| t.hi.1).collect(),
        }));
        let wrap_scale: Vec<u64> = shifts.iter().map(|&k| 1u64 << (64 - k)).collect();
        let public: Vec<u64> = c
            .iter()
            .zip(shifts)
            .map(|(&c, &k)| (c >> k).wrapping_sub(offset >> k))
            .collect();
        Ok(wrap.mul_public(&wrap_scale).sub(&hi).sub(&borrow).add_public(&public))
    }

    /// Arithmetic sharing of the most significant bit of each element.
    pub(crate) fn msb(&mut self, x: &SharedVec) -> Result<SharedVec> {
        let n = x.len();
        self.ensure_masks(n);
        let items = collect3(self.local(|p| p.pool.take_masks(n)))?;
        let masked = SharedVec::from_parts(std::array::from_fn(|i| PartyShares {
            own: (0..n).map(|k| x.parts[i].own[k].wrapping_add(items[i][k].r.0)).collect(),
            next: (0..n).map(|k| x.parts[i].next[k].wrapping_add(items[i][k].r.1)).collect(),
        }));
        let c = self.open_masked(&masked);
        let rbits = SharedBits::from_parts(std::array::from_fn(|i| PartyShares {
            own: items[i].iter().map(|t| t.bits.0).collect(),
            next: items[i].iter().map(|t| t.bits.1).collect(),
        }));
        const LOW: u64 = u64::MAX >> 1;
        let c_low: Vec<u64> = c.iter().map(|x| x & LOW).collect();
        let borrow = self.gt_public(&rbits.and_public(&vec![LOW; n]), &c_low);
        // msb(c - r) = c_63 ^ r_63 ^ borrow
        let c_top: Vec<u64> = c.iter().map(|x| x >> 63).collect();
        let bit = borrow.xor(&rbits.map(|x| x >> 63)).xor_public(&c_top);
        self.bit2a(&bit)
    }

    /// Arithmetic sharing of `[x == 0]`.
    pub(crate) fn is_zero(&mut self, x: &SharedVec) -> Result<SharedVec> {
        let n = x.len();
        self.ensure_masks(n);
        let items = collect3(self.local(|p| p.pool.take_masks(n)))?;
        let masked = SharedVec::from_parts(std::array::from_fn(|i| PartyShares {
            own: (0..n).map(|k| x.parts[i].own[k].wrapping_add(items[i][k].r.0)).collect(),
            next: (0..n).map(|k| x.parts[i].next[k].wrapping_add(items[i][k].r.1)).collect(),
        }));
        let c = self.open_masked(&masked);
        let rbits = SharedBits::from_parts(std::array::from_fn(|i| PartyShares {
            own: items[i].iter().map(|t| t.bits.0).collect(),
            next: items[i].iter().map(|t| t.bits.1).collect(),
        }));
        // x == 0 iff r == c iff every bit of !(r ^ c) is set
        let not_c: Vec<u64> = c.iter().map(|x| !x).collect();
        let mut e = rbits.xor_public(&not_c);
        for s in [1u32, 2, 4, 8, 16, 32] {
            let shifted = e.map(|x| x >> s);
            e = self.and_bits(&e, &shifted);
        }
        self.bit2a(&e.map(|x| x & 1))
    }

    // ---- local randomness ---------------------------------------------

    /// Each party draws `n` words of `bits` random bits from its own RNG.
    pub(crate) fn local_random_words(&mut self, n: usize, bits: u32) -> [Vec<u64>; 3] {
        let mask = if bits >= 64 { u64::MAX } else { (1u64 << bits) - 1 };
        let ov = self.gr_override;
        self.local(|p| {
            let draws: Vec<u64> = (0..n).map(|_| p.local.next_u64() & mask).collect();
            match ov {
                Some((id, fixed)) if id == p.id => vec![fixed & mask; n],
                _ => draws,
            }
        })
    }

    /// Turns per-party private words into a replicated XOR sharing of their
    /// XOR: party `i` sends its word to party `i - 1`.
    pub(crate) fn xor_contributions(&mut self, words: [Vec<u64>; 3]) -> SharedBits {
        let incoming = self.exchange(TO_PREV, words.clone());
        let [a, b, c] = words;
        let [na, nb, nc] = incoming;
        SharedBits::from_parts([
            PartyShares { own: a, next: na },
            PartyShares { own: b, next: nb },
            PartyShares { own: c, next: nc },
        ])
    }

    /// Messages sent but not yet consumed; zero between protocol calls.
    pub fn pending_messages(&self) -> usize {
        self.net.pending()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn rvals(v: &SharedVec) -> Vec<u64> {
        v.reconstruct().unwrap().iter().map(|x| x.0).collect()
    }

    #[test]
    fn mul_integer_and_traffic() {
        let mut s = Session::new(SessionConfig::seeded(1));
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let a = SharedVec::share_raw(&[6], &mut rng);
        let b = SharedVec::share_raw(&[7], &mut rng);
        let c = s.mul(&a, &b, false).unwrap();
        assert_eq!(rvals(&c), vec![42]);
        assert_eq!(s.stats().rounds, 1);
        // three parties, one 64-bit word each
        assert_eq!(s.stats().bytes * 8, 3 * 64);
    }

    #[test]
    fn gt_public_matches_unsigned_compare() {
        let mut s = Session::new(SessionConfig::seeded(2));
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut r: Vec<u64> = (0..500).map(|_| rng.gen()).collect();
        let mut c: Vec<u64> = (0..500).map(|_| rng.gen()).collect();
        // edge cases: equal, off by one, extremes
        r.extend([5, 5, 6, 0, u64::MAX, 1 << 63]);
        c.extend([5, 6, 5, u64::MAX, 0, (1 << 63) - 1]);
        let shared = SharedBits::share(&r, &mut rng);
        let out = s.gt_public(&shared, &c).reconstruct().unwrap();
        for k in 0..r.len() {
            assert_eq!(out[k], u64::from(r[k] > c[k]), "r={} c={}", r[k], c[k]);
        }
        assert_eq!(s.stats().rounds, 6);
    }

    #[test]
    fn truncate_is_exact_floor() {
        let mut s = Session::new(SessionConfig::seeded(3));
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut xs: Vec<i64> = (0..400).map(|_| rng.gen_range(-(1i64 << 61)..(1i64 << 61))).collect();
        xs.extend([0, -1, 1, (1 << 62) - 1, -(1 << 62) + 1, -(1 << 20), (1 << 20) - 1]);
        let ks: Vec<u32> = (0..xs.len()).map(|i| 1 + (i as u32 % 62)).collect();
        let raw: Vec<u64> = xs.iter().map(|&x| x as u64).collect();
        let v = SharedVec::share_raw(&raw, &mut rng);
        let t = s.truncate(&v, &ks).unwrap();
        let got = rvals(&t);
        for k in 0..xs.len() {
            assert_eq!(got[k] as i64, xs[k] >> ks[k], "x={} k={}", xs[k], ks[k]);
        }
    }

    #[test]
    fn bit2a_converts() {
        let mut s = Session::new(SessionConfig::seeded(4));
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let bits = [0u64, 1, 1, 0, 1];
        let b = SharedBits::share(&bits, &mut rng);
        assert_eq!(rvals(&s.bit2a(&b).unwrap()), bits.to_vec());
    }

    #[test]
    fn publish_counts_and_checks() {
        let mut s = Session::new(SessionConfig::seeded(5));
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let v = SharedVec::share_raw(&[11, 12], &mut rng);
        let out = s.publish(&v, "test").unwrap();
        assert_eq!(out, vec![RingElement(11), RingElement(12)]);
        assert_eq!(s.audit().publications["test"], 2);

        let mut bad = v.clone();
        bad.party_mut(PartyId::P3).next[0] ^= 1;
        assert!(matches!(s.publish(&bad, "test"), Err(Error::Integrity { .. })));
    }

    #[test]
    fn exhaustion_without_provisioning() {
        let mut s = Session::new(SessionConfig {
            auto_provision: false,
            ..SessionConfig::seeded(6)
        });
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let codec = s.codec();
        let a = SharedVec::share(&[codec.encode(2.0).unwrap()], &mut rng);
        assert!(matches!(s.mul(&a, &a, true), Err(Error::RandomnessExhausted { .. })));

        s.provision_trunc(20, 1);
        s.provision_bits(2);
        let p = s.mul(&a, &a, true).unwrap();
        assert_eq!(codec.decode(p.reconstruct().unwrap()[0]), 4.0);
        assert_eq!(s.pool_levels(), PoolLevels::default());
    }

    #[test]
    fn channels_drain_every_round() {
        let mut s = Session::new(SessionConfig::seeded(8));
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let a = SharedVec::share_raw(&[1, 2, 3], &mut rng);
        s.msb(&a).unwrap();
        s.is_zero(&a).unwrap();
        assert_eq!(s.pending_messages(), 0);
    }
}

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mpc::uplink::{Field, UplinkLog};
use crate::mpc::{Session, SharedVec};
use crate::ring::RingElement;

use super::{clamp_at_least_one, to_fixed, WeightTable};

/// What one client contributes to reweighing.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalCounts {
    pub client: u64,
    /// 1 when the client belongs to the privileged group.
    pub t: u8,
    pub lc0: u64,
    pub lc1: u64,
}

/// Shares of every client's group bit and label counts, one element per client.
#[derive(Clone, Debug)]
pub struct ClientCountShares {
    pub t: SharedVec,
    pub lc0: SharedVec,
    pub lc1: SharedVec,
}

impl ClientCountShares {
    /// Each client secret-shares its inputs to the three parties.
    pub fn from_clients(clients: &[LocalCounts], log: &mut UplinkLog, rng: &mut impl RngCore) -> Result<Self> {
        if clients.is_empty() {
            return Err(Error::param("reweighing needs at least one client"));
        }
        let mut t = Vec::with_capacity(clients.len());
        let mut lc0 = Vec::with_capacity(clients.len());
        let mut lc1 = Vec::with_capacity(clients.len());
        for c in clients {
            if c.t > 1 {
                return Err(Error::param(format!("client {} group bit {} is not 0/1", c.client, c.t)));
            }
            t.push(log.share_to_parties(c.client, Field::SensitiveAttribute, &[RingElement(c.t as u64)], rng));
            let counts = log.share_to_parties(c.client, Field::LocalCount, &[RingElement(c.lc0), RingElement(c.lc1)], rng);
            lc0.push(counts.slice(0..1));
            lc1.push(counts.slice(1..2));
        }
        let cat = |v: &[SharedVec]| SharedVec::concat(&v.iter().collect::<Vec<_>>());
        Ok(ClientCountShares {
            t: cat(&t),
            lc0: cat(&lc0),
            lc1: cat(&lc1),
        })
    }

    pub fn clients(&self) -> usize {
        self.t.len()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RwOptions {
    pub epsilon: f64,
    pub noise: bool,
}

impl RwOptions {
    pub fn noiseless() -> Self {
        RwOptions {
            epsilon: f64::INFINITY,
            noise: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RwOutcome {
    pub weights: WeightTable,
    /// Noisy counts before clamping (p0, p1, u0, u1); only filled by
    /// validating sessions.
    pub noisy_counts: Option<[f64; 4]>,
}

/// Turns the four clamped noisy counts (fixed point, order p0, p1, u0, u1)
/// into shared weights.
pub trait WeightRule {
    fn weights(&self, s: &mut Session, counts: &SharedVec) -> Result<SharedVec>;
}

/// `W(s,y) = N' / (4 C(s,y))`, so the weighted counts sum to `N'`.
///
/// Counts must stay below `2^(d-2)` so `4 C` is a valid divisor.
#[derive(Clone, Copy, Debug, Default)]
pub struct InverseCount;

impl WeightRule for InverseCount {
    fn weights(&self, s: &mut Session, counts: &SharedVec) -> Result<SharedVec> {
        let total = counts.sum().repeat_each(counts.len());
        let scaled = counts.mul_const(counts.len() as u64);
        s.div(&total, &scaled)
    }
}

pub fn pi_rw(s: &mut Session, counts: &ClientCountShares, opts: RwOptions) -> Result<RwOutcome> {
    pi_rw_with(s, counts, opts, &InverseCount)
}

pub fn pi_rw_with(
    s: &mut Session,
    counts: &ClientCountShares,
    opts: RwOptions,
    rule: &dyn WeightRule,
) -> Result<RwOutcome> {
    if opts.noise && !(opts.epsilon.is_finite() && opts.epsilon > 0.0) {
        return Err(Error::param(format!("epsilon must be positive, got {}", opts.epsilon)));
    }
    let m = counts.clients();
    if m == 0 || counts.lc0.len() != m || counts.lc1.len() != m {
        return Err(Error::param("client count shares are empty or ragged"));
    }

    let privileged = s.mul(
        &SharedVec::concat(&[&counts.t, &counts.t]),
        &SharedVec::concat(&[&counts.lc0, &counts.lc1]),
        false,
    )?;
    let c_p0 = privileged.slice(0..m).sum();
    let c_p1 = privileged.slice(m..2 * m).sum();
    let c_u0 = counts.lc0.sum().sub(&c_p0);
    let c_u1 = counts.lc1.sum().sub(&c_p1);
    let mut cells = to_fixed(s, &SharedVec::concat(&[&c_p0, &c_p1, &c_u0, &c_u1]));

    if opts.noise {
        let noise = s.lap(1.0 / opts.epsilon, 4)?;
        cells = cells.add(&noise);
    }
    let noisy_counts = if s.config().validate {
        let codec = s.codec();
        let v = s.validation_peek(&cells)?;
        Some(std::array::from_fn(|k| codec.decode(v[k])))
    } else {
        None
    };

    let clamped = clamp_at_least_one(s, &cells)?;
    let w = rule.weights(s, &clamped)?;
    let open = s.publish_fixed(&w, "weights")?;
    Ok(RwOutcome {
        weights: WeightTable::from_cells([open[0], open[1], open[2], open[3]], opts.noise.then_some(opts.epsilon)),
        noisy_counts,
    })
}

//! Three-party honest-majority MPC over replicated secret shares.
//!
//! Parties are simulated in process. They only ever touch their own share
//! pairs and talk through FIFO channels whose traffic is metered; a separate
//! dealer hands out correlated randomness ahead of use.

mod dealer;
mod net;
mod protocols;
mod random;
mod session;
mod share;
pub mod uplink;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use dealer::PoolLevels;
pub use net::{format_transcript, CommStats, PrimitiveCounts, TranscriptEntry};
pub use session::{ExecMode, RevealAudit, Session, SessionConfig};
pub use share::{reconstruct, share, PartyShares, SharedBits, SharedValue, SharedVec};

/// One of the three computing parties.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PartyId {
    P1,
    P2,
    P3,
}

impl PartyId {
    pub const ALL: [PartyId; 3] = [PartyId::P1, PartyId::P2, PartyId::P3];

    #[inline]
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Self {
        Self::ALL[i % 3]
    }

    pub fn number(self) -> u8 {
        self as u8 + 1
    }
}

impl fmt::Display for PartyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "P{}", self.number())
    }
}

impl TryFrom<u8> for PartyId {
    type Error = crate::Error;

    fn try_from(v: u8) -> Result<Self, Self::Error> {
        match v {
            1..=3 => Ok(Self::from_index(v as usize - 1)),
            _ => Err(crate::Error::Parameter(format!("party id {v} not in 1..=3"))),
        }
    }
}

//! Privacy-preserving group-fairness mitigation for federated learning.
//!
//! Three simulated computing parties hold replicated secret shares and run
//! reweighing (before training) and noisy ROC construction (after training)
//! without any party seeing client labels or sensitive attributes.

pub mod error;
pub mod fair;
pub mod fl;
pub mod metrics;
pub mod mpc;
pub mod ring;

pub use error::{Error, Result};
pub use ring::{FixedCodec, RingElement};

//! Client-to-server transmissions, instrumented.
//!
//! Clients hand their private inputs to the computing parties only as share
//! pairs. Every transmission is logged with its field and form so a run can be
//! audited afterwards for cleartext leaks of sensitive values or labels.

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::ring::RingElement;

use super::share::SharedVec;
use super::PartyId;

/// What a transmitted value describes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Field {
    SensitiveAttribute,
    Label,
    LocalCount,
    Prediction,
    ModelUpdate,
}

impl Field {
    /// Fields that must never leave a client in the clear.
    pub fn is_private(self) -> bool {
        matches!(self, Field::SensitiveAttribute | Field::Label | Field::LocalCount | Field::Prediction)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Form {
    /// One party's replicated pair of a sharing.
    SharePair,
    Cleartext,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transmission {
    pub client: u64,
    /// `None` for the plain FL aggregator.
    pub party: Option<PartyId>,
    pub field: Field,
    pub form: Form,
    pub elements: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct UplinkLog {
    pub transmissions: Vec<Transmission>,
}

impl UplinkLog {
    /// Secret-shares `values` and records one share-pair transmission per party.
    pub fn share_to_parties(
        &mut self,
        client: u64,
        field: Field,
        values: &[RingElement],
        rng: &mut impl RngCore,
    ) -> SharedVec {
        let v = SharedVec::share(values, rng);
        for party in PartyId::ALL {
            self.transmissions.push(Transmission {
                client,
                party: Some(party),
                field,
                form: Form::SharePair,
                elements: values.len(),
            });
        }
        v
    }

    /// Records a cleartext upload (e.g. model parameters to the aggregator).
    pub fn record_cleartext(&mut self, client: u64, party: Option<PartyId>, field: Field, elements: usize) {
        self.transmissions.push(Transmission {
            client,
            party,
            field,
            form: Form::Cleartext,
            elements,
        });
    }

    /// Transmissions that carried a private field in the clear.
    pub fn cleartext_private(&self) -> Vec<Transmission> {
        self.transmissions
            .iter()
            .copied()
            .filter(|t| t.form == Form::Cleartext && t.field.is_private())
            .collect()
    }

    pub fn merge(&mut self, other: UplinkLog) {
        self.transmissions.extend(other.transmissions);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn shares_are_logged_per_party() {
        let mut log = UplinkLog::default();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let v = log.share_to_parties(4, Field::Label, &[RingElement(1), RingElement(0)], &mut rng);
        assert_eq!(v.reconstruct().unwrap(), vec![RingElement(1), RingElement(0)]);
        assert_eq!(log.transmissions.len(), 3);
        assert!(log.cleartext_private().is_empty());
        log.record_cleartext(4, None, Field::ModelUpdate, 10);
        assert!(log.cleartext_private().is_empty());
        log.record_cleartext(4, None, Field::Label, 1);
        assert_eq!(log.cleartext_private().len(), 1);
    }
}

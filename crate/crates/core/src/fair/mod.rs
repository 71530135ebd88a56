//! Bias-mitigation protocols over secret shares: reweighing of training
//! samples, per-group confusion counts, noisy ROC construction, and the
//! cleartext threshold search run on the published curves.

mod confusion;
mod reweigh;
mod roc;
mod threshold;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mpc::{Session, SharedVec};
use crate::ring::RingElement;

pub use confusion::{pi_cf, SharedConfusion};
pub use reweigh::{pi_rw, pi_rw_with, ClientCountShares, InverseCount, LocalCounts, RwOptions, RwOutcome, WeightRule};
pub use roc::{pi_roc, roc_thresholds, PublishedRoc, RocOptions, SharedRoc, ROC_POINTS};
pub use threshold::{select_thresholds, ThresholdPair, DEFAULT_TPR_GAP_TOL};

/// Published sample weights per (group, label) cell.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightTable {
    pub p0: f64,
    pub p1: f64,
    pub u0: f64,
    pub u1: f64,
    /// Budget spent on the counts; `None` when noise was disabled.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
}

impl WeightTable {
    pub fn uniform() -> Self {
        WeightTable {
            p0: 1.0,
            p1: 1.0,
            u0: 1.0,
            u1: 1.0,
            epsilon: None,
        }
    }

    /// Weight for sensitive value `s` (1 = privileged) and label `y`.
    pub fn get(&self, s: u8, y: u8) -> f64 {
        match (s, y) {
            (1, 0) => self.p0,
            (1, _) => self.p1,
            (_, 0) => self.u0,
            _ => self.u1,
        }
    }

    /// Cells in the order p0, p1, u0, u1.
    pub fn cells(&self) -> [f64; 4] {
        [self.p0, self.p1, self.u0, self.u1]
    }

    fn from_cells(c: [f64; 4], epsilon: Option<f64>) -> Self {
        WeightTable {
            p0: c[0],
            p1: c[1],
            u0: c[2],
            u1: c[3],
            epsilon,
        }
    }
}

/// One group's ROC table: rows of (FPR, TPR, threshold).
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RocCurve {
    pub fpr: Vec<f64>,
    pub tpr: Vec<f64>,
    pub threshold: Vec<f64>,
}

impl RocCurve {
    pub fn with_capacity(n: usize) -> Self {
        RocCurve {
            fpr: Vec::with_capacity(n),
            tpr: Vec::with_capacity(n),
            threshold: Vec::with_capacity(n),
        }
    }

    pub fn push(&mut self, threshold: f64, fpr: f64, tpr: f64) {
        self.threshold.push(threshold);
        self.fpr.push(fpr);
        self.tpr.push(tpr);
    }

    pub fn len(&self) -> usize {
        self.threshold.len()
    }

    pub fn is_empty(&self) -> bool {
        self.threshold.is_empty()
    }

    /// Structure plus strictly increasing thresholds.
    pub fn validate(&self) -> Result<()> {
        self.check_columns()?;
        if self.threshold.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::param("ROC thresholds must be strictly increasing"));
        }
        Ok(())
    }

    /// Equal, non-empty, finite columns; row order is not checked.
    pub fn check_columns(&self) -> Result<()> {
        let n = self.threshold.len();
        if n == 0 || self.fpr.len() != n || self.tpr.len() != n {
            return Err(Error::param(format!(
                "ROC curve needs equal non-empty columns, got fpr={} tpr={} threshold={}",
                self.fpr.len(),
                self.tpr.len(),
                n
            )));
        }
        if self.fpr.iter().chain(&self.tpr).chain(&self.threshold).any(|v| !v.is_finite()) {
            return Err(Error::param("ROC entries must be finite"));
        }
        Ok(())
    }

    /// TPR and FPR never increase with the threshold.
    pub fn is_monotone(&self) -> bool {
        self.tpr.windows(2).all(|w| w[1] <= w[0]) && self.fpr.windows(2).all(|w| w[1] <= w[0])
    }
}

/// `max(x, 1)` elementwise on fixed-point sharings.
pub(crate) fn clamp_at_least_one(s: &mut Session, x: &SharedVec) -> Result<SharedVec> {
    let one = s.codec().one();
    let above = s.gte_public(x, &vec![one; x.len()])?;
    let excess = x.add_const(RingElement(one.wrapping_neg()));
    Ok(s.mul(&above, &excess, false)?.add_const(RingElement(one)))
}

/// Integer sharings to fixed point (exact).
pub(crate) fn to_fixed(s: &Session, x: &SharedVec) -> SharedVec {
    x.mul_const(s.codec().one())
}

//! Cleartext group-fairness and utility metrics.
//!
//! Group `p` is the privileged group (sensitive value 1), `u` the other one.
//! Rates with a zero denominator are errors rather than zeros.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fair::RocCurve;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: u64,
    pub tn: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl ConfusionMatrix {
    pub fn total(&self) -> u64 {
        self.tp + self.tn + self.fp + self.fn_
    }

    pub fn tpr(&self) -> Result<f64> {
        ratio(self.tp, self.tp + self.fn_, "TPR with no positive samples")
    }

    pub fn fpr(&self) -> Result<f64> {
        ratio(self.fp, self.fp + self.tn, "FPR with no negative samples")
    }

    pub fn predicted_positive(&self) -> u64 {
        self.tp + self.fp
    }

    pub fn correct(&self) -> u64 {
        self.tp + self.tn
    }
}

fn ratio(num: u64, den: u64, what: &str) -> Result<f64> {
    if den == 0 {
        return Err(Error::UndefinedMetric(what.to_string()));
    }
    Ok(num as f64 / den as f64)
}

/// Which form of the odds and parity terms to report.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricFlavor {
    /// Average odds over TPR and FPR gaps; parity over positive predictions.
    #[default]
    Standard,
    /// Odds term built from the TPR gap alone; parity over true positives.
    Literal,
}

/// Per-group confusion counts, returned as `(p, u)`.
pub fn confusion_by_group(y: &[u8], yhat: &[u8], s: &[u8]) -> Result<(ConfusionMatrix, ConfusionMatrix)> {
    check_lengths(y.len(), &[yhat.len(), s.len()])?;
    let mut p = ConfusionMatrix::default();
    let mut u = ConfusionMatrix::default();
    for ((&yi, &pi), &si) in y.iter().zip(yhat).zip(s) {
        let cm = if si == 1 { &mut p } else { &mut u };
        match (yi == 1, pi == 1) {
            (true, true) => cm.tp += 1,
            (false, false) => cm.tn += 1,
            (false, true) => cm.fp += 1,
            (true, false) => cm.fn_ += 1,
        }
    }
    Ok((p, u))
}

fn check_lengths(n: usize, others: &[usize]) -> Result<()> {
    for &m in others {
        if m != n {
            return Err(Error::Dimension { expected: n, got: m });
        }
    }
    Ok(())
}

/// `|1 - max(TPR_u / TPR_p, TPR_p / TPR_u)|`.
pub fn disparate_impact_dev(cm_p: &ConfusionMatrix, cm_u: &ConfusionMatrix) -> Result<f64> {
    let (tp, tu) = (cm_p.tpr()?, cm_u.tpr()?);
    if tp == 0.0 || tu == 0.0 {
        return Err(Error::UndefinedMetric("disparate impact with a zero TPR".into()));
    }
    Ok((1.0 - (tu / tp).max(tp / tu)).abs())
}

pub fn eop_diff(cm_p: &ConfusionMatrix, cm_u: &ConfusionMatrix) -> Result<f64> {
    Ok((cm_p.tpr()? - cm_u.tpr()?).abs())
}

pub fn eodd_diff(cm_p: &ConfusionMatrix, cm_u: &ConfusionMatrix, flavor: MetricFlavor) -> Result<f64> {
    let tpr_gap = eop_diff(cm_p, cm_u)?;
    let second = match flavor {
        MetricFlavor::Standard => (cm_p.fpr()? - cm_u.fpr()?).abs(),
        MetricFlavor::Literal => tpr_gap,
    };
    Ok(0.5 * (tpr_gap + second))
}

/// Gap in per-group positive-prediction rates over group sizes `n_p`, `n_u`.
pub fn sp_diff(
    cm_p: &ConfusionMatrix,
    cm_u: &ConfusionMatrix,
    n_p: u64,
    n_u: u64,
    flavor: MetricFlavor,
) -> Result<f64> {
    if n_p == 0 || n_u == 0 {
        return Err(Error::UndefinedMetric("statistical parity with an empty group".into()));
    }
    let positives = |cm: &ConfusionMatrix| match flavor {
        MetricFlavor::Standard => cm.predicted_positive(),
        MetricFlavor::Literal => cm.tp,
    };
    Ok((positives(cm_p) as f64 / n_p as f64 - positives(cm_u) as f64 / n_u as f64).abs())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FairnessReport {
    pub accuracy: f64,
    pub di_dev: f64,
    pub eop: f64,
    pub eodd: f64,
    pub sp: f64,
}

impl FairnessReport {
    pub fn from_confusion(cm_p: &ConfusionMatrix, cm_u: &ConfusionMatrix, flavor: MetricFlavor) -> Result<Self> {
        let total = cm_p.total() + cm_u.total();
        if total == 0 {
            return Err(Error::UndefinedMetric("accuracy of an empty evaluation set".into()));
        }
        Ok(FairnessReport {
            accuracy: (cm_p.correct() + cm_u.correct()) as f64 / total as f64,
            di_dev: disparate_impact_dev(cm_p, cm_u)?,
            eop: eop_diff(cm_p, cm_u)?,
            eodd: eodd_diff(cm_p, cm_u, flavor)?,
            sp: sp_diff(cm_p, cm_u, cm_p.total(), cm_u.total(), flavor)?,
        })
    }

    pub fn evaluate(y: &[u8], yhat: &[u8], s: &[u8], flavor: MetricFlavor) -> Result<Self> {
        let (p, u) = confusion_by_group(y, yhat, s)?;
        Self::from_confusion(&p, &u, flavor)
    }

    /// Field-wise mean.
    pub fn mean(reports: &[FairnessReport]) -> Option<FairnessReport> {
        if reports.is_empty() {
            return None;
        }
        let n = reports.len() as f64;
        let avg = |f: fn(&FairnessReport) -> f64| reports.iter().map(f).sum::<f64>() / n;
        Some(FairnessReport {
            accuracy: avg(|r| r.accuracy),
            di_dev: avg(|r| r.di_dev),
            eop: avg(|r| r.eop),
            eodd: avg(|r| r.eodd),
            sp: avg(|r| r.sp),
        })
    }
}

/// Per-group ROC curves in the clear, classifying `prob >= threshold`.
/// Returns `(p, u)`.
pub fn roc_clear(y: &[u8], prob: &[f64], s: &[u8], thresholds: &[f64]) -> Result<(RocCurve, RocCurve)> {
    check_lengths(y.len(), &[prob.len(), s.len()])?;
    let mut p = RocCurve::with_capacity(thresholds.len());
    let mut u = RocCurve::with_capacity(thresholds.len());
    let mut yhat = vec![0u8; y.len()];
    for &t in thresholds {
        for (out, &pr) in yhat.iter_mut().zip(prob) {
            *out = u8::from(pr >= t);
        }
        let (cp, cu) = confusion_by_group(y, &yhat, s)?;
        p.push(t, cp.fpr()?, cp.tpr()?);
        u.push(t, cu.fpr()?, cu.tpr()?);
    }
    Ok((p, u))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cm(tp: u64, tn: u64, fp: u64, fn_: u64) -> ConfusionMatrix {
        ConfusionMatrix { tp, tn, fp, fn_ }
    }

    #[test]
    fn confusion_examples() {
        let (p, u) = confusion_by_group(&[1], &[1], &[1]).unwrap();
        assert_eq!(p, cm(1, 0, 0, 0));
        assert_eq!(u.total(), 0);
        let (_, u) = confusion_by_group(&[1, 0], &[0, 1], &[0, 0]).unwrap();
        assert_eq!(u, cm(0, 0, 1, 1));
        assert!(confusion_by_group(&[1], &[1, 0], &[1]).is_err());
    }

    #[test]
    fn disparate_impact_examples() {
        let a = cm(8, 0, 0, 2);
        let b = cm(6, 0, 0, 4);
        assert_eq!(disparate_impact_dev(&a, &a).unwrap(), 0.0);
        let x = disparate_impact_dev(&a, &b).unwrap();
        assert!((x - 1.0 / 3.0).abs() < 1e-12);
        assert!((disparate_impact_dev(&b, &a).unwrap() - x).abs() < 1e-12);
        let zero = cm(0, 1, 0, 3);
        assert!(matches!(disparate_impact_dev(&a, &zero), Err(Error::UndefinedMetric(_))));
    }

    #[test]
    fn odds_and_opportunity() {
        let a = cm(8, 9, 1, 2);
        let b = cm(6, 8, 2, 4);
        assert!((eop_diff(&a, &b).unwrap() - 0.2).abs() < 1e-12);
        assert!((eodd_diff(&a, &b, MetricFlavor::Standard).unwrap() - 0.15).abs() < 1e-12);
        assert!((eodd_diff(&a, &b, MetricFlavor::Literal).unwrap() - 0.2).abs() < 1e-12);
        let c = cm(6, 9, 1, 4);
        assert!((eodd_diff(&a, &c, MetricFlavor::Standard).unwrap() - eop_diff(&a, &c).unwrap() / 2.0).abs() < 1e-12);
        assert!(eop_diff(&a, &cm(0, 1, 1, 0)).is_err());
    }

    #[test]
    fn parity_examples() {
        let a = cm(20, 60, 10, 10);
        let b = cm(5, 80, 5, 10);
        assert!((sp_diff(&a, &b, 100, 100, MetricFlavor::Standard).unwrap() - 0.2).abs() < 1e-12);
        assert!((sp_diff(&a, &b, 100, 100, MetricFlavor::Literal).unwrap() - 0.15).abs() < 1e-12);
        assert_eq!(sp_diff(&a, &a, 100, 100, MetricFlavor::Standard).unwrap(), 0.0);
        assert!(sp_diff(&a, &b, 0, 100, MetricFlavor::Standard).is_err());
    }

    #[test]
    fn roc_clear_examples() {
        let y = [1, 0, 1, 0];
        let s = [1, 1, 0, 0];
        let prob = [1.0, 0.0, 1.0, 0.0];
        let (p, u) = roc_clear(&y, &prob, &s, &[0.0, 0.5]).unwrap();
        assert_eq!((p.fpr[0], p.tpr[0]), (1.0, 1.0));
        assert_eq!((u.fpr[1], u.tpr[1]), (0.0, 1.0));
    }
}

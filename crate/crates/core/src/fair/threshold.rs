use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::RocCurve;

pub const DEFAULT_TPR_GAP_TOL: f64 = 0.02;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdPair {
    pub t_p: f64,
    pub t_u: f64,
}

impl ThresholdPair {
    pub fn new(t_p: f64, t_u: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&t_p) || !(0.0..=1.0).contains(&t_u) {
            return Err(Error::param(format!("thresholds must lie in [0, 1], got ({t_p}, {t_u})")));
        }
        Ok(ThresholdPair { t_p, t_u })
    }

    pub fn for_group(&self, s: u8) -> f64 {
        if s == 1 {
            self.t_p
        } else {
            self.t_u
        }
    }
}

struct Candidate {
    youden: f64,
    gap: f64,
    t_p: f64,
    t_u: f64,
}

impl Candidate {
    /// `Less` means `self` is preferred.
    fn rank(&self, other: &Candidate) -> Ordering {
        other
            .youden
            .total_cmp(&self.youden)
            .then(self.gap.total_cmp(&other.gap))
            .then(self.t_p.total_cmp(&other.t_p))
            .then(self.t_u.total_cmp(&other.t_u))
    }
}

/// Picks one threshold per group from published curves.
///
/// Pairs whose TPRs differ by at most `tpr_gap_tol` are admissible (when
/// none is, the pairs with the smallest gap are). Among those, the summed
/// Youden statistic is maximised; ties go to the smaller gap, then the lower
/// `t_p`, then the lower `t_u`.
pub fn select_thresholds(roc_p: &RocCurve, roc_u: &RocCurve, tpr_gap_tol: f64) -> Result<ThresholdPair> {
    roc_p.check_columns()?;
    roc_u.check_columns()?;
    if !(tpr_gap_tol.is_finite() && tpr_gap_tol >= 0.0) {
        return Err(Error::param(format!("TPR gap tolerance must be non-negative, got {tpr_gap_tol}")));
    }
    let youden = |r: &RocCurve| -> Vec<f64> { r.tpr.iter().zip(&r.fpr).map(|(t, f)| t - f).collect() };
    let (yp, yu) = (youden(roc_p), youden(roc_u));

    let mut min_gap = f64::INFINITY;
    for tp in &roc_p.tpr {
        for tu in &roc_u.tpr {
            min_gap = min_gap.min((tp - tu).abs());
        }
    }
    let limit = if min_gap <= tpr_gap_tol { tpr_gap_tol } else { min_gap };

    let mut best: Option<Candidate> = None;
    for i in 0..roc_p.len() {
        for j in 0..roc_u.len() {
            let gap = (roc_p.tpr[i] - roc_u.tpr[j]).abs();
            if gap > limit {
                continue;
            }
            let c = Candidate {
                youden: yp[i] + yu[j],
                gap,
                t_p: roc_p.threshold[i],
                t_u: roc_u.threshold[j],
            };
            if best.as_ref().is_none_or(|b| c.rank(b) == Ordering::Less) {
                best = Some(c);
            }
        }
    }
    let b = best.ok_or_else(|| Error::param("no admissible threshold pair"))?;
    ThresholdPair::new(b.t_p, b.t_u)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn curve(rows: &[(f64, f64, f64)]) -> RocCurve {
        let mut r = RocCurve::default();
        for &(t, fpr, tpr) in rows {
            r.push(t, fpr, tpr);
        }
        r
    }

    #[test]
    fn identical_curves_give_equal_thresholds() {
        let c = curve(&[(0.0, 1.0, 1.0), (0.3, 0.4, 0.9), (0.6, 0.1, 0.7), (1.0, 0.0, 0.0)]);
        let t = select_thresholds(&c, &c, DEFAULT_TPR_GAP_TOL).unwrap();
        assert_eq!(t.t_p, t.t_u);
        assert_eq!(t.t_p, 0.6);
    }

    #[test]
    fn shifted_curve_selects_shifted_threshold() {
        let p = curve(&[(0.1, 0.8, 0.95), (0.3, 0.3, 0.8), (0.5, 0.05, 0.4)]);
        let u = curve(&[(0.3, 0.8, 0.95), (0.5, 0.3, 0.8), (0.7, 0.05, 0.4)]);
        let t = select_thresholds(&p, &u, 0.01).unwrap();
        assert!((t.t_p - 0.3).abs() < 1e-12);
        assert!((t.t_u - 0.5).abs() < 1e-12);
    }

    #[test]
    fn unconstrained_picks_independent_maxima() {
        let p = curve(&[(0.2, 0.5, 0.9), (0.4, 0.1, 0.8), (0.6, 0.0, 0.3)]);
        let u = curve(&[(0.2, 0.6, 0.7), (0.4, 0.3, 0.6), (0.6, 0.0, 0.4)]);
        let t = select_thresholds(&p, &u, 1.0).unwrap();
        assert_eq!((t.t_p, t.t_u), (0.4, 0.6));
    }

    #[test]
    fn infeasible_tolerance_minimises_gap() {
        let p = curve(&[(0.2, 0.5, 0.9), (0.4, 0.1, 0.8)]);
        let u = curve(&[(0.2, 0.6, 0.5), (0.4, 0.3, 0.3)]);
        let t = select_thresholds(&p, &u, 0.0).unwrap();
        assert_eq!((t.t_p, t.t_u), (0.4, 0.2));
    }

    #[test]
    fn rejects_degenerate_curves() {
        let c = curve(&[(0.0, 1.0, 1.0)]);
        assert!(select_thresholds(&RocCurve::default(), &c, 0.02).is_err());
        assert!(select_thresholds(&c, &c, -1.0).is_err());
    }
}

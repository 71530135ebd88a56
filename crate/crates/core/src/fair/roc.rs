use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mpc::{Session, SharedVec};
use crate::ring::FixedCodec;

use super::confusion::cf_batched;
use super::{clamp_at_least_one, to_fixed, RocCurve};

/// Thresholds 0.000, 0.001, ..., 1.000.
pub const ROC_POINTS: usize = 1001;

/// Shared elements processed per comparison batch.
const BATCH_ELEMS: usize = 1 << 18;

/// `points` evenly spaced thresholds on [0, 1], each rounded to the nearest
/// fixed-point value so shared and cleartext comparisons agree.
pub fn roc_thresholds(points: usize, codec: FixedCodec) -> Result<Vec<f64>> {
    if points < 2 {
        return Err(Error::param(format!("need at least 2 ROC points, got {points}")));
    }
    (0..points)
        .map(|j| codec.encode(j as f64 / (points - 1) as f64).map(|r| codec.decode(r)))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RocOptions {
    pub epsilon: f64,
    pub noise: bool,
    pub points: usize,
}

impl RocOptions {
    pub fn new(epsilon: f64, noise: bool) -> Self {
        RocOptions {
            epsilon,
            noise,
            points: ROC_POINTS,
        }
    }
}

/// Shares of both groups' curves, one element per threshold.
#[derive(Clone, Debug)]
pub struct SharedRoc {
    pub thresholds: Vec<f64>,
    pub fpr_p: SharedVec,
    pub tpr_p: SharedVec,
    pub fpr_u: SharedVec,
    pub tpr_u: SharedVec,
    pub epsilon: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PublishedRoc {
    pub p: RocCurve,
    pub u: RocCurve,
    /// Laplace budget of each threshold's counts.
    pub epsilon_per_threshold: Option<f64>,
    /// Sequential-composition bound across all thresholds.
    pub epsilon_all_thresholds: Option<f64>,
}

impl SharedRoc {
    pub fn publish(&self, s: &mut Session) -> Result<PublishedRoc> {
        let all = SharedVec::concat(&[&self.fpr_p, &self.tpr_p, &self.fpr_u, &self.tpr_u]);
        let open = s.publish_fixed(&all, "roc")?;
        let t = self.thresholds.len();
        let col = |k: usize| open[k * t..(k + 1) * t].to_vec();
        Ok(PublishedRoc {
            p: RocCurve {
                fpr: col(0),
                tpr: col(1),
                threshold: self.thresholds.clone(),
            },
            u: RocCurve {
                fpr: col(2),
                tpr: col(3),
                threshold: self.thresholds.clone(),
            },
            epsilon_per_threshold: self.epsilon,
            epsilon_all_thresholds: self.epsilon.map(|e| e * t as f64),
        })
    }
}

/// Noisy per-group ROC curves from shared labels, fixed-point scores in
/// [0, 1] and sensitive values.
pub fn pi_roc(
    s: &mut Session,
    y: &SharedVec,
    prob: &SharedVec,
    sens: &SharedVec,
    opts: RocOptions,
) -> Result<SharedRoc> {
    let n = y.len();
    if n == 0 || prob.len() != n || sens.len() != n {
        return Err(Error::param(format!(
            "ROC inputs must be non-empty and equal length: {n}, {}, {}",
            prob.len(),
            sens.len()
        )));
    }
    if opts.noise && !(opts.epsilon.is_finite() && opts.epsilon > 0.0) {
        return Err(Error::param(format!("epsilon must be positive, got {}", opts.epsilon)));
    }
    let codec = s.codec();
    let thresholds = roc_thresholds(opts.points, codec)?;
    let encoded: Vec<u64> = thresholds.iter().map(|&t| codec.encode(t).map(|r| r.0)).collect::<Result<_>>()?;

    let chunk = (BATCH_ELEMS / n).clamp(1, thresholds.len());
    let mut cols: [Vec<SharedVec>; 4] = Default::default();
    for start in (0..thresholds.len()).step_by(chunk) {
        let b = chunk.min(thresholds.len() - start);
        let consts: Vec<u64> = encoded[start..start + b]
            .iter()
            .flat_map(|&t| std::iter::repeat_n(t, n))
            .collect();
        let yhat = s.gte_public(&prob.tile(b), &consts)?;
        let cf = cf_batched(s, &y.tile(b), &yhat, &sens.tile(b), n)?;

        let mut counts = to_fixed(s, &SharedVec::concat(&cf.fields()));
        if opts.noise {
            let noise = s.lap(1.0 / opts.epsilon, counts.len())?;
            counts = counts.add(&noise);
        }
        let f = |k: usize| counts.slice(k * b..(k + 1) * b);
        let (tp_p, tn_p, fp_p, fn_p) = (f(0), f(1), f(2), f(3));
        let (tp_u, tn_u, fp_u, fn_u) = (f(4), f(5), f(6), f(7));

        let dens = SharedVec::concat(&[&tp_p.add(&fn_p), &fp_p.add(&tn_p), &tp_u.add(&fn_u), &fp_u.add(&tn_u)]);
        let dens = clamp_at_least_one(s, &dens)?;
        let nums = SharedVec::concat(&[&tp_p, &fp_p, &tp_u, &fp_u]);
        let rates = s.div(&nums, &dens)?;
        for (k, col) in cols.iter_mut().enumerate() {
            col.push(rates.slice(k * b..(k + 1) * b));
        }
    }
    let cat = |v: &[SharedVec]| SharedVec::concat(&v.iter().collect::<Vec<_>>());
    Ok(SharedRoc {
        thresholds,
        tpr_p: cat(&cols[0]),
        fpr_p: cat(&cols[1]),
        tpr_u: cat(&cols[2]),
        fpr_u: cat(&cols[3]),
        epsilon: opts.noise.then_some(opts.epsilon),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thresholds_are_fixed_point_grid() {
        let c = FixedCodec::default();
        let t = roc_thresholds(ROC_POINTS, c).unwrap();
        assert_eq!(t.len(), 1001);
        assert_eq!(t[0], 0.0);
        assert_eq!(t[1000], 1.0);
        assert!(t.windows(2).all(|w| w[1] > w[0]));
        assert!(t.iter().all(|&x| c.decode(c.encode(x).unwrap()) == x));
        assert!((t[500] - 0.5).abs() < 1e-12);
        assert!(roc_thresholds(1, c).is_err());
    }
}

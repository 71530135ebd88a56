use crate::error::{Error, Result};
use crate::metrics::ConfusionMatrix;
use crate::mpc::{Session, SharedVec};
use crate::ring::RingElement;

/// Shared per-group confusion counts. Each field holds one count per batch
/// (a single element for a plain [`pi_cf`] call).
#[derive(Clone, Debug)]
pub struct SharedConfusion {
    pub tp_p: SharedVec,
    pub tn_p: SharedVec,
    pub fp_p: SharedVec,
    pub fn_p: SharedVec,
    pub tp_u: SharedVec,
    pub tn_u: SharedVec,
    pub fp_u: SharedVec,
    pub fn_u: SharedVec,
}

impl SharedConfusion {
    pub fn batches(&self) -> usize {
        self.tp_p.len()
    }

    /// Fields in the order tp, tn, fp, fn for p then u.
    pub fn fields(&self) -> [&SharedVec; 8] {
        [
            &self.tp_p, &self.tn_p, &self.fp_p, &self.fn_p, &self.tp_u, &self.tn_u, &self.fp_u, &self.fn_u,
        ]
    }

    fn from_fields(f: [SharedVec; 8]) -> Self {
        let [tp_p, tn_p, fp_p, fn_p, tp_u, tn_u, fp_u, fn_u] = f;
        SharedConfusion {
            tp_p,
            tn_p,
            fp_p,
            fn_p,
            tp_u,
            tn_u,
            fp_u,
            fn_u,
        }
    }

    /// Opens the integer counts of every batch as `(p, u)` matrices.
    pub fn publish(&self, s: &mut Session, label: &str) -> Result<Vec<(ConfusionMatrix, ConfusionMatrix)>> {
        let all = SharedVec::concat(&self.fields());
        let open = s.publish(&all, label)?;
        let b = self.batches();
        let at = |f: usize, k: usize| open[f * b + k].0;
        Ok((0..b)
            .map(|k| {
                (
                    ConfusionMatrix {
                        tp: at(0, k),
                        tn: at(1, k),
                        fp: at(2, k),
                        fn_: at(3, k),
                    },
                    ConfusionMatrix {
                        tp: at(4, k),
                        tn: at(5, k),
                        fp: at(6, k),
                        fn_: at(7, k),
                    },
                )
            })
            .collect())
    }
}

/// Per-group confusion counts from shared 0/1 vectors of true labels,
/// predictions and sensitive values. Four multiplications per sample.
pub fn pi_cf(s: &mut Session, y: &SharedVec, yhat: &SharedVec, sens: &SharedVec) -> Result<SharedConfusion> {
    let n = y.len();
    for v in [yhat, sens] {
        if v.len() != n {
            return Err(Error::param(format!("confusion inputs differ in length: {n} vs {}", v.len())));
        }
    }
    cf_batched(s, y, yhat, sens, n.max(1))
}

/// `pi_cf` over `len / n` independent batches of `n` samples laid out
/// batch-major.
pub(crate) fn cf_batched(
    s: &mut Session,
    y: &SharedVec,
    yhat: &SharedVec,
    sens: &SharedVec,
    n: usize,
) -> Result<SharedConfusion> {
    let len = y.len();
    if len == 0 {
        return Ok(SharedConfusion::from_fields(std::array::from_fn(|_| SharedVec::zeros(1))));
    }
    let prods = s.mul(
        &SharedVec::concat(&[y, y, yhat]),
        &SharedVec::concat(&[yhat, sens, sens]),
        false,
    )?;
    let tp = prods.slice(0..len);
    let ys = prods.slice(len..2 * len);
    let ps = prods.slice(2 * len..3 * len);
    let tps = s.mul(&tp, sens, false)?;

    let per_sample = [
        tps.clone(),
        sens.sub(&ys).sub(&ps).add(&tps),
        ps.sub(&tps),
        ys.sub(&tps),
        tp.sub(&tps),
        sens.add(y).add(yhat)
            .neg()
            .add(&ys)
            .add(&ps)
            .add(&tp)
            .sub(&tps)
            .add_const(RingElement::ONE),
        yhat.sub(&ps).sub(&tp).add(&tps),
        y.sub(&ys).sub(&tp).add(&tps),
    ];
    Ok(SharedConfusion::from_fields(per_sample.map(|v| v.block_sums(n))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::confusion_by_group;
    use crate::mpc::SessionConfig;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn bits(v: &[u8], rng: &mut ChaCha8Rng) -> SharedVec {
        let r: Vec<_> = v.iter().map(|&b| RingElement(b as u64)).collect();
        SharedVec::share(&r, rng)
    }

    #[test]
    fn batched_matches_per_batch_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut s = Session::new(SessionConfig::seeded(3));
        let n = 37;
        let y: Vec<u8> = (0..n).map(|_| rng.gen_range(0..2)).collect();
        let sens: Vec<u8> = (0..n).map(|_| rng.gen_range(0..2)).collect();
        let yhats: Vec<Vec<u8>> = (0..4).map(|_| (0..n).map(|_| rng.gen_range(0..2)).collect()).collect();
        let flat: Vec<u8> = yhats.concat();
        let yv = bits(&y, &mut rng).tile(4);
        let sv = bits(&sens, &mut rng).tile(4);
        let hv = bits(&flat, &mut rng);
        let cf = cf_batched(&mut s, &yv, &hv, &sv, n).unwrap();
        let open = cf.publish(&mut s, "test").unwrap();
        for (k, yh) in yhats.iter().enumerate() {
            assert_eq!(open[k], confusion_by_group(&y, yh, &sens).unwrap());
        }
    }
}

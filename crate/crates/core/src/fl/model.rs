use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fair::{ThresholdPair, WeightTable};
use crate::mpc::uplink::{Field, UplinkLog};

use super::data::ClientDataset;

/// Logistic regression parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GlobalModel {
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl GlobalModel {
    pub fn zeros(dim: usize) -> Self {
        GlobalModel {
            weights: vec![0.0; dim],
            bias: 0.0,
        }
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    fn check_dim(&self, dim: usize) -> Result<()> {
        if dim != self.dim() {
            return Err(Error::Dimension {
                expected: self.dim(),
                got: dim,
            });
        }
        Ok(())
    }

    fn score(&self, x: &[f64]) -> f64 {
        self.weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + self.bias
    }

    fn is_finite(&self) -> bool {
        self.bias.is_finite() && self.weights.iter().all(|w| w.is_finite())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub rounds: usize,
    pub local_epochs: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub seed: u64,
    /// Fraction of clients sampled per round.
    pub client_fraction: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            rounds: 20,
            local_epochs: 1,
            learning_rate: 0.1,
            batch_size: 16,
            seed: 0,
            client_fraction: 1.0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.rounds == 0 || self.local_epochs == 0 || self.batch_size == 0 {
            return Err(Error::param("rounds, local epochs and batch size must be positive"));
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(Error::param(format!("learning rate must be positive, got {}", self.learning_rate)));
        }
        if !(self.client_fraction > 0.0 && self.client_fraction <= 1.0) {
            return Err(Error::param(format!("client fraction must be in (0, 1], got {}", self.client_fraction)));
        }
        Ok(())
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

pub fn predict_proba(model: &GlobalModel, features: &[Vec<f64>]) -> Result<Vec<f64>> {
    features
        .iter()
        .map(|x| {
            model.check_dim(x.len())?;
            Ok(sigmoid(model.score(x)))
        })
        .collect()
}

/// `1` where `prob >= t` for the client's group.
pub fn apply_thresholds(probs: &[f64], s_k: u8, t: &ThresholdPair) -> Vec<u8> {
    let cut = t.for_group(s_k);
    probs.iter().map(|&p| u8::from(p >= cut)).collect()
}

/// Mean of `w_i * BCE_i` over the given rows.
pub fn weighted_loss(model: &GlobalModel, x: &[Vec<f64>], y: &[u8], w: &[f64]) -> f64 {
    let n = x.len() as f64;
    x.iter()
        .zip(y)
        .zip(w)
        .map(|((xi, &yi), &wi)| {
            let z = model.score(xi);
            // log(1 + e^z) - y z, stable for large |z|
            let softplus = if z > 0.0 { z + (-z).exp().ln_1p() } else { z.exp().ln_1p() };
            wi * (softplus - yi as f64 * z)
        })
        .sum::<f64>()
        / n
}

/// Gradient of [`weighted_loss`] as `(d weights, d bias)`.
pub fn weighted_gradient(model: &GlobalModel, x: &[Vec<f64>], y: &[u8], w: &[f64]) -> (Vec<f64>, f64) {
    let n = x.len() as f64;
    let mut gw = vec![0.0; model.dim()];
    let mut gb = 0.0;
    for ((xi, &yi), &wi) in x.iter().zip(y).zip(w) {
        let r = wi * (sigmoid(model.score(xi)) - yi as f64);
        for (g, v) in gw.iter_mut().zip(xi) {
            *g += r * v;
        }
        gb += r;
    }
    gw.iter_mut().for_each(|g| *g /= n);
    (gw, gb / n)
}

fn stream_seed(seed: u64, round: usize, client: u64) -> u64 {
    let mut h = seed ^ 0x9e37_79b9_7f4a_7c15;
    for v in [round as u64, client] {
        h = (h ^ v).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        h ^= h >> 31;
    }
    h
}

/// Mini-batch gradient descent on the client's weighted loss, starting from
/// `model`. Returns the local parameters and the sample count.
pub fn local_train(
    model: &GlobalModel,
    data: &ClientDataset,
    weights: &WeightTable,
    cfg: &TrainConfig,
    round: usize,
) -> Result<(GlobalModel, usize)> {
    cfg.validate()?;
    model.check_dim(data.dim())?;
    let w: Vec<f64> = data.sensitive.iter().zip(&data.labels).map(|(&s, &y)| weights.get(s, y)).collect();
    if w.iter().any(|v| !v.is_finite()) {
        return Err(Error::param("sample weights must be finite"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(stream_seed(cfg.seed, round, data.id));
    let mut theta = model.clone();
    let mut order: Vec<usize> = (0..data.len()).collect();
    for _ in 0..cfg.local_epochs {
        order.shuffle(&mut rng);
        for batch in order.chunks(cfg.batch_size) {
            let bx: Vec<Vec<f64>> = batch.iter().map(|&i| data.features[i].clone()).collect();
            let by: Vec<u8> = batch.iter().map(|&i| data.labels[i]).collect();
            let bw: Vec<f64> = batch.iter().map(|&i| w[i]).collect();
            let (gw, gb) = weighted_gradient(&theta, &bx, &by, &bw);
            for (t, g) in theta.weights.iter_mut().zip(gw) {
                *t -= cfg.learning_rate * g;
            }
            theta.bias -= cfg.learning_rate * gb;
        }
    }
    let loss = weighted_loss(&theta, &data.features, &data.labels, &w);
    if !loss.is_finite() || !theta.is_finite() {
        return Err(Error::Divergence { round });
    }
    Ok((theta, data.len()))
}

/// Sample-size weighted average of client parameters. The result does not
/// depend on the order of `updates`.
pub fn fedavg(updates: &[(GlobalModel, usize)]) -> Result<GlobalModel> {
    let first = updates.first().ok_or_else(|| Error::param("fedavg needs at least one update"))?;
    let dim = first.0.dim();
    for (m, _) in updates {
        first.0.check_dim(m.dim())?;
    }
    let total: usize = updates.iter().map(|u| u.1).sum();
    if total == 0 {
        return Err(Error::param("fedavg updates carry no samples"));
    }
    // canonical summation order
    let mut order: Vec<&(GlobalModel, usize)> = updates.iter().collect();
    order.sort_by(|a, b| {
        a.1.cmp(&b.1)
            .then(a.0.bias.total_cmp(&b.0.bias))
            .then_with(|| {
                a.0.weights
                    .iter()
                    .zip(&b.0.weights)
                    .map(|(x, y)| x.total_cmp(y))
                    .find(|o| o.is_ne())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
    });
    let mut out = GlobalModel::zeros(dim);
    for (m, n) in order {
        let f = *n as f64 / total as f64;
        for (o, w) in out.weights.iter_mut().zip(&m.weights) {
            *o += f * w;
        }
        out.bias += f * m.bias;
    }
    Ok(out)
}

fn sampled_clients(n: usize, cfg: &TrainConfig, round: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..n).collect();
    if cfg.client_fraction >= 1.0 {
        return idx;
    }
    let k = ((cfg.client_fraction * n as f64).ceil() as usize).clamp(1, n);
    let mut rng = ChaCha8Rng::seed_from_u64(stream_seed(cfg.seed, round, u64::MAX));
    idx.shuffle(&mut rng);
    idx.truncate(k);
    idx.sort_unstable();
    idx
}

/// FedAvg training from a zero model. Clients train in parallel each round.
pub fn train_federated(clients: &[ClientDataset], weights: &WeightTable, cfg: &TrainConfig) -> Result<GlobalModel> {
    train_federated_logged(clients, weights, cfg, &mut UplinkLog::default())
}

/// [`train_federated`], recording each client's parameter upload.
pub fn train_federated_logged(
    clients: &[ClientDataset],
    weights: &WeightTable,
    cfg: &TrainConfig,
    log: &mut UplinkLog,
) -> Result<GlobalModel> {
    cfg.validate()?;
    let dim = clients.first().ok_or_else(|| Error::param("no clients to train on"))?.dim();
    let mut model = GlobalModel::zeros(dim);
    for round in 0..cfg.rounds {
        let picked = sampled_clients(clients.len(), cfg, round);
        let updates = picked
            .par_iter()
            .map(|&k| local_train(&model, &clients[k], weights, cfg, round))
            .collect::<Result<Vec<_>>>()?;
        for &k in &picked {
            log.record_cleartext(clients[k].id, None, Field::ModelUpdate, dim + 1);
        }
        model = fedavg(&updates)?;
    }
    Ok(model)
}

/// The same schedule as [`train_federated`] on a single dataset.
pub fn train_centralized(data: &ClientDataset, weights: &WeightTable, cfg: &TrainConfig) -> Result<GlobalModel> {
    cfg.validate()?;
    let mut model = GlobalModel::zeros(data.dim());
    for round in 0..cfg.rounds {
        model = local_train(&model, data, weights, cfg, round)?.0;
    }
    Ok(model)
}

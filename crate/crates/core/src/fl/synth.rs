use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::data::ClientDataset;

/// Generator settings for a biased cross-device federation.
///
/// Privileged clients (s = 1) draw positives at `base_rate + bias_gap / 2`,
/// the rest at `base_rate - bias_gap / 2`. Feature `f1` separates the labels
/// (less well for the unprivileged group as the gap grows), `f2` leaks group
/// membership, and the remaining features are noise.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthParams {
    pub clients: usize,
    pub samples: usize,
    pub features: usize,
    /// Probability that a client belongs to the privileged group.
    pub privileged_fraction: f64,
    pub base_rate: f64,
    pub bias_gap: f64,
    /// Class mean offset of `f1` in the privileged group.
    pub separation: f64,
    /// Group mean offset of `f2`.
    pub proxy_strength: f64,
}

impl Default for SynthParams {
    fn default() -> Self {
        SynthParams {
            clients: 50,
            samples: 5000,
            features: 4,
            privileged_fraction: 0.5,
            base_rate: 0.5,
            bias_gap: 0.4,
            separation: 1.0,
            proxy_strength: 2.0,
        }
    }
}

impl SynthParams {
    pub fn validate(&self) -> Result<()> {
        if self.clients < 2 || self.samples < self.clients {
            return Err(Error::param(format!(
                "need at least 2 clients and one sample per client, got M={} N={}",
                self.clients, self.samples
            )));
        }
        if self.features < 2 {
            return Err(Error::param("need at least 2 features"));
        }
        if !(self.privileged_fraction > 0.0 && self.privileged_fraction < 1.0) {
            return Err(Error::param("privileged fraction must be in (0, 1)"));
        }
        let (hi, lo) = self.label_rates();
        if !(lo > 0.0 && hi < 1.0 && self.bias_gap >= 0.0) {
            return Err(Error::param(format!("label rates ({lo}, {hi}) outside (0, 1)")));
        }
        if !(self.separation.is_finite() && self.proxy_strength.is_finite()) {
            return Err(Error::param("separation and proxy strength must be finite"));
        }
        Ok(())
    }

    /// Positive rates `(privileged, unprivileged)`.
    pub fn label_rates(&self) -> (f64, f64) {
        (self.base_rate + self.bias_gap / 2.0, self.base_rate - self.bias_gap / 2.0)
    }
}

pub fn synth_biased_dataset(seed: u64, params: &SynthParams) -> Result<Vec<ClientDataset>> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = params.clients;
    let mut groups: Vec<u8> = (0..m).map(|_| u8::from(rng.gen_bool(params.privileged_fraction))).collect();
    // both groups must be present
    if groups.iter().all(|&g| g == groups[0]) {
        groups[m - 1] ^= 1;
    }
    let (rate_p, rate_u) = params.label_rates();
    let sep_u = params.separation * (1.0 - params.bias_gap / 2.0);

    let mut out = Vec::with_capacity(m);
    for (k, &s) in groups.iter().enumerate() {
        let n_k = params.samples / m + usize::from(k < params.samples % m);
        let (rate, sep) = if s == 1 { (rate_p, params.separation) } else { (rate_u, sep_u) };
        let mut features = Vec::with_capacity(n_k);
        let mut labels = Vec::with_capacity(n_k);
        for _ in 0..n_k {
            let y = u8::from(rng.gen_bool(rate));
            let mut noise = || -> f64 { StandardNormal.sample(&mut rng) };
            let mut x = Vec::with_capacity(params.features);
            x.push(sep * (2.0 * y as f64 - 1.0) + noise());
            x.push(params.proxy_strength * (2.0 * s as f64 - 1.0) + noise());
            for _ in 2..params.features {
                x.push(noise());
            }
            features.push(x);
            labels.push(y);
        }
        out.push(ClientDataset::new(k as u64, features, labels, vec![s; n_k])?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sizes_and_groups() {
        let p = SynthParams {
            clients: 7,
            samples: 100,
            ..SynthParams::default()
        };
        let fed = synth_biased_dataset(1, &p).unwrap();
        assert_eq!(fed.len(), 7);
        assert_eq!(fed.iter().map(ClientDataset::len).sum::<usize>(), 100);
        assert!(fed.iter().all(|c| c.group().is_ok()));
        assert_eq!(fed, synth_biased_dataset(1, &p).unwrap());
        assert_ne!(fed, synth_biased_dataset(2, &p).unwrap());
    }

    #[test]
    fn rejects_infeasible_parameters() {
        let bad = [
            SynthParams {
                clients: 1,
                ..SynthParams::default()
            },
            SynthParams {
                samples: 10,
                clients: 20,
                ..SynthParams::default()
            },
            SynthParams {
                bias_gap: 1.0,
                ..SynthParams::default()
            },
            SynthParams {
                privileged_fraction: 1.0,
                ..SynthParams::default()
            },
        ];
        for p in bad {
            assert!(synth_biased_dataset(0, &p).is_err());
        }
    }
}

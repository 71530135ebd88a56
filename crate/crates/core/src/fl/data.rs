use std::collections::BTreeMap;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fair::LocalCounts;

/// One client's local data. Rows of `features` line up with `labels` and
/// `sensitive`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClientDataset {
    pub id: u64,
    pub features: Vec<Vec<f64>>,
    pub labels: Vec<u8>,
    pub sensitive: Vec<u8>,
}

impl ClientDataset {
    pub fn new(id: u64, features: Vec<Vec<f64>>, labels: Vec<u8>, sensitive: Vec<u8>) -> Result<Self> {
        let n = features.len();
        if n == 0 {
            return Err(Error::param(format!("client {id} has no samples")));
        }
        if labels.len() != n || sensitive.len() != n {
            return Err(Error::Dimension {
                expected: n,
                got: if labels.len() != n { labels.len() } else { sensitive.len() },
            });
        }
        let f = features[0].len();
        if let Some(row) = features.iter().find(|r| r.len() != f) {
            return Err(Error::Dimension {
                expected: f,
                got: row.len(),
            });
        }
        if labels.iter().chain(&sensitive).any(|&b| b > 1) {
            return Err(Error::param(format!("client {id}: labels and sensitive values must be 0/1")));
        }
        if features.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::param(format!("client {id}: non-finite feature")));
        }
        Ok(ClientDataset {
            id,
            features,
            labels,
            sensitive,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.features.first().map_or(0, Vec::len)
    }

    /// The client's single sensitive value.
    pub fn group(&self) -> Result<u8> {
        let s = *self.sensitive.first().ok_or_else(|| Error::param(format!("client {} has no samples", self.id)))?;
        if self.sensitive.iter().any(|&v| v != s) {
            return Err(Error::CrossDevice { client: self.id });
        }
        Ok(s)
    }

    fn subset(&self, idx: &[usize]) -> ClientDataset {
        ClientDataset {
            id: self.id,
            features: idx.iter().map(|&i| self.features[i].clone()).collect(),
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
            sensitive: idx.iter().map(|&i| self.sensitive[i]).collect(),
        }
    }
}

/// Group bit and label counts of one client.
pub fn local_counts(d: &ClientDataset) -> Result<LocalCounts> {
    let t = d.group()?;
    let lc1 = d.labels.iter().filter(|&&y| y == 1).count() as u64;
    Ok(LocalCounts {
        client: d.id,
        t,
        lc0: d.len() as u64 - lc1,
        lc1,
    })
}

/// Concatenation of all clients' samples as `(features, labels, sensitive)`.
pub fn pooled(clients: &[ClientDataset]) -> (Vec<Vec<f64>>, Vec<u8>, Vec<u8>) {
    let mut x = Vec::new();
    let mut y = Vec::new();
    let mut s = Vec::new();
    for c in clients {
        x.extend(c.features.iter().cloned());
        y.extend(&c.labels);
        s.extend(&c.sensitive);
    }
    (x, y, s)
}

/// Holds out `fraction` of the samples, stratified by (sensitive, label)
/// across the whole federation. Clients keep their held-out samples; those
/// left with no samples on a side are omitted from it.
pub fn stratified_split(
    clients: &[ClientDataset],
    fraction: f64,
    seed: u64,
) -> Result<(Vec<ClientDataset>, Vec<ClientDataset>)> {
    if !(0.0..1.0).contains(&fraction) {
        return Err(Error::param(format!("split fraction must be in [0, 1), got {fraction}")));
    }
    let mut strata: BTreeMap<(u8, u8), Vec<(usize, usize)>> = BTreeMap::new();
    for (c, d) in clients.iter().enumerate() {
        for i in 0..d.len() {
            strata.entry((d.sensitive[i], d.labels[i])).or_default().push((c, i));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut held = vec![vec![false; 0]; clients.len()];
    for (c, d) in clients.iter().enumerate() {
        held[c] = vec![false; d.len()];
    }
    for members in strata.values_mut() {
        members.shuffle(&mut rng);
        let k = (fraction * members.len() as f64).round() as usize;
        for &(c, i) in &members[..k] {
            held[c][i] = true;
        }
    }
    let mut train = Vec::new();
    let mut test = Vec::new();
    for (c, d) in clients.iter().enumerate() {
        let (a, b): (Vec<usize>, Vec<usize>) = (0..d.len()).partition(|&i| !held[c][i]);
        if !a.is_empty() {
            train.push(d.subset(&a));
        }
        if !b.is_empty() {
            test.push(d.subset(&b));
        }
    }
    Ok((train, test))
}

/// Writes the federation as CSV with columns `f1..fF, sensitive, label, client_id`.
pub fn save_csv(clients: &[ClientDataset], path: impl AsRef<Path>) -> Result<()> {
    let f = clients.first().map_or(0, ClientDataset::dim);
    let mut w = csv::Writer::from_path(path)?;
    let mut header: Vec<String> = (1..=f).map(|k| format!("f{k}")).collect();
    header.extend(["sensitive", "label", "client_id"].map(String::from));
    w.write_record(&header)?;
    for c in clients {
        if c.dim() != f {
            return Err(Error::Dimension {
                expected: f,
                got: c.dim(),
            });
        }
        for i in 0..c.len() {
            let mut row: Vec<String> = c.features[i].iter().map(|x| x.to_string()).collect();
            row.push(c.sensitive[i].to_string());
            row.push(c.labels[i].to_string());
            row.push(c.id.to_string());
            w.write_record(&row)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Reads a federation written in the [`save_csv`] layout. Clients come back
/// ordered by id; each must hold a single sensitive value.
pub fn load_csv(path: impl AsRef<Path>) -> Result<Vec<ClientDataset>> {
    let mut r = csv::Reader::from_path(path)?;
    let header = r.headers()?.clone();
    let col = |name: &str| {
        header
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| Error::Csv(format!("missing column {name}")))
    };
    let (ks, kl, kc) = (col("sensitive")?, col("label")?, col("client_id")?);
    let mut feat_cols = Vec::new();
    while let Ok(k) = col(&format!("f{}", feat_cols.len() + 1)) {
        feat_cols.push(k);
    }
    if feat_cols.is_empty() {
        return Err(Error::Csv("no feature columns f1..fF".into()));
    }

    let mut by_client: BTreeMap<u64, (Vec<Vec<f64>>, Vec<u8>, Vec<u8>)> = BTreeMap::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec?;
        let field = |k: usize| rec.get(k).unwrap_or("").trim();
        let bad = |what: &str| Error::Csv(format!("row {}: bad {what}", line + 2));
        let bit = |k: usize, what: &str| match field(k) {
            "0" => Ok(0u8),
            "1" => Ok(1u8),
            _ => Err(bad(what)),
        };
        let s = bit(ks, "sensitive")?;
        let y = bit(kl, "label")?;
        let id: u64 = field(kc).parse().map_err(|_| bad("client_id"))?;
        let x = feat_cols
            .iter()
            .map(|&k| field(k).parse::<f64>().map_err(|_| bad("feature")))
            .collect::<Result<Vec<_>>>()?;
        let e = by_client.entry(id).or_default();
        e.0.push(x);
        e.1.push(y);
        e.2.push(s);
    }
    let clients = by_client
        .into_iter()
        .map(|(id, (x, y, s))| ClientDataset::new(id, x, y, s))
        .collect::<Result<Vec<_>>>()?;
    for c in &clients {
        c.group()?;
    }
    Ok(clients)
}

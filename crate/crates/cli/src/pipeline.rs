use std::collections::BTreeMap;
use std::time::Instant;

use fairmpc::fair::{
    pi_roc, pi_rw, select_thresholds, ClientCountShares, RocCurve, RocOptions, RwOptions, ThresholdPair, WeightTable,
};
use fairmpc::fl::{
    apply_thresholds, local_counts, predict_proba, stratified_split, synth_biased_dataset, train_federated_logged,
    ClientDataset, GlobalModel, TrainConfig,
};
use fairmpc::metrics::FairnessReport;
use fairmpc::mpc::uplink::{Field, Form, UplinkLog};
use fairmpc::mpc::{CommStats, PrimitiveCounts, Session, SessionConfig, SharedVec};
use fairmpc::RingElement;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{DatasetSource, ExperimentConfig, RocData};
use crate::error::{HarnessError, HarnessResult, InPhase, Phase};

const MPC_STREAM: u64 = 0x6d70_635f_7365_7373;
const CLIENT_STREAM: u64 = 0x636c_6965_6e74_7321;
const VALIDATION_STREAM: u64 = 0x7661_6c69_6461_7465;

/// What crossed client boundaries and what the parties opened.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrivacyAudit {
    pub share_pair_uplinks: usize,
    pub cleartext_uplinks: usize,
    /// Cleartext uploads of sensitive values, labels, counts or predictions.
    pub cleartext_private_uplinks: usize,
    pub publications: BTreeMap<String, u64>,
    /// Labels opened outside the pipeline's publication points.
    pub undesignated_publications: Vec<String>,
    pub validation_peeks: u64,
    pub passed: bool,
}

impl PrivacyAudit {
    fn new(log: &UplinkLog, session: &Session, designated: &[&str]) -> Self {
        let count = |form: Form| log.transmissions.iter().filter(|t| t.form == form).count();
        let audit = session.audit();
        let undesignated: Vec<String> = audit
            .publications
            .keys()
            .filter(|k| !designated.contains(&k.as_str()))
            .cloned()
            .collect();
        let private = log.cleartext_private().len();
        PrivacyAudit {
            share_pair_uplinks: count(Form::SharePair),
            cleartext_uplinks: count(Form::Cleartext),
            cleartext_private_uplinks: private,
            publications: audit.publications.clone(),
            passed: private == 0 && undesignated.is_empty() && audit.validation_peeks == 0,
            undesignated_publications: undesignated,
            validation_peeks: audit.validation_peeks,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RocSummary {
    pub fit_samples: usize,
    pub points: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon_per_threshold: Option<f64>,
    /// Sequential composition over all thresholds.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon_all_thresholds: Option<f64>,
    /// TPR gap of the chosen pair on the published curves.
    pub published_tpr_gap: f64,
    /// Largest TPR step between adjacent thresholds on either curve.
    pub tpr_granularity: f64,
    /// Equal-opportunity difference on the fitting samples.
    pub fit_eop: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeedRecord {
    pub seed: u64,
    pub metrics: FairnessReport,
    pub train_samples: usize,
    pub test_samples: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weights: Option<WeightTable>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub thresholds: Option<ThresholdPair>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub roc: Option<RocSummary>,
    pub model: GlobalModel,
    pub comm: CommStats,
    pub phase_comm: BTreeMap<String, CommStats>,
    pub primitives: PrimitiveCounts,
    pub privacy: PrivacyAudit,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timings: Option<BTreeMap<String, f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub config: ExperimentConfig,
    pub seeds: Vec<SeedRecord>,
    pub mean: FairnessReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean_fit_eop: Option<f64>,
    pub privacy_passed: bool,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

fn stats_delta(after: &CommStats, before: &CommStats) -> CommStats {
    CommStats {
        rounds: after.rounds - before.rounds,
        bytes: after.bytes - before.bytes,
        messages: after.messages - before.messages,
    }
}

struct Clock {
    enabled: bool,
    phases: BTreeMap<String, f64>,
    last: Instant,
}

impl Clock {
    fn new(enabled: bool) -> Self {
        Clock {
            enabled,
            phases: BTreeMap::new(),
            last: Instant::now(),
        }
    }

    fn lap(&mut self, phase: Phase) {
        let now = Instant::now();
        *self.phases.entry(phase.to_string()).or_default() += (now - self.last).as_secs_f64();
        self.last = now;
    }

    fn finish(self) -> Option<BTreeMap<String, f64>> {
        self.enabled.then_some(self.phases)
    }
}

fn total_samples(clients: &[ClientDataset]) -> usize {
    clients.iter().map(|c| c.len()).sum()
}

/// Runs every seed of the experiment (in parallel) and aggregates.
pub fn run_pipeline(cfg: &ExperimentConfig) -> HarnessResult<RunReport> {
    cfg.validate()?;
    let loaded = match &cfg.dataset {
        DatasetSource::Csv { path } => Some(fairmpc::fl::load_csv(path).in_phase(Phase::Data)?),
        DatasetSource::Synthetic(_) => None,
    };
    let seeds = cfg
        .seeds
        .par_iter()
        .map(|&seed| run_seed(cfg, seed, loaded.as_deref()))
        .collect::<HarnessResult<Vec<_>>>()?;
    for r in &seeds {
        if !r.privacy.passed {
            return Err(HarnessError::Privacy(format!(
                "seed {}: {} private cleartext uplinks, undesignated publications {:?}, {} validation peeks",
                r.seed, r.privacy.cleartext_private_uplinks, r.privacy.undesignated_publications, r.privacy.validation_peeks
            )));
        }
    }
    let metrics: Vec<FairnessReport> = seeds.iter().map(|r| r.metrics).collect();
    let fit: Vec<f64> = seeds.iter().filter_map(|r| r.roc.as_ref().map(|x| x.fit_eop)).collect();
    Ok(RunReport {
        config: cfg.clone(),
        mean: FairnessReport::mean(&metrics).expect("at least one seed"),
        mean_fit_eop: (!fit.is_empty()).then(|| fit.iter().sum::<f64>() / fit.len() as f64),
        privacy_passed: true,
        seeds,
    })
}

/// One end-to-end run for a single seed.
pub fn run_seed(cfg: &ExperimentConfig, seed: u64, loaded: Option<&[ClientDataset]>) -> HarnessResult<SeedRecord> {
    let mut clock = Clock::new(cfg.timings);
    let federation = match (&cfg.dataset, loaded) {
        (_, Some(d)) => d.to_vec(),
        (DatasetSource::Synthetic(p), None) => synth_biased_dataset(seed, p).in_phase(Phase::Data)?,
        (DatasetSource::Csv { path }, None) => fairmpc::fl::load_csv(path).in_phase(Phase::Data)?,
    };
    let (train, test) = stratified_split(&federation, cfg.test_fraction, seed).in_phase(Phase::Data)?;
    let (fit_train, roc_set) = match cfg.roc_data {
        RocData::Train => (train.clone(), train),
        RocData::Validation => {
            stratified_split(&train, cfg.validation_fraction, seed ^ VALIDATION_STREAM).in_phase(Phase::Data)?
        }
    };
    if fit_train.is_empty() || test.is_empty() {
        return Err(HarnessError::config("split leaves no training or test samples"));
    }
    clock.lap(Phase::Data);

    let mut session = Session::new(SessionConfig {
        seed: seed ^ MPC_STREAM,
        mode: cfg.exec_mode,
        ..SessionConfig::default()
    });
    let mut log = UplinkLog::default();
    let mut client_rng = ChaCha8Rng::seed_from_u64(seed ^ CLIENT_STREAM);
    let mut phase_comm = BTreeMap::new();
    let mut designated = Vec::new();

    let weights = if cfg.pipeline.reweighs() {
        let before = *session.stats();
        let counts = fit_train.iter().map(local_counts).collect::<fairmpc::Result<Vec<_>>>().in_phase(Phase::Reweigh)?;
        let shares = ClientCountShares::from_clients(&counts, &mut log, &mut client_rng).in_phase(Phase::Reweigh)?;
        let opts = RwOptions {
            epsilon: cfg.epsilon,
            noise: cfg.noise,
        };
        let out = pi_rw(&mut session, &shares, opts).in_phase(Phase::Reweigh)?;
        phase_comm.insert(Phase::Reweigh.to_string(), stats_delta(session.stats(), &before));
        designated.push("weights");
        clock.lap(Phase::Reweigh);
        Some(out.weights)
    } else {
        None
    };

    let train_cfg = TrainConfig {
        seed: cfg.train.seed.wrapping_add(seed),
        ..cfg.train.clone()
    };
    let table = weights.unwrap_or_else(WeightTable::uniform);
    let model = train_federated_logged(&fit_train, &table, &train_cfg, &mut log).in_phase(Phase::Train)?;
    clock.lap(Phase::Train);

    let (thresholds, roc) = if cfg.pipeline.post_processes() {
        let before = *session.stats();
        let (pair, summary) = fit_thresholds(cfg, &mut session, &mut log, &mut client_rng, &model, &roc_set)?;
        phase_comm.insert(Phase::Roc.to_string(), stats_delta(session.stats(), &before));
        designated.push("roc");
        clock.lap(Phase::Roc);
        (Some(pair), Some(summary))
    } else {
        (None, None)
    };

    let (y, yhat, s) = classify(&model, &test, thresholds.as_ref()).in_phase(Phase::Evaluate)?;
    let metrics = FairnessReport::evaluate(&y, &yhat, &s, cfg.metric_flavor).in_phase(Phase::Evaluate)?;
    clock.lap(Phase::Evaluate);

    Ok(SeedRecord {
        seed,
        metrics,
        train_samples: total_samples(&fit_train),
        test_samples: total_samples(&test),
        weights,
        thresholds,
        roc,
        model,
        comm: *session.stats(),
        phase_comm,
        primitives: session.counts().clone(),
        privacy: PrivacyAudit::new(&log, &session, &designated),
        timings: clock.finish(),
    })
}

/// Pooled labels, decisions and groups. Without thresholds the cut is 0.5.
fn classify(
    model: &GlobalModel,
    clients: &[ClientDataset],
    thresholds: Option<&ThresholdPair>,
) -> fairmpc::Result<(Vec<u8>, Vec<u8>, Vec<u8>)> {
    let cut = thresholds.copied().unwrap_or(ThresholdPair { t_p: 0.5, t_u: 0.5 });
    let (mut y, mut yhat, mut s) = (Vec::new(), Vec::new(), Vec::new());
    for c in clients {
        let probs = predict_proba(model, &c.features)?;
        yhat.extend(apply_thresholds(&probs, c.group()?, &cut));
        y.extend_from_slice(&c.labels);
        s.extend_from_slice(&c.sensitive);
    }
    Ok((y, yhat, s))
}

fn max_tpr_step(r: &RocCurve) -> f64 {
    r.tpr.windows(2).map(|w| (w[0] - w[1]).abs()).fold(0.0, f64::max)
}

fn tpr_at(r: &RocCurve, t: f64) -> f64 {
    r.threshold.iter().position(|&x| x == t).map_or(f64::NAN, |i| r.tpr[i])
}

fn fit_thresholds(
    cfg: &ExperimentConfig,
    session: &mut Session,
    log: &mut UplinkLog,
    rng: &mut ChaCha8Rng,
    model: &GlobalModel,
    clients: &[ClientDataset],
) -> HarnessResult<(ThresholdPair, RocSummary)> {
    let codec = session.codec();
    let (mut ys, mut probs, mut sens) = (Vec::new(), Vec::new(), Vec::new());
    for c in clients {
        let p = predict_proba(model, &c.features).in_phase(Phase::Roc)?;
        let enc = p.iter().map(|&v| codec.encode(v)).collect::<fairmpc::Result<Vec<_>>>().in_phase(Phase::Roc)?;
        let labels: Vec<RingElement> = c.labels.iter().map(|&v| RingElement(v as u64)).collect();
        let group: Vec<RingElement> = c.sensitive.iter().map(|&v| RingElement(v as u64)).collect();
        ys.push(log.share_to_parties(c.id, Field::Label, &labels, rng));
        probs.push(log.share_to_parties(c.id, Field::Prediction, &enc, rng));
        sens.push(log.share_to_parties(c.id, Field::SensitiveAttribute, &group, rng));
    }
    let cat = |v: &[SharedVec]| SharedVec::concat(&v.iter().collect::<Vec<_>>());
    let opts = RocOptions {
        epsilon: cfg.epsilon,
        noise: cfg.noise,
        points: cfg.roc_points,
    };
    let shared = pi_roc(session, &cat(&ys), &cat(&probs), &cat(&sens), opts).in_phase(Phase::Roc)?;
    let published = shared.publish(session).in_phase(Phase::Roc)?;
    let pair = select_thresholds(&published.p, &published.u, cfg.tpr_gap_tol).in_phase(Phase::Roc)?;

    let (y, yhat, s) = classify(model, clients, Some(&pair)).in_phase(Phase::Roc)?;
    let fit = FairnessReport::evaluate(&y, &yhat, &s, cfg.metric_flavor).in_phase(Phase::Roc)?;
    let summary = RocSummary {
        fit_samples: y.len(),
        points: published.p.len(),
        epsilon_per_threshold: published.epsilon_per_threshold,
        epsilon_all_thresholds: published.epsilon_all_thresholds,
        published_tpr_gap: (tpr_at(&published.p, pair.t_p) - tpr_at(&published.u, pair.t_u)).abs(),
        tpr_granularity: max_tpr_step(&published.p).max(max_tpr_step(&published.u)),
        fit_eop: fit.eop,
    };
    Ok((pair, summary))
}

/// Writes the report as JSON to `cfg.out`, if set.
pub fn write_report(report: &RunReport) -> HarnessResult<()> {
    if let Some(path) = &report.config.out {
        std::fs::write(path, report.to_json())?;
    }
    Ok(())
}

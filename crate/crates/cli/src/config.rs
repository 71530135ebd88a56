use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use fairmpc::fair::{DEFAULT_TPR_GAP_TOL, ROC_POINTS};
use fairmpc::fl::{SynthParams, TrainConfig};
use fairmpc::metrics::MetricFlavor;
use fairmpc::mpc::ExecMode;
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, HarnessResult};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "lowercase")]
pub enum DatasetSource {
    /// Generated per seed.
    Synthetic(SynthParams),
    /// Loaded once; only the split varies with the seed.
    Csv { path: PathBuf },
}

impl Default for DatasetSource {
    fn default() -> Self {
        DatasetSource::Synthetic(SynthParams::default())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum Pipeline {
    #[default]
    #[serde(rename = "baseline")]
    Baseline,
    #[serde(rename = "pre")]
    Pre,
    #[serde(rename = "post")]
    Post,
    #[serde(rename = "pre+post")]
    PrePost,
}

impl Pipeline {
    pub const ALL: [Pipeline; 4] = [Pipeline::Baseline, Pipeline::Pre, Pipeline::Post, Pipeline::PrePost];

    pub fn reweighs(self) -> bool {
        matches!(self, Pipeline::Pre | Pipeline::PrePost)
    }

    pub fn post_processes(self) -> bool {
        matches!(self, Pipeline::Post | Pipeline::PrePost)
    }
}

impl fmt::Display for Pipeline {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Pipeline::Baseline => "baseline",
            Pipeline::Pre => "pre",
            Pipeline::Post => "post",
            Pipeline::PrePost => "pre+post",
        })
    }
}

impl FromStr for Pipeline {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Pipeline::ALL
            .into_iter()
            .find(|p| p.to_string() == s)
            .ok_or_else(|| format!("unknown pipeline '{s}' (expected baseline, pre, post or pre+post)"))
    }
}

/// Which samples the ROC protocol is fitted on.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RocData {
    /// The clients' own training samples.
    #[default]
    Train,
    /// A stratified slice held out of training.
    Validation,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dataset: DatasetSource,
    pub pipeline: Pipeline,
    pub epsilon: f64,
    pub noise: bool,
    pub seeds: Vec<u64>,
    pub out: Option<PathBuf>,
    pub train: TrainConfig,
    pub test_fraction: f64,
    pub roc_data: RocData,
    pub validation_fraction: f64,
    pub roc_points: usize,
    pub tpr_gap_tol: f64,
    pub metric_flavor: MetricFlavor,
    pub exec_mode: ExecMode,
    /// Wall-clock per phase; off by default so reports stay byte-identical.
    pub timings: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            dataset: DatasetSource::default(),
            pipeline: Pipeline::Baseline,
            epsilon: 1.0,
            noise: true,
            seeds: vec![0, 1, 2],
            out: None,
            train: TrainConfig::default(),
            test_fraction: 0.2,
            roc_data: RocData::Train,
            validation_fraction: 0.2,
            roc_points: ROC_POINTS,
            tpr_gap_tol: DEFAULT_TPR_GAP_TOL,
            metric_flavor: MetricFlavor::Standard,
            exec_mode: ExecMode::Lockstep,
            timings: false,
        }
    }
}

/// Command-line values that take precedence over the file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub pipeline: Option<Pipeline>,
    pub epsilon: Option<f64>,
    pub no_noise: bool,
    pub seeds: Option<Vec<u64>>,
    pub out: Option<PathBuf>,
    pub timings: bool,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> HarnessResult<Self> {
        toml::from_str(text).map_err(|e| HarnessError::config(e.to_string()))
    }

    pub fn load(path: &Path) -> HarnessResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn apply(&mut self, o: Overrides) {
        if let Some(p) = o.pipeline {
            self.pipeline = p;
        }
        if let Some(e) = o.epsilon {
            self.epsilon = e;
        }
        if o.no_noise {
            self.noise = false;
        }
        if let Some(s) = o.seeds {
            self.seeds = s;
        }
        if o.out.is_some() {
            self.out = o.out;
        }
        if o.timings {
            self.timings = true;
        }
    }

    pub fn validate(&self) -> HarnessResult<()> {
        let bad = |m: String| Err(HarnessError::Config(m));
        if self.seeds.is_empty() {
            return bad("at least one seed is required".into());
        }
        if self.noise && !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return bad(format!("epsilon must be positive when noise is on, got {}", self.epsilon));
        }
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return bad(format!("test_fraction must be in (0, 1), got {}", self.test_fraction));
        }
        if self.roc_data == RocData::Validation && !(self.validation_fraction > 0.0 && self.validation_fraction < 1.0) {
            return bad(format!("validation_fraction must be in (0, 1), got {}", self.validation_fraction));
        }
        if self.roc_points < 2 {
            return bad(format!("roc_points must be at least 2, got {}", self.roc_points));
        }
        if !(self.tpr_gap_tol.is_finite() && self.tpr_gap_tol >= 0.0) {
            return bad(format!("tpr_gap_tol must be non-negative, got {}", self.tpr_gap_tol));
        }
        self.train.validate().map_err(|e| HarnessError::config(e.to_string()))?;
        if let DatasetSource::Synthetic(p) = &self.dataset {
            p.validate().map_err(|e| HarnessError::config(e.to_string()))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_is_default() {
        assert_eq!(ExperimentConfig::from_toml("").unwrap(), ExperimentConfig::default());
    }

    #[test]
    fn pipeline_names_round_trip() {
        for p in Pipeline::ALL {
            assert_eq!(p.to_string().parse::<Pipeline>().unwrap(), p);
        }
        assert!("both".parse::<Pipeline>().is_err());
    }
}

//! Experiment harness: end-to-end pipelines over a simulated federation,
//! primitive benchmarks and synthetic data export.

pub mod bench;
pub mod config;
pub mod error;
pub mod pipeline;

use std::path::Path;

use fairmpc::fl::{save_csv, synth_biased_dataset, SynthParams};

pub use bench::{bench_mpc, BenchRecord, Primitive};
pub use config::{DatasetSource, ExperimentConfig, Overrides, Pipeline, RocData};
pub use error::{HarnessError, HarnessResult, Phase};
pub use pipeline::{run_pipeline, run_seed, write_report, PrivacyAudit, RocSummary, RunReport, SeedRecord};

use error::InPhase;

/// Writes a synthetic federation to `out` as CSV. Returns the row count.
pub fn gen_data(params: &SynthParams, seed: u64, out: &Path) -> HarnessResult<usize> {
    params.validate().map_err(|e| HarnessError::config(e.to_string()))?;
    let fed = synth_biased_dataset(seed, params).in_phase(Phase::Data)?;
    save_csv(&fed, out).in_phase(Phase::Data)?;
    Ok(fed.iter().map(|c| c.len()).sum())
}

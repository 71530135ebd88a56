//! Cross-device federated learning of a logistic model: every client holds
//! samples of a single sensitive group and trains locally; the server
//! averages parameters.

mod data;
mod model;
mod synth;

pub use data::{load_csv, local_counts, pooled, save_csv, stratified_split, ClientDataset};
pub use model::{
    apply_thresholds, fedavg, local_train, predict_proba, train_centralized, train_federated, train_federated_logged,
    weighted_gradient,
    weighted_loss, GlobalModel, TrainConfig,
};
pub use synth::{synth_biased_dataset, SynthParams};

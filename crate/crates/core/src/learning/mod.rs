//! Neural-network dynamics models: data collection, in-repo backprop
//! training, and checkpoints.

mod collect;
mod dataset;
mod features;
mod mlp;
mod model;
mod train;

pub use collect::{collect_dataset, CollectConfig};
pub use dataset::{Split, Transition, TransitionDataset, MIN_TRAIN_ROWS};
pub use features::FeatureMap;
pub use mlp::{Gradients, Layer, Mlp, Normalizer};
pub use model::{LearnedModel, CHECKPOINT_FORMAT, CHECKPOINT_VERSION};
pub use train::{train, train_mlp, EpochLoss, TrainConfig, TrainOutcome};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum LearningError {
    #[error("shape error: {0}")]
    Shape(String),
    #[error("dataset error: {0}")]
    Dataset(String),
    #[error("invalid hyperparameters: {0}")]
    Hyperparams(String),
    #[error("training diverged at epoch {epoch} (loss {loss})")]
    Diverged { epoch: usize, loss: f64 },
    #[error("checkpoint error: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

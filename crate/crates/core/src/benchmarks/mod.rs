//! Closed-loop benchmark harness: scenarios, episodes, metrics, campaigns
//! and file exports.

mod campaign;
mod episode;
mod experiment;
mod export;
mod metrics;
mod track;

pub use campaign::{run_campaign, run_comparison, Campaign, MetricSummary, SummaryRow};
pub use episode::{run_episode, EpisodeTrace, TraceStep, PENDULUM_SUCCESS_WINDOW};
pub use experiment::{
    ControllerModel, ExperimentConfig, ModelKind, ModelSection, PlantConfig, Scenario, ScenarioSection, TaskKind,
    TaskSetup,
};
pub use export::{write_campaign_csv, write_summary_json, write_trace_csv, write_trace_file};
pub use metrics::{chattering_index, total_variation, EpisodeMetrics};
pub use track::{build_circuit, build_track, Circuit, CornerSpan, TrackSpec, CORNER_COUNT};

use thiserror::Error;

use crate::config::ConfigError;
use crate::controllers::ControlError;
use crate::costs::CostError;
use crate::dynamics::DynamicsError;
use crate::learning::LearningError;

#[derive(Debug, Error)]
pub enum BenchmarkError {
    #[error("invalid experiment: {0}")]
    Config(String),
    #[error(transparent)]
    File(#[from] ConfigError),
    #[error(transparent)]
    Cost(#[from] CostError),
    #[error(transparent)]
    Control(#[from] ControlError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Learning(#[from] LearningError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

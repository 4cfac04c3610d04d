//! Per-episode metrics. Everything here is a pure function of the trace.

use serde::{Deserialize, Serialize};

use super::episode::EpisodeTrace;
use super::experiment::TaskKind;
use crate::controllers::ControllerKind;
use crate::dynamics::VehicleState;

/// Chattering index per action dimension and in aggregate:
/// `C = 1/(N−1) Σ ‖a_t − a_{t−1}‖²`. Zero for fewer than two actions.
pub fn chattering_index(actions: &[Vec<f64>]) -> (Vec<f64>, f64) {
    let m = actions.first().map_or(0, Vec::len);
    let mut per_dim = vec![0.0; m];
    if actions.len() < 2 {
        return (per_dim, 0.0);
    }
    for w in actions.windows(2) {
        for j in 0..m {
            let d = w[1][j] - w[0][j];
            per_dim[j] += d * d;
        }
    }
    let scale = 1.0 / (actions.len() - 1) as f64;
    per_dim.iter_mut().for_each(|c| *c *= scale);
    let total = per_dim.iter().sum();
    (per_dim, total)
}

/// `Σ_t Σ_j |a_t,j − a_{t−1},j|`.
pub fn total_variation(actions: &[Vec<f64>]) -> f64 {
    actions.windows(2).map(|w| w[1].iter().zip(&w[0]).map(|(a, b)| (a - b).abs()).sum::<f64>()).sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeMetrics {
    pub controller: ControllerKind,
    pub seed: u64,
    pub steps: usize,
    /// Sum of per-step task state costs times `dt`.
    pub total_cost: f64,
    pub success: bool,
    pub chattering: f64,
    pub chattering_per_dim: Vec<f64>,
    pub total_variation: f64,
    pub max_slip: Option<f64>,
    pub lap_time: Option<f64>,
    pub laps_completed: Option<usize>,
    pub lane_violations: Option<usize>,
    pub failure: Option<String>,
}

impl EpisodeMetrics {
    pub fn from_trace(trace: &EpisodeTrace) -> Self {
        let actions: Vec<Vec<f64>> = trace.steps.iter().map(|s| s.action.clone()).collect();
        let (per_dim, chattering) = chattering_index(&actions);
        let vehicle = trace.task == TaskKind::Vehicle;
        Self {
            controller: trace.controller,
            seed: trace.seed,
            steps: trace.steps.len(),
            total_cost: trace.steps.iter().map(|s| s.cost).sum::<f64>() * trace.dt,
            success: trace.success(),
            chattering,
            chattering_per_dim: per_dim,
            total_variation: total_variation(&actions),
            max_slip: vehicle.then(|| {
                trace.steps.iter().map(|s| s.state[VehicleState::SLIP].abs()).fold(0.0, f64::max)
            }),
            lap_time: trace.lap_times.first().copied(),
            laps_completed: vehicle.then_some(trace.lap_times.len()),
            lane_violations: vehicle.then(|| trace.lane_violations()),
            failure: trace.failure.clone(),
        }
    }
}

//! Trajectory cost terms: task state costs, the sampling control cost and
//! the action-smoothness penalty.

mod track;

pub use track::{Projection, Track, Waypoint};

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::VehicleState;
use crate::types::wrap_angle;

#[derive(Debug, Error)]
pub enum CostError {
    #[error("track error: {0}")]
    Track(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Breakdown of one rollout's total cost. `total` may be `+inf`, never NaN.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CostTerms {
    pub state_cost: f64,
    pub terminal_cost: f64,
    pub control_cost: f64,
    pub action_cost: f64,
}

impl CostTerms {
    pub fn total(&self) -> f64 {
        self.state_cost + self.terminal_cost + self.control_cost + self.action_cost
    }
}

/// Running and terminal state costs for one task.
///
/// `cursor` carries per-rollout lookup state (e.g. the last track segment)
/// between consecutive calls along one trajectory.
pub trait TaskCost: Send + Sync {
    fn init_cursor(&self, _state: &[f64]) -> usize {
        0
    }

    fn stage_cost(&self, state: &[f64], cursor: &mut usize) -> f64;

    fn terminal_cost(&self, state: &[f64], cursor: &mut usize) -> f64;
}

/// `γ Σ_t u_tᵀ Σ⁻¹ (u_t + ε_t)` over a row-major `T×m` horizon.
pub fn control_cost(nominal: &[f64], noise: &[f64], covariance: &[f64], gamma: f64) -> f64 {
    if gamma == 0.0 {
        return 0.0;
    }
    let m = covariance.len();
    let mut acc = 0.0;
    for (i, (u, e)) in nominal.iter().zip(noise).enumerate() {
        acc += u * (u + e) / covariance[i % m];
    }
    gamma * acc
}

/// `Σ_t (a_t − a_{t−1})ᵀ Ω (a_t − a_{t−1})` with `a_{−1} = a_prev`.
pub fn action_smoothness_cost(actions: &[f64], a_prev: &[f64], weights: &[f64]) -> f64 {
    let m = weights.len();
    if m == 0 {
        return 0.0;
    }
    let mut acc = 0.0;
    let mut prev = a_prev;
    for row in actions.chunks(m) {
        for d in 0..m {
            let diff = row[d] - prev[d];
            acc += weights[d] * diff * diff;
        }
        prev = row;
    }
    acc
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PendulumCost {
    pub angle_weight: f64,
    pub velocity_weight: f64,
    /// Multiplier on the state cost at the end of the horizon.
    pub terminal_weight: f64,
}

impl Default for PendulumCost {
    fn default() -> Self {
        Self { angle_weight: 1.0, velocity_weight: 0.1, terminal_weight: 0.0 }
    }
}

impl PendulumCost {
    /// `w_θ·wrap(θ − π)² + w_ω·ω²`, zero at the upright equilibrium.
    pub fn state_cost(&self, state: &[f64]) -> f64 {
        let e = wrap_angle(state[0] - std::f64::consts::PI);
        self.angle_weight * e * e + self.velocity_weight * state[1] * state[1]
    }
}

impl TaskCost for PendulumCost {
    fn stage_cost(&self, state: &[f64], _cursor: &mut usize) -> f64 {
        self.state_cost(state)
    }

    fn terminal_cost(&self, state: &[f64], _cursor: &mut usize) -> f64 {
        self.terminal_weight * self.state_cost(state)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutOfBounds {
    /// Add this finite penalty per step outside the track.
    Penalty(f64),
    /// Mark the step cost as `+inf`.
    Infinite,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VehicleCostWeights {
    pub lateral: f64,
    pub speed: f64,
    pub slip: f64,
    pub heading: f64,
    pub terminal: f64,
    pub out_of_bounds: OutOfBounds,
}

impl Default for VehicleCostWeights {
    fn default() -> Self {
        Self { lateral: 1.0, speed: 1.0, slip: 100.0, heading: 10.0, terminal: 0.0, out_of_bounds: OutOfBounds::Penalty(1e6) }
    }
}

/// Track-following cost around a reference speed.
#[derive(Debug, Clone)]
pub struct VehicleCost {
    pub track: Arc<Track>,
    pub reference_speed: f64,
    pub weights: VehicleCostWeights,
}

impl VehicleCost {
    pub fn new(track: Arc<Track>, reference_speed: f64, weights: VehicleCostWeights) -> Self {
        Self { track, reference_speed, weights }
    }

    /// State cost with an explicit projection hint.
    pub fn state_cost(&self, state: &[f64], hint: Option<usize>) -> (f64, Projection) {
        let v = VehicleState::from_slice(state);
        let p = self.track.project(v.x, v.y, hint);
        let w = &self.weights;
        let dv = v.speed - self.reference_speed;
        let head = self.track.heading_error(&p, v.yaw);
        let mut cost =
            w.lateral * p.lateral * p.lateral + w.speed * dv * dv + w.slip * v.slip * v.slip + w.heading * head * head;
        if !p.inside() {
            cost = match w.out_of_bounds {
                OutOfBounds::Penalty(pen) => cost + pen,
                OutOfBounds::Infinite => f64::INFINITY,
            };
        }
        (cost, p)
    }
}

impl TaskCost for VehicleCost {
    fn init_cursor(&self, state: &[f64]) -> usize {
        self.track.project(state[VehicleState::X], state[VehicleState::Y], None).segment
    }

    fn stage_cost(&self, state: &[f64], cursor: &mut usize) -> f64 {
        let (c, p) = self.state_cost(state, Some(*cursor));
        *cursor = p.segment;
        c
    }

    fn terminal_cost(&self, state: &[f64], cursor: &mut usize) -> f64 {
        if self.weights.terminal == 0.0 {
            return 0.0;
        }
        self.weights.terminal * self.stage_cost(state, cursor)
    }
}

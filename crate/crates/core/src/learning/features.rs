//! Task-specific maps between raw `(state, action)` rows and network
//! inputs/targets.

use serde::{Deserialize, Serialize};

use crate::dynamics::VehicleState;

/// How states and actions are presented to the network and how its output is
/// turned back into a next state.
///
/// * `Identity`: input `[state, action]`, target `delta`.
/// * `Pendulum`: input `[sin θ, cos θ, ω, τ]`, target `[Δθ, Δω]`.
/// * `Vehicle`: input `[vx, r, β, δ, throttle]`, target is the delta with the
///   position increment expressed in the body frame. Pose never enters the
///   input, so the learned model is invariant to rigid motions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureMap {
    Identity,
    Pendulum,
    Vehicle,
}

impl FeatureMap {
    pub fn input_dim(self, state_dim: usize, action_dim: usize) -> usize {
        match self {
            FeatureMap::Identity => state_dim + action_dim,
            FeatureMap::Pendulum => 4,
            FeatureMap::Vehicle => 5,
        }
    }

    pub fn output_dim(self, state_dim: usize) -> usize {
        state_dim
    }

    pub fn inputs_into(self, state: &[f64], action: &[f64], out: &mut [f64]) {
        match self {
            FeatureMap::Identity => {
                out[..state.len()].copy_from_slice(state);
                out[state.len()..].copy_from_slice(action);
            }
            FeatureMap::Pendulum => {
                let (s, c) = state[0].sin_cos();
                out[0] = s;
                out[1] = c;
                out[2] = state[1];
                out[3] = action[0];
            }
            FeatureMap::Vehicle => {
                out[0] = state[VehicleState::SPEED];
                out[1] = state[VehicleState::YAW_RATE];
                out[2] = state[VehicleState::SLIP];
                out[3] = action[0];
                out[4] = action[1];
            }
        }
    }

    pub fn inputs(self, state: &[f64], action: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.input_dim(state.len(), action.len())];
        self.inputs_into(state, action, &mut out);
        out
    }

    /// Network target for a recorded `delta = x' - x`.
    pub fn target(self, state: &[f64], delta: &[f64]) -> Vec<f64> {
        let mut t = delta.to_vec();
        if self == FeatureMap::Vehicle {
            let (s, c) = state[VehicleState::YAW].sin_cos();
            t[0] = c * delta[0] + s * delta[1];
            t[1] = -s * delta[0] + c * delta[1];
        }
        t
    }

    /// Converts a network output into the world-frame delta, in place.
    pub fn output_to_delta(self, state: &[f64], out: &mut [f64]) {
        if self == FeatureMap::Vehicle {
            let (s, c) = state[VehicleState::YAW].sin_cos();
            let (bx, by) = (out[0], out[1]);
            out[0] = c * bx - s * by;
            out[1] = s * bx + c * by;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vehicle_target_round_trip() {
        let state = [3.0, 4.0, 0.9, 10.0, 0.1, 0.01];
        let delta = [0.4, -0.2, 0.005, 0.1, -0.01, 0.0];
        let mut t = FeatureMap::Vehicle.target(&state, &delta);
        FeatureMap::Vehicle.output_to_delta(&state, &mut t);
        for (a, b) in t.iter().zip(&delta) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn pendulum_inputs_are_periodic() {
        let a = FeatureMap::Pendulum.inputs(&[0.3, 1.0], &[0.5]);
        let b = FeatureMap::Pendulum.inputs(&[0.3 + std::f64::consts::TAU, 1.0], &[0.5]);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-12);
        }
    }
}

//! Closed-loop episodes: plant state → controller step → plant update.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::experiment::{ControllerModel, Scenario, TaskKind, TaskSetup};
use super::BenchmarkError;
use crate::controllers::{build_controller, ControllerKind, SolverDiagnostics};
use crate::costs::{PendulumCost, TaskCost, VehicleCost};
use crate::dynamics::{BicycleModel, DynamicsModel, PendulumModel, VehicleState};
use crate::rng::derive_seed;

/// Duration (s) at the end of a pendulum episode over which the state must
/// stay balanced.
pub const PENDULUM_SUCCESS_WINDOW: f64 = 1.0;
const PENDULUM_ANGLE_TOL: f64 = 0.1;
const PENDULUM_RATE_TOL: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceStep {
    pub t: f64,
    pub state: Vec<f64>,
    pub action: Vec<f64>,
    /// Task state cost of `state`.
    pub cost: f64,
    pub diagnostics: SolverDiagnostics,
    /// Signed distance to the centerline (vehicle).
    pub lateral: Option<f64>,
    /// Cumulative arc-length progress at `t` (vehicle).
    pub progress: Option<f64>,
    /// Surface friction under the vehicle (vehicle).
    pub friction: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeTrace {
    pub task: TaskKind,
    pub controller: ControllerKind,
    pub seed: u64,
    pub dt: f64,
    pub steps: Vec<TraceStep>,
    pub final_state: Vec<f64>,
    /// Set when the plant diverged and the episode ended early.
    pub failure: Option<String>,
    pub laps_target: Option<usize>,
    pub lap_length: Option<f64>,
    /// Half width of the lane at each step (vehicle), for violation counts.
    pub half_widths: Vec<f64>,
    /// Completion time of each lap (vehicle).
    pub lap_times: Vec<f64>,
}

impl EpisodeTrace {
    /// Pendulum: balanced over the final window. Vehicle: all laps done and
    /// never outside the lane.
    pub fn success(&self) -> bool {
        if self.failure.is_some() {
            return false;
        }
        match self.task {
            TaskKind::Pendulum => {
                let end = self.steps.len() as f64 * self.dt;
                let balanced = |s: &[f64]| {
                    crate::types::wrap_angle(s[0] - std::f64::consts::PI).abs() < PENDULUM_ANGLE_TOL
                        && s[1].abs() < PENDULUM_RATE_TOL
                };
                self.steps.iter().filter(|st| st.t >= end - PENDULUM_SUCCESS_WINDOW - 1e-9).all(|st| balanced(&st.state))
                    && balanced(&self.final_state)
            }
            TaskKind::Vehicle => {
                self.lap_times.len() >= self.laps_target.unwrap_or(1) && self.lane_violations() == 0
            }
        }
    }

    /// Steps with the vehicle outside the lane.
    pub fn lane_violations(&self) -> usize {
        self.steps
            .iter()
            .zip(&self.half_widths)
            .filter(|(s, hw)| s.lateral.is_some_and(|l| l.abs() > **hw))
            .count()
    }
}

fn seeded(cfg: &crate::config::SolverConfig, seed: u64) -> crate::config::SolverConfig {
    crate::config::SolverConfig { seed: derive_seed(cfg.seed, seed), ..cfg.clone() }
}

/// Runs one closed-loop episode. Plant divergence ends the episode with a
/// failure flag; configuration and controller errors are returned.
pub fn run_episode(scenario: &Scenario, seed: u64) -> Result<EpisodeTrace, BenchmarkError> {
    scenario.validate()?;
    let dt = scenario.dt();
    let mut controller = build_controller(
        scenario.controller,
        &seeded(&scenario.mppi, seed),
        &seeded(&scenario.smppi, seed),
        &scenario.filters,
    )?;
    controller.set_exec_mode(scenario.exec);
    let n_steps = (scenario.episode_length / dt).round() as usize;

    match &scenario.task {
        TaskSetup::Pendulum { params, cost, initial } => {
            let plant = PendulumModel::new(params.clone(), dt, scenario.plant_substeps)?;
            let analytic;
            let model: &dyn DynamicsModel = match &scenario.model {
                ControllerModel::Analytic { substeps } => {
                    analytic = PendulumModel::new(params.clone(), dt, *substeps)?;
                    &analytic
                }
                ControllerModel::Learned(m) => m.as_ref(),
            };
            let mut trace = empty_trace(scenario, seed, None, None);
            let mut x = initial.clone();
            for i in 0..n_steps {
                let out = controller.step(&x, model, cost)?;
                trace.steps.push(TraceStep {
                    t: i as f64 * dt,
                    state: x.clone(),
                    action: out.action.clone(),
                    cost: PendulumCost::state_cost(cost, &x),
                    diagnostics: out.diagnostics,
                    lateral: None,
                    progress: None,
                    friction: None,
                });
                match plant.step(&x, &out.action) {
                    Ok(next) => x = next,
                    Err(e) => {
                        trace.failure = Some(e.to_string());
                        break;
                    }
                }
            }
            trace.final_state = x;
            Ok(trace)
        }
        TaskSetup::Vehicle { params, weights, track, reference_speed, laps, initial, model_friction } => {
            let cost = VehicleCost::new(Arc::clone(track), *reference_speed, weights.clone());
            let plant = BicycleModel::new(params.clone(), dt, scenario.plant_substeps)?;
            let analytic;
            let model: &dyn DynamicsModel = match &scenario.model {
                ControllerModel::Analytic { substeps } => {
                    analytic = BicycleModel::new(params.with_friction(*model_friction), dt, *substeps)?;
                    &analytic
                }
                ControllerModel::Learned(m) => m.as_ref(),
            };
            let length = track.length();
            let mut trace = empty_trace(scenario, seed, Some(*laps), Some(length));
            let mut x = initial.clone();
            let mut hint = cost.init_cursor(&x);
            let mut progress = 0.0;
            let mut last_s = track.project(x[VehicleState::X], x[VehicleState::Y], Some(hint)).s;
            for i in 0..n_steps {
                let t = i as f64 * dt;
                let (c, p) = cost.state_cost(&x, Some(hint));
                hint = p.segment;
                progress += track.progress(last_s, p.s);
                last_s = p.s;
                if progress >= (trace.lap_times.len() + 1) as f64 * length {
                    trace.lap_times.push(t);
                    if trace.lap_times.len() >= *laps {
                        break;
                    }
                }
                let out = controller.step(&x, model, &cost)?;
                trace.steps.push(TraceStep {
                    t,
                    state: x.clone(),
                    action: out.action.clone(),
                    cost: c,
                    diagnostics: out.diagnostics,
                    lateral: Some(p.lateral),
                    progress: Some(progress),
                    friction: Some(p.mu),
                });
                trace.half_widths.push(p.half_width);
                match plant.with_friction(p.mu).step(&x, &out.action) {
                    Ok(next) => x = next,
                    Err(e) => {
                        trace.failure = Some(e.to_string());
                        break;
                    }
                }
            }
            trace.final_state = x;
            Ok(trace)
        }
    }
}

fn empty_trace(scenario: &Scenario, seed: u64, laps: Option<usize>, lap_length: Option<f64>) -> EpisodeTrace {
    EpisodeTrace {
        task: scenario.task.kind(),
        controller: scenario.controller,
        seed,
        dt: scenario.dt(),
        steps: Vec::new(),
        final_state: Vec::new(),
        failure: None,
        laps_target: laps,
        lap_length,
        half_widths: Vec::new(),
        lap_times: Vec::new(),
    }
}

use super::engine::rollout_cost;
use super::{check_inputs, compute_weights, ControlError, Controller, SolverDiagnostics, StepOutput};
use crate::config::SolverConfig;
use crate::costs::{action_smoothness_cost, control_cost, TaskCost};
use crate::dynamics::DynamicsModel;
use crate::parallel::{self, ExecMode};
use crate::rng::NoiseBatch;
use crate::types::{shift_rows, Bounds};

/// Lifts a derivative sequence into actions: `a_t = clamp(a_{t-1} + u_t·dt)`
/// with `a_{-1} = a_seam`. Clamping happens inside the loop, so integration
/// continues from the saturated value.
pub fn integrate_controls(a_seam: &[f64], controls: &[f64], dt: f64, bounds: &Bounds) -> Vec<f64> {
    let m = a_seam.len();
    let mut out = vec![0.0; controls.len()];
    integrate_controls_into(a_seam, controls, dt, bounds, &mut out);
    debug_assert_eq!(controls.len() % m.max(1), 0);
    out
}

pub(crate) fn integrate_controls_into(a_seam: &[f64], controls: &[f64], dt: f64, bounds: &Bounds, out: &mut [f64]) {
    let m = a_seam.len();
    for (t, u) in controls.chunks(m).enumerate() {
        for d in 0..m {
            let prev = if t == 0 { a_seam[d] } else { out[(t - 1) * m + d] };
            out[t * m + d] = bounds.clamp_dim(d, prev + u[d] * dt);
        }
    }
}

/// Smooth MPPI: noise is injected into the time derivative of the action,
/// integrated into actions in every rollout, and action differences are
/// penalised inside the trajectory cost.
#[derive(Debug, Clone)]
pub struct Smppi {
    config: SolverConfig,
    action_bounds: Bounds,
    derivative_bounds: Bounds,
    std: Vec<f64>,
    omega: Vec<f64>,
    /// Nominal derivative sequence U.
    controls: Vec<f64>,
    /// Nominal action sequence A = integrate_controls(a_prev, U).
    actions: Vec<f64>,
    last_action: Vec<f64>,
    iteration: u64,
    exec: ExecMode,
}

impl Smppi {
    pub fn new(config: SolverConfig) -> Result<Self, ControlError> {
        config.validate()?;
        let action_bounds = config.action_bounds();
        let m = config.action_dim();
        let a0: Vec<f64> = (0..m).map(|d| action_bounds.clamp_dim(d, 0.0)).collect();
        let mut s = Self {
            std: config.noise_std(),
            omega: config.action_cost_weights(),
            derivative_bounds: config.derivative_bounds(),
            controls: vec![0.0; config.horizon * m],
            actions: Vec::new(),
            last_action: a0,
            action_bounds,
            iteration: 0,
            exec: ExecMode::default(),
            config,
        };
        s.relift();
        Ok(s)
    }

    pub fn with_exec_mode(mut self, exec: ExecMode) -> Self {
        self.exec = exec;
        self
    }

    /// Resets the seam (last executed action) and re-integrates the plan.
    pub fn set_last_action(&mut self, a: &[f64]) {
        self.last_action = a.to_vec();
        self.action_bounds.clamp_in_place(&mut self.last_action);
        self.relift();
    }

    pub fn set_controls(&mut self, controls: Vec<f64>) {
        assert_eq!(controls.len(), self.controls.len());
        self.controls = controls;
        self.derivative_bounds.clamp_in_place(&mut self.controls);
        self.relift();
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    pub fn controls(&self) -> &[f64] {
        &self.controls
    }

    pub fn actions(&self) -> &[f64] {
        &self.actions
    }

    pub fn last_action(&self) -> &[f64] {
        &self.last_action
    }

    pub fn iteration(&self) -> u64 {
        self.iteration
    }

    /// Re-integrates A from U. Where a bound was hit, U is replaced by the
    /// realised rate so the plan does not wind up past the bound; A is then
    /// integrated once more so it equals the lift of the stored U exactly.
    fn relift(&mut self) {
        let dt = self.config.dt;
        let m = self.last_action.len();
        let lifted = integrate_controls(&self.last_action, &self.controls, dt, &self.action_bounds);
        let mut saturated = false;
        for t in 0..self.config.horizon {
            for d in 0..m {
                let prev = if t == 0 { self.last_action[d] } else { lifted[(t - 1) * m + d] };
                let i = t * m + d;
                if lifted[i] != prev + self.controls[i] * dt {
                    self.controls[i] = (lifted[i] - prev) / dt;
                    saturated = true;
                }
            }
        }
        self.actions = if saturated {
            integrate_controls(&self.last_action, &self.controls, dt, &self.action_bounds)
        } else {
            lifted
        };
    }

    pub fn sample_noise(&self) -> NoiseBatch {
        NoiseBatch::sample(
            self.config.seed,
            self.iteration,
            self.config.samples,
            self.config.horizon,
            &self.std,
            self.exec,
        )
    }

    fn perturbed(&self, noise: &NoiseBatch, k: usize) -> Vec<f64> {
        let mut v: Vec<f64> = self.controls.iter().zip(noise.sample_slice(k)).map(|(u, e)| u + e).collect();
        self.derivative_bounds.clamp_in_place(&mut v);
        v
    }

    pub fn step_with_noise(
        &mut self,
        x0: &[f64],
        model: &dyn DynamicsModel,
        cost: &dyn TaskCost,
        noise: &NoiseBatch,
    ) -> Result<StepOutput, ControlError> {
        check_inputs(&self.config, x0, model, noise)?;
        let m = self.config.action_dim();
        let dt = self.config.dt;
        let gamma = self.config.control_cost_coefficient();
        let cov = &self.config.noise_covariance;
        let costs = parallel::map_indexed(noise.samples(), self.exec, |k| {
            let v = self.perturbed(noise, k);
            let eps: Vec<f64> = v.iter().zip(&self.controls).map(|(a, b)| a - b).collect();
            let lifted = integrate_controls(&self.last_action, &v, dt, &self.action_bounds);
            rollout_cost(model, cost, x0, &lifted)
                + control_cost(&self.controls, &eps, cov, gamma)
                + action_smoothness_cost(&lifted, &self.last_action, &self.omega)
        });

        let diagnostics = match compute_weights(&costs, self.config.temperature) {
            Ok(weights) => {
                let mut update = vec![0.0; self.controls.len()];
                for (k, w) in weights.iter().enumerate() {
                    if *w == 0.0 {
                        continue;
                    }
                    let v = self.perturbed(noise, k);
                    for ((acc, vi), ui) in update.iter_mut().zip(&v).zip(&self.controls) {
                        *acc += w * (vi - ui);
                    }
                }
                for (u, d) in self.controls.iter_mut().zip(&update) {
                    *u += d;
                }
                self.derivative_bounds.clamp_in_place(&mut self.controls);
                self.relift();
                SolverDiagnostics::from_batch(&costs, &weights)
            }
            Err(ControlError::DegenerateBatch) => SolverDiagnostics::degenerate(&costs),
            Err(e) => return Err(e),
        };

        let action = self.actions[..m].to_vec();
        self.last_action.copy_from_slice(&action);
        shift_rows(&mut self.controls, m);
        self.relift();
        self.iteration += 1;
        Ok(StepOutput { action, diagnostics })
    }
}

impl Controller for Smppi {
    fn name(&self) -> &str {
        "smppi"
    }

    fn step(&mut self, x0: &[f64], model: &dyn DynamicsModel, cost: &dyn TaskCost) -> Result<StepOutput, ControlError> {
        let noise = self.sample_noise();
        self.step_with_noise(x0, model, cost, &noise)
    }

    fn planned_actions(&self) -> Vec<f64> {
        self.actions.clone()
    }

    fn set_exec_mode(&mut self, exec: ExecMode) {
        self.exec = exec;
    }
}

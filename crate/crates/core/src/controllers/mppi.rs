use super::engine::rollout_cost;
use super::{check_inputs, compute_weights, ControlError, Controller, SolverDiagnostics, StepOutput};
use crate::config::SolverConfig;
use crate::costs::{control_cost, TaskCost};
use crate::dynamics::DynamicsModel;
use crate::filters::Smoother;
use crate::parallel::{self, ExecMode};
use crate::rng::NoiseBatch;
use crate::types::{shift_rows, Bounds};

/// Where an external smoothing filter is applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FilterInsertion {
    /// Smooth the nominal sequence right after the weighted update.
    #[default]
    Nominal,
    /// Smooth every sampled perturbation before it is rolled out.
    Noise,
}

/// Vanilla MPPI, optionally followed by an external smoothing filter.
#[derive(Debug, Clone)]
pub struct Mppi {
    config: SolverConfig,
    bounds: Bounds,
    std: Vec<f64>,
    nominal: Vec<f64>,
    iteration: u64,
    filter: Option<(Smoother, FilterInsertion)>,
    exec: ExecMode,
    name: String,
}

impl Mppi {
    pub fn new(config: SolverConfig) -> Result<Self, ControlError> {
        config.validate()?;
        let bounds = config.action_bounds();
        let m = config.action_dim();
        // start from the action closest to zero
        let init: Vec<f64> = (0..m).map(|d| bounds.clamp_dim(d, 0.0)).collect();
        let nominal = init.iter().copied().cycle().take(config.horizon * m).collect();
        Ok(Self {
            std: config.noise_std(),
            bounds,
            nominal,
            iteration: 0,
            filter: None,
            exec: ExecMode::default(),
            name: "mppi".into(),
            config,
        })
    }

    /// Adds an external smoothing filter at the given insertion point.
    pub fn with_filter(mut self, smoother: Smoother, insertion: FilterInsertion) -> Result<Self, ControlError> {
        smoother.validate()?;
        if let Smoother::SavitzkyGolay { window, .. } = smoother {
            if window > self.config.horizon {
                return Err(ControlError::Config(format!(
                    "filter window {window} longer than horizon {}",
                    self.config.horizon
                )));
            }
        }
        self.name = match smoother {
            Smoother::SavitzkyGolay { .. } => "mppi-sg".into(),
            Smoother::MovingAverage { .. } => "mppi-ma".into(),
        };
        self.filter = Some((smoother, insertion));
        Ok(self)
    }

    pub fn with_exec_mode(mut self, exec: ExecMode) -> Self {
        self.exec = exec;
        self
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    pub fn nominal(&self) -> &[f64] {
        &self.nominal
    }

    pub fn set_nominal(&mut self, nominal: Vec<f64>) {
        assert_eq!(nominal.len(), self.nominal.len());
        self.nominal = nominal;
    }

    pub fn iteration(&self) -> u64 {
        self.iteration
    }

    /// The perturbations the next call to [`Controller::step`] will use.
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

    /// Perturbed, filtered (insertion point `Noise`) and clamped sequence for
    /// sample `k`.
    fn perturbed(&self, noise: &NoiseBatch, k: usize) -> Result<Vec<f64>, ControlError> {
        let m = self.config.action_dim();
        let eps = match &self.filter {
            Some((f, FilterInsertion::Noise)) => f.apply(noise.sample_slice(k), m)?,
            _ => noise.sample_slice(k).to_vec(),
        };
        let mut v: Vec<f64> = self.nominal.iter().zip(&eps).map(|(u, e)| u + e).collect();
        self.bounds.clamp_in_place(&mut v);
        Ok(v)
    }

    /// One receding-horizon iteration on a given noise batch.
    pub fn step_with_noise(
        &mut self,
        x0: &[f64],
        model: &dyn DynamicsModel,
        cost: &dyn TaskCost,
        noise: &NoiseBatch,
    ) -> Result<StepOutput, ControlError> {
        check_inputs(&self.config, x0, model, noise)?;
        let m = self.config.action_dim();
        let gamma = self.config.control_cost_coefficient();
        let cov = &self.config.noise_covariance;
        let results = parallel::map_indexed(noise.samples(), self.exec, |k| -> Result<f64, ControlError> {
            let v = self.perturbed(noise, k)?;
            let ctrl = control_cost(&self.nominal, &eps_of(&v, &self.nominal), cov, gamma);
            Ok(rollout_cost(model, cost, x0, &v) + ctrl)
        });
        let costs: Vec<f64> = results.into_iter().collect::<Result<_, _>>()?;

        let diagnostics = match compute_weights(&costs, self.config.temperature) {
            Ok(weights) => {
                let mut update = vec![0.0; self.nominal.len()];
                for (k, w) in weights.iter().enumerate() {
                    if *w == 0.0 {
                        continue;
                    }
                    let v = self.perturbed(noise, k)?;
                    for ((acc, vi), ui) in update.iter_mut().zip(&v).zip(&self.nominal) {
                        *acc += w * (vi - ui);
                    }
                }
                for (u, d) in self.nominal.iter_mut().zip(&update) {
                    *u += d;
                }
                if let Some((f, FilterInsertion::Nominal)) = &self.filter {
                    self.nominal = f.apply(&self.nominal, m)?;
                }
                self.bounds.clamp_in_place(&mut self.nominal);
                SolverDiagnostics::from_batch(&costs, &weights)
            }
            Err(ControlError::DegenerateBatch) => SolverDiagnostics::degenerate(&costs),
            Err(e) => return Err(e),
        };

        let action = self.nominal[..m].to_vec();
        shift_rows(&mut self.nominal, m);
        self.iteration += 1;
        Ok(StepOutput { action, diagnostics })
    }
}

/// `v - u`, the effective (post-clamp) perturbation.
fn eps_of(v: &[f64], u: &[f64]) -> Vec<f64> {
    v.iter().zip(u).map(|(a, b)| a - b).collect()
}

impl Controller for Mppi {
    fn name(&self) -> &str {
        &self.name
    }

    fn step(&mut self, x0: &[f64], model: &dyn DynamicsModel, cost: &dyn TaskCost) -> Result<StepOutput, ControlError> {
        let noise = self.sample_noise();
        self.step_with_noise(x0, model, cost, &noise)
    }

    fn planned_actions(&self) -> Vec<f64> {
        self.nominal.clone()
    }

    fn set_exec_mode(&mut self, exec: ExecMode) {
        self.exec = exec;
    }
}

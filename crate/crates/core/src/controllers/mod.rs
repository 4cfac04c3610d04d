//! Sampling-based solvers sharing one rollout and weighting engine.

mod engine;
mod mppi;
mod smppi;
mod weights;

pub use engine::{rollout_cost, rollout_states};
pub use mppi::{FilterInsertion, Mppi};
pub use smppi::{integrate_controls, Smppi};
pub use weights::{compute_weights, SolverDiagnostics};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::{ConfigError, SolverConfig};
use crate::costs::TaskCost;
use crate::dynamics::DynamicsModel;
use crate::filters::{FilterError, Smoother};
use crate::parallel::ExecMode;
use crate::rng::NoiseBatch;

#[derive(Debug, Error)]
pub enum ControlError {
    #[error("every rollout in the batch diverged")]
    DegenerateBatch,
    #[error("controller configuration: {0}")]
    Config(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error(transparent)]
    Filter(#[from] FilterError),
}

impl From<ConfigError> for ControlError {
    fn from(e: ConfigError) -> Self {
        ControlError::Config(e.to_string())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutput {
    pub action: Vec<f64>,
    pub diagnostics: SolverDiagnostics,
}

/// A receding-horizon controller. One `step` per control period; callers
/// serialize access.
pub trait Controller: Send {
    fn name(&self) -> &str;

    fn step(&mut self, x0: &[f64], model: &dyn DynamicsModel, cost: &dyn TaskCost) -> Result<StepOutput, ControlError>;

    /// The current nominal action plan (row-major `T×m`).
    fn planned_actions(&self) -> Vec<f64>;

    fn set_exec_mode(&mut self, exec: ExecMode);
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ControllerKind {
    #[serde(rename = "mppi")]
    Mppi,
    #[serde(rename = "mppi-sg")]
    MppiSg,
    #[serde(rename = "mppi-ma")]
    MppiMa,
    #[serde(rename = "smppi")]
    Smppi,
}

impl ControllerKind {
    pub const ALL: [ControllerKind; 4] =
        [ControllerKind::Mppi, ControllerKind::MppiSg, ControllerKind::MppiMa, ControllerKind::Smppi];

    pub fn as_str(self) -> &'static str {
        match self {
            ControllerKind::Mppi => "mppi",
            ControllerKind::MppiSg => "mppi-sg",
            ControllerKind::MppiMa => "mppi-ma",
            ControllerKind::Smppi => "smppi",
        }
    }
}

impl fmt::Display for ControllerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ControllerKind {
    type Err = ControlError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| ControlError::Config(format!("unknown controller `{s}` (expected mppi, mppi-sg, mppi-ma or smppi)")))
    }
}

/// Parameters of the filtered baselines.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FilterSettings {
    pub sg_window: usize,
    pub sg_degree: usize,
    pub ma_window: usize,
    pub insertion: FilterInsertion,
}

impl Default for FilterSettings {
    fn default() -> Self {
        Self { sg_window: 9, sg_degree: 2, ma_window: 5, insertion: FilterInsertion::Nominal }
    }
}

/// Builds the requested solver variant.
///
/// `mppi_solver` configures the MPPI variants (noise in action space) and
/// `smppi_solver` the smooth variant (noise in derivative space).
pub fn build_controller(
    kind: ControllerKind,
    mppi_solver: &SolverConfig,
    smppi_solver: &SolverConfig,
    filters: &FilterSettings,
) -> Result<Box<dyn Controller>, ControlError> {
    Ok(match kind {
        ControllerKind::Mppi => Box::new(Mppi::new(mppi_solver.clone())?),
        ControllerKind::MppiSg => Box::new(Mppi::new(mppi_solver.clone())?.with_filter(
            Smoother::SavitzkyGolay { window: filters.sg_window, degree: filters.sg_degree },
            filters.insertion,
        )?),
        ControllerKind::MppiMa => Box::new(
            Mppi::new(mppi_solver.clone())?.with_filter(Smoother::MovingAverage { window: filters.ma_window }, filters.insertion)?,
        ),
        ControllerKind::Smppi => Box::new(Smppi::new(smppi_solver.clone())?),
    })
}

fn check_inputs(
    config: &SolverConfig,
    x0: &[f64],
    model: &dyn DynamicsModel,
    noise: &NoiseBatch,
) -> Result<(), ControlError> {
    let m = config.action_dim();
    if model.action_dim() != m || x0.len() != model.state_dim() {
        return Err(ControlError::Dimension(format!(
            "model n={} m={}, state {} , solver m={m}",
            model.state_dim(),
            model.action_dim(),
            x0.len()
        )));
    }
    if (model.dt() - config.dt).abs() > 1e-12 {
        return Err(ControlError::Config(format!("model dt {} differs from solver dt {}", model.dt(), config.dt)));
    }
    if noise.horizon() != config.horizon || noise.dim() != m || noise.samples() == 0 {
        return Err(ControlError::Dimension("noise batch shape does not match solver".into()));
    }
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(ControlError::Dimension("non-finite initial state".into()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::DynamicsError;
    use crate::types::Bounds;

    /// x' = x + a·dt, one-dimensional.
    struct Integrator;

    impl DynamicsModel for Integrator {
        fn state_dim(&self) -> usize {
            1
        }
        fn action_dim(&self) -> usize {
            1
        }
        fn dt(&self) -> f64 {
            0.1
        }
        fn step_into(&self, s: &[f64], a: &[f64], n: &mut [f64]) -> Result<(), DynamicsError> {
            n[0] = s[0] + a[0] * 0.1;
            if n[0].abs() > 1e3 {
                return Err(DynamicsError::Diverged("far".into()));
            }
            Ok(())
        }
    }

    /// (x - 1)²
    struct ToOne;

    impl TaskCost for ToOne {
        fn stage_cost(&self, s: &[f64], _: &mut usize) -> f64 {
            (s[0] - 1.0).powi(2)
        }
        fn terminal_cost(&self, _: &[f64], _: &mut usize) -> f64 {
            0.0
        }
    }

    struct AlwaysInf;

    impl TaskCost for AlwaysInf {
        fn stage_cost(&self, _: &[f64], _: &mut usize) -> f64 {
            f64::INFINITY
        }
        fn terminal_cost(&self, _: &[f64], _: &mut usize) -> f64 {
            0.0
        }
    }

    fn solver(samples: usize, temperature: f64) -> SolverConfig {
        SolverConfig {
            samples,
            horizon: 5,
            dt: 0.1,
            temperature,
            noise_covariance: vec![0.5],
            action_min: vec![-10.0],
            action_max: vec![10.0],
            derivative_min: Some(vec![-20.0]),
            derivative_max: Some(vec![20.0]),
            action_cost_weight: Some(vec![0.1]),
            control_cost: Default::default(),
            seed: 11,
        }
    }

    #[test]
    fn zero_noise_is_a_fixed_point() {
        let mut c = Mppi::new(solver(8, 1.0)).unwrap();
        c.set_nominal(vec![0.5, 0.4, 0.3, 0.3, 0.3]);
        let noise = NoiseBatch::zeros(8, 5, 1);
        let out = c.step_with_noise(&[0.0], &Integrator, &ToOne, &noise).unwrap();
        assert_eq!(out.action, vec![0.5]);
        assert_eq!(c.nominal(), &[0.4, 0.3, 0.3, 0.3, 0.3]);
    }

    #[test]
    fn single_sample_takes_its_noise() {
        let mut c = Mppi::new(solver(1, 1.0)).unwrap();
        let noise = NoiseBatch::from_raw(1, 5, 1, vec![0.1, -0.2, 0.3, 0.0, 1.0]);
        let out = c.step_with_noise(&[0.0], &Integrator, &ToOne, &noise).unwrap();
        assert_eq!(out.action, vec![0.1]);
        assert_eq!(c.nominal(), &[-0.2, 0.3, 0.0, 1.0, 1.0]);
        assert_eq!(out.diagnostics.ess, 1.0);
    }

    #[test]
    fn cold_temperature_selects_argmin() {
        let mut c = Mppi::new(solver(16, 1e-6)).unwrap();
        let noise = c.sample_noise();
        let costs: Vec<f64> = (0..16)
            .map(|k| rollout_cost(&Integrator, &ToOne, &[0.0], noise.sample_slice(k)))
            .collect();
        let best = (0..16).min_by(|a, b| costs[*a].total_cmp(&costs[*b])).unwrap();
        let before = c.nominal().to_vec();
        let out = c.step_with_noise(&[0.0], &Integrator, &ToOne, &noise).unwrap();
        let target: Vec<f64> = before.iter().zip(noise.sample_slice(best)).map(|(u, e)| u + e).collect();
        assert!((out.action[0] - target[0]).abs() < 1e-9);
        for t in 0..4 {
            assert!((c.nominal()[t] - target[t + 1]).abs() < 1e-9);
        }
    }

    #[test]
    fn degenerate_batch_is_fail_safe() {
        let mut c = Mppi::new(solver(4, 1.0)).unwrap();
        c.set_nominal(vec![0.7; 5]);
        let out = c.step(&[0.0], &Integrator, &AlwaysInf).unwrap();
        assert!(out.diagnostics.degenerate);
        assert_eq!(out.action, vec![0.7]);
        let mut s = Smppi::new(solver(4, 1.0)).unwrap();
        let out = s.step(&[0.0], &Integrator, &AlwaysInf).unwrap();
        assert!(out.diagnostics.degenerate);
        assert_eq!(out.action, vec![0.0]);
    }

    #[test]
    fn mppi_drives_integrator_to_target() {
        let mut c = Mppi::new(solver(64, 0.5)).unwrap();
        let mut x = vec![0.0];
        for _ in 0..60 {
            let out = c.step(&x, &Integrator, &ToOne).unwrap();
            x = Integrator.step(&x, &out.action).unwrap();
        }
        assert!((x[0] - 1.0).abs() < 0.1, "{x:?}");
    }

    #[test]
    fn lifting_examples() {
        let unbounded = Bounds::unbounded(1);
        let a = integrate_controls(&[0.0], &[1.0, 1.0, 1.0], 0.1, &unbounded);
        let want = [0.1, 0.2, 0.3];
        for (x, y) in a.iter().zip(&want) {
            assert!((x - y).abs() < 1e-15);
        }
        let capped = Bounds::new(vec![-1.0], vec![0.25]).unwrap();
        let a = integrate_controls(&[0.0], &[1.0, 1.0, 1.0], 0.1, &capped);
        assert!((a[0] - 0.1).abs() < 1e-15 && (a[1] - 0.2).abs() < 1e-15);
        assert_eq!(a[2], 0.25);
        // integration proceeds from the clamped value
        let a = integrate_controls(&[0.0], &[1.0, 1.0, 1.0, -1.0], 0.1, &capped);
        assert!((a[3] - 0.15).abs() < 1e-15);
    }

    #[test]
    fn smppi_zero_derivative_holds_action() {
        let mut s = Smppi::new(solver(8, 1.0)).unwrap();
        s.set_last_action(&[0.4]);
        let noise = NoiseBatch::zeros(8, 5, 1);
        let out = s.step_with_noise(&[0.0], &Integrator, &ToOne, &noise).unwrap();
        assert_eq!(out.action, vec![0.4]);
        assert!(s.actions().iter().all(|a| *a == 0.4));
    }

    #[test]
    fn smppi_nominal_stays_consistent() {
        let cfg = SolverConfig { horizon: 20, samples: 128, ..solver(128, 0.1) };
        let bounds = cfg.action_bounds();
        let mut s = Smppi::new(cfg).unwrap();
        let mut x = vec![0.0];
        let mut prev = s.last_action().to_vec();
        for _ in 0..80 {
            let out = s.step(&x, &Integrator, &ToOne).unwrap();
            assert!((out.action[0] - prev[0]).abs() <= 20.0 * 0.1 + 1e-12);
            let lifted = integrate_controls(s.last_action(), s.controls(), 0.1, &bounds);
            assert_eq!(lifted, s.actions());
            prev = out.action.clone();
            x = Integrator.step(&x, &out.action).unwrap();
        }
        assert!((x[0] - 1.0).abs() < 0.2, "{x:?}");
    }

    #[test]
    fn filtered_variant_names_and_validation() {
        let c = build_controller(ControllerKind::MppiSg, &solver(4, 1.0), &solver(4, 1.0), &FilterSettings::default());
        assert!(c.is_err(), "window 9 exceeds horizon 5");
        let f = FilterSettings { sg_window: 5, sg_degree: 2, ..Default::default() };
        let c = build_controller(ControllerKind::MppiSg, &solver(4, 1.0), &solver(4, 1.0), &f).unwrap();
        assert_eq!(c.name(), "mppi-sg");
        let c = build_controller(ControllerKind::MppiMa, &solver(4, 1.0), &solver(4, 1.0), &f).unwrap();
        assert_eq!(c.name(), "mppi-ma");
    }

    #[test]
    fn controller_kind_parsing() {
        for k in ControllerKind::ALL {
            assert_eq!(k.as_str().parse::<ControllerKind>().unwrap(), k);
        }
        assert!("ilqr".parse::<ControllerKind>().is_err());
    }

    #[test]
    fn model_dt_must_match() {
        let mut cfg = solver(4, 1.0);
        cfg.dt = 0.05;
        let mut c = Mppi::new(cfg).unwrap();
        assert!(matches!(c.step(&[0.0], &Integrator, &ToOne), Err(ControlError::Config(_))));
    }

    #[test]
    fn exec_modes_agree() {
        let mut a = Mppi::new(solver(32, 0.5)).unwrap().with_exec_mode(ExecMode::Sequential);
        let mut b = Mppi::new(solver(32, 0.5)).unwrap().with_exec_mode(ExecMode::Parallel);
        for _ in 0..5 {
            let oa = a.step(&[0.2], &Integrator, &ToOne).unwrap();
            let ob = b.step(&[0.2], &Integrator, &ToOne).unwrap();
            assert_eq!(oa, ob);
        }
    }
}

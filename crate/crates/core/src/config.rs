//! Solver configuration and the TOML loading contract shared by every
//! configurable component. Unknown keys are rejected everywhere.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::types::{Bounds, TypeError};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("failed to read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("failed to parse config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
}

impl From<TypeError> for ConfigError {
    fn from(e: TypeError) -> Self {
        ConfigError::Invalid(e.to_string())
    }
}

/// Parses a TOML document into `T`.
pub fn from_toml_str<T: DeserializeOwned>(text: &str) -> Result<T, ConfigError> {
    Ok(toml::from_str(text)?)
}

/// Reads and parses a TOML file into `T`.
pub fn from_toml_file<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<T, ConfigError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
    from_toml_str(&text)
}

/// Coefficient in front of the per-step control cost `u' Σ⁻¹ (u + ε)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "convention", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ControlCostConfig {
    /// Explicit scale γ ≥ 0.
    Gamma { gamma: f64 },
    /// γ = λ(1 − α), α ∈ [0, 1].
    LambdaAlpha { alpha: f64 },
}

impl Default for ControlCostConfig {
    fn default() -> Self {
        ControlCostConfig::Gamma { gamma: 0.0 }
    }
}

impl ControlCostConfig {
    pub fn coefficient(&self, temperature: f64) -> f64 {
        match *self {
            ControlCostConfig::Gamma { gamma } => gamma,
            ControlCostConfig::LambdaAlpha { alpha } => temperature * (1.0 - alpha),
        }
    }
}

/// Hyperparameters of one sampling-based solver instance.
///
/// For the smooth variant `noise_covariance` lives in the derivative (control)
/// space and `derivative_min`/`derivative_max` bound that space; the action
/// bounds always apply to what the plant receives.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    pub samples: usize,
    pub horizon: usize,
    pub dt: f64,
    pub temperature: f64,
    pub noise_covariance: Vec<f64>,
    pub action_min: Vec<f64>,
    pub action_max: Vec<f64>,
    #[serde(default)]
    pub derivative_min: Option<Vec<f64>>,
    #[serde(default)]
    pub derivative_max: Option<Vec<f64>>,
    #[serde(default)]
    pub action_cost_weight: Option<Vec<f64>>,
    #[serde(default)]
    pub control_cost: ControlCostConfig,
    #[serde(default)]
    pub seed: u64,
}

impl SolverConfig {
    pub fn action_dim(&self) -> usize {
        self.action_min.len()
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let m = self.action_dim();
        let invalid = |msg: String| Err(ConfigError::Invalid(msg));
        if self.samples < 1 {
            return invalid("samples must be at least 1".into());
        }
        if self.horizon < 2 {
            return invalid("horizon must be at least 2".into());
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return invalid(format!("dt must be positive, got {}", self.dt));
        }
        if !(self.temperature > 0.0 && self.temperature.is_finite()) {
            return invalid(format!("temperature must be positive, got {}", self.temperature));
        }
        if self.noise_covariance.len() != m {
            return invalid(format!(
                "noise_covariance has {} entries for action dimension {m}",
                self.noise_covariance.len()
            ));
        }
        if self.noise_covariance.iter().any(|s| !(*s > 0.0 && s.is_finite())) {
            return invalid("noise_covariance entries must be positive".into());
        }
        Bounds::new(self.action_min.clone(), self.action_max.clone())?;
        match (&self.derivative_min, &self.derivative_max) {
            (Some(lo), Some(hi)) => {
                let b = Bounds::new(lo.clone(), hi.clone())?;
                if b.dim() != m {
                    return invalid("derivative bounds dimension mismatch".into());
                }
            }
            (None, None) => {}
            _ => return invalid("derivative_min and derivative_max must be given together".into()),
        }
        if let Some(w) = &self.action_cost_weight {
            if w.len() != m || w.iter().any(|v| !(*v >= 0.0 && v.is_finite())) {
                return invalid("action_cost_weight must have one non-negative entry per action".into());
            }
        }
        let coeff = self.control_cost.coefficient(self.temperature);
        if !(coeff >= 0.0 && coeff.is_finite()) {
            return invalid("control cost coefficient must be non-negative".into());
        }
        if let ControlCostConfig::LambdaAlpha { alpha } = self.control_cost {
            if !(0.0..=1.0).contains(&alpha) {
                return invalid("alpha must lie in [0, 1]".into());
            }
        }
        Ok(())
    }

    pub fn action_bounds(&self) -> Bounds {
        Bounds::new(self.action_min.clone(), self.action_max.clone())
            .expect("validated action bounds")
    }

    /// Derivative-space bounds; unbounded when not configured.
    pub fn derivative_bounds(&self) -> Bounds {
        match (&self.derivative_min, &self.derivative_max) {
            (Some(lo), Some(hi)) => Bounds::new(lo.clone(), hi.clone()).expect("validated derivative bounds"),
            _ => Bounds::unbounded(self.action_dim()),
        }
    }

    pub fn noise_std(&self) -> Vec<f64> {
        self.noise_covariance.iter().map(|s| s.sqrt()).collect()
    }

    pub fn action_cost_weights(&self) -> Vec<f64> {
        self.action_cost_weight.clone().unwrap_or_else(|| vec![0.0; self.action_dim()])
    }

    pub fn control_cost_coefficient(&self) -> f64 {
        self.control_cost.coefficient(self.temperature)
    }

    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = from_toml_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let cfg: Self = from_toml_file(path)?;
        cfg.validate()?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
samples = 64
horizon = 10
dt = 0.05
temperature = 1.0
noise_covariance = [0.25]
action_min = [-2.0]
action_max = [2.0]
seed = 42
"#;

    #[test]
    fn parses_minimal() {
        let cfg = SolverConfig::from_toml_str(BASE).unwrap();
        assert_eq!(cfg.samples, 64);
        assert_eq!(cfg.noise_std(), vec![0.5]);
        assert_eq!(cfg.control_cost_coefficient(), 0.0);
        assert_eq!(cfg.derivative_bounds(), Bounds::unbounded(1));
    }

    #[test]
    fn unknown_key_is_error() {
        let text = format!("{BASE}\nbogus = 1\n");
        assert!(matches!(SolverConfig::from_toml_str(&text), Err(ConfigError::Parse(_))));
    }

    #[test]
    fn control_cost_conventions() {
        let text = format!("{BASE}\n[control_cost]\nconvention = \"lambda-alpha\"\nalpha = 0.75\n");
        let cfg = SolverConfig::from_toml_str(&text.replace("temperature = 1.0", "temperature = 2.0")).unwrap();
        assert_eq!(cfg.control_cost_coefficient(), 0.5);
        let text = format!("{BASE}\n[control_cost]\nconvention = \"gamma\"\ngamma = 0.3\n");
        assert_eq!(SolverConfig::from_toml_str(&text).unwrap().control_cost_coefficient(), 0.3);
    }

    #[test]
    fn rejects_bad_values() {
        for (from, to) in [
            ("samples = 64", "samples = 0"),
            ("temperature = 1.0", "temperature = 0.0"),
            ("noise_covariance = [0.25]", "noise_covariance = [0.0]"),
            ("noise_covariance = [0.25]", "noise_covariance = [0.25, 1.0]"),
            ("action_max = [2.0]", "action_max = [-3.0]"),
            ("horizon = 10", "horizon = 1"),
        ] {
            let text = BASE.replace(from, to);
            assert!(SolverConfig::from_toml_str(&text).is_err(), "{to} accepted");
        }
        let half = format!("{BASE}\nderivative_min = [-1.0]\n");
        assert!(SolverConfig::from_toml_str(&half).is_err());
    }
}

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{FeatureMap, LearningError, Mlp};
use crate::dynamics::{DynamicsError, DynamicsModel};

pub const CHECKPOINT_FORMAT: &str = "smppi-mlp";
pub const CHECKPOINT_VERSION: u32 = 1;

/// Network-backed dynamics: `x' = x + delta(features(x, a))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearnedModel {
    pub mlp: Mlp,
    pub features: FeatureMap,
    pub state_dim: usize,
    pub action_dim: usize,
    pub dt: f64,
}

#[derive(Serialize, Deserialize)]
struct Checkpoint {
    format: String,
    version: u32,
    #[serde(flatten)]
    model: LearnedModel,
}

impl LearnedModel {
    pub fn new(mlp: Mlp, features: FeatureMap, state_dim: usize, action_dim: usize, dt: f64) -> Result<Self, LearningError> {
        if mlp.input_dim() != features.input_dim(state_dim, action_dim) || mlp.output_dim() != features.output_dim(state_dim) {
            return Err(LearningError::Shape(format!(
                "network {:?} does not fit {features:?} with n={state_dim}, m={action_dim}",
                mlp.sizes()
            )));
        }
        if !mlp.is_finite() {
            return Err(LearningError::Shape("network has non-finite parameters".into()));
        }
        Ok(Self { mlp, features, state_dim, action_dim, dt })
    }

    /// Predicted next-state delta.
    pub fn predict_delta(&self, state: &[f64], action: &[f64]) -> Result<Vec<f64>, LearningError> {
        if state.len() != self.state_dim || action.len() != self.action_dim {
            return Err(LearningError::Shape(format!(
                "expected state {} / action {}, got {} / {}",
                self.state_dim,
                self.action_dim,
                state.len(),
                action.len()
            )));
        }
        let input = self.features.inputs(state, action);
        let mut out = self.mlp.forward(&input)?;
        self.features.output_to_delta(state, &mut out);
        Ok(out)
    }

    pub fn to_json(&self) -> Result<String, LearningError> {
        let ck = Checkpoint { format: CHECKPOINT_FORMAT.into(), version: CHECKPOINT_VERSION, model: self.clone() };
        Ok(serde_json::to_string_pretty(&ck)?)
    }

    pub fn from_json(text: &str) -> Result<Self, LearningError> {
        let ck: Checkpoint = serde_json::from_str(text)?;
        if ck.format != CHECKPOINT_FORMAT || ck.version != CHECKPOINT_VERSION {
            return Err(LearningError::Checkpoint(format!(
                "unsupported checkpoint {} v{}",
                ck.format, ck.version
            )));
        }
        let m = ck.model;
        Self::new(m.mlp, m.features, m.state_dim, m.action_dim, m.dt)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), LearningError> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, LearningError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

impl DynamicsModel for LearnedModel {
    fn state_dim(&self) -> usize {
        self.state_dim
    }

    fn action_dim(&self) -> usize {
        self.action_dim
    }

    fn dt(&self) -> f64 {
        self.dt
    }

    fn step_into(&self, state: &[f64], action: &[f64], next: &mut [f64]) -> Result<(), DynamicsError> {
        crate::dynamics::check_dims(state, action, next, self.state_dim, self.action_dim)?;
        let mut input = [0.0f64; 16];
        let k = self.mlp.input_dim();
        if k > input.len() {
            let d = self.predict_delta(state, action).map_err(|e| DynamicsError::Dimension(e.to_string()))?;
            next.iter_mut().zip(state.iter().zip(&d)).for_each(|(o, (s, d))| *o = s + d);
        } else {
            self.features.inputs_into(state, action, &mut input[..k]);
            self.mlp
                .forward_into(&input[..k], next)
                .map_err(|e| DynamicsError::Dimension(e.to_string()))?;
            self.features.output_to_delta(state, next);
            for (o, s) in next.iter_mut().zip(state) {
                *o += s;
            }
        }
        if next.iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(DynamicsError::Diverged("network output not finite".into()))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learning::Normalizer;

    #[test]
    fn identity_weights_reproduce_state() {
        let mut mlp = Mlp::zeros(&[3, 2]).unwrap();
        mlp.layers[0].weights = vec![1.0, 0.0, 0.0, 0.0, 1.0, 0.0];
        let model = LearnedModel::new(mlp, FeatureMap::Identity, 2, 1, 0.05).unwrap();
        assert_eq!(model.predict_delta(&[0.7, -1.2], &[3.0]).unwrap(), vec![0.7, -1.2]);
        assert_eq!(model.step(&[0.7, -1.2], &[3.0]).unwrap(), vec![1.4, -2.4]);
    }

    #[test]
    fn constant_network_predicts_output_mean() {
        let mut mlp = Mlp::zeros(&[4, 8, 2]).unwrap();
        mlp.output_norm = Normalizer { mean: vec![0.01, -0.2], std: vec![1.0, 1.0] };
        let model = LearnedModel::new(mlp, FeatureMap::Pendulum, 2, 1, 0.05).unwrap();
        assert_eq!(model.predict_delta(&[1.0, 2.0], &[0.0]).unwrap(), vec![0.01, -0.2]);
    }

    #[test]
    fn checkpoint_round_trip_and_version() {
        let mlp = Mlp::zeros(&[5, 4, 6]).unwrap();
        let model = LearnedModel::new(mlp, FeatureMap::Vehicle, 6, 2, 0.05).unwrap();
        let json = model.to_json().unwrap();
        assert_eq!(LearnedModel::from_json(&json).unwrap(), model);
        let bumped = json.replace("\"version\": 1", "\"version\": 99");
        assert!(matches!(LearnedModel::from_json(&bumped), Err(LearningError::Checkpoint(_))));
    }

    #[test]
    fn shape_mismatch_rejected() {
        let mlp = Mlp::zeros(&[3, 2]).unwrap();
        assert!(LearnedModel::new(mlp.clone(), FeatureMap::Pendulum, 2, 1, 0.05).is_err());
        let model = LearnedModel::new(mlp, FeatureMap::Identity, 2, 1, 0.05).unwrap();
        assert!(model.predict_delta(&[0.0], &[0.0]).is_err());
    }
}

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{LearningError, Split, Transition, TransitionDataset};
use crate::dynamics::DynamicsModel;
use crate::rng::derive_seed;
use crate::types::Bounds;

/// Excitation settings for [`collect_dataset`].
///
/// Actions follow an Ornstein–Uhlenbeck process clamped to the action
/// bounds; every `episode_steps` transitions (or on plant divergence) the
/// plant restarts from a state drawn uniformly from
/// `[initial_min, initial_max]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CollectConfig {
    pub steps: usize,
    pub episode_steps: usize,
    pub seed: u64,
    /// Mean-reversion rate (1/s).
    pub ou_rate: f64,
    /// Diffusion per action dimension (units/√s).
    pub ou_sigma: Vec<f64>,
    pub initial_min: Vec<f64>,
    pub initial_max: Vec<f64>,
    #[serde(default = "default_validation_fraction")]
    pub validation_fraction: f64,
}

fn default_validation_fraction() -> f64 {
    0.2
}

pub fn collect_dataset(
    plant: &dyn DynamicsModel,
    action_bounds: &Bounds,
    config: &CollectConfig,
) -> Result<TransitionDataset, LearningError> {
    if config.steps == 0 {
        return Err(LearningError::Dataset("steps must be at least 1".into()));
    }
    let (n, m) = (plant.state_dim(), plant.action_dim());
    if config.initial_min.len() != n || config.initial_max.len() != n || config.ou_sigma.len() != m || action_bounds.dim() != m
    {
        return Err(LearningError::Shape("collect config dimensions do not match the plant".into()));
    }
    if config.episode_steps == 0 || !(0.0..1.0).contains(&config.validation_fraction) {
        return Err(LearningError::Hyperparams("episode_steps must be positive, validation_fraction in [0, 1)".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut split_rng = ChaCha8Rng::seed_from_u64(derive_seed(config.seed, 1));
    let dt = plant.dt();
    let reset = |rng: &mut ChaCha8Rng| -> (Vec<f64>, Vec<f64>) {
        let x = (0..n)
            .map(|i| {
                let (lo, hi) = (config.initial_min[i], config.initial_max[i]);
                if hi > lo { rng.random_range(lo..hi) } else { lo }
            })
            .collect();
        let a = (0..m).map(|d| rng.random_range(action_bounds.min()[d]..action_bounds.max()[d])).collect();
        (x, a)
    };

    let mut ds = TransitionDataset::new(n, m);
    let (mut state, mut action) = reset(&mut rng);
    let mut next = vec![0.0; n];
    let mut in_episode = 0;
    while ds.len() < config.steps {
        if in_episode >= config.episode_steps {
            (state, action) = reset(&mut rng);
            in_episode = 0;
        }
        for d in 0..m {
            let xi: f64 = StandardNormal.sample(&mut rng);
            let a = action[d] - config.ou_rate * action[d] * dt + config.ou_sigma[d] * dt.sqrt() * xi;
            action[d] = action_bounds.clamp_dim(d, a);
        }
        if plant.step_into(&state, &action, &mut next).is_err() {
            in_episode = config.episode_steps;
            continue;
        }
        let split = if split_rng.random::<f64>() < config.validation_fraction { Split::Validation } else { Split::Train };
        ds.push(Transition {
            state: state.clone(),
            action: action.clone(),
            delta: next.iter().zip(&state).map(|(b, a)| b - a).collect(),
            split,
        });
        state.copy_from_slice(&next);
        in_episode += 1;
    }
    Ok(ds)
}

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{FeatureMap, LearnedModel, LearningError, Mlp, Normalizer, Split, TransitionDataset};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    pub hidden: Vec<usize>,
    pub learning_rate: f64,
    pub momentum: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
    /// Epochs without validation improvement before the learning rate is halved.
    pub patience: usize,
    pub min_learning_rate: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            hidden: vec![32, 32],
            learning_rate: 0.05,
            momentum: 0.9,
            batch_size: 64,
            epochs: 200,
            seed: 0,
            patience: 8,
            min_learning_rate: 1e-5,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), LearningError> {
        if !(self.learning_rate > 0.0) || self.batch_size == 0 || self.epochs == 0 || !(0.0..1.0).contains(&self.momentum)
        {
            return Err(LearningError::Hyperparams(format!("{self:?}")));
        }
        if self.hidden.iter().any(|h| *h == 0) {
            return Err(LearningError::Hyperparams("hidden layer of width 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochLoss {
    pub epoch: usize,
    pub train: f64,
    pub validation: f64,
    pub learning_rate: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: LearnedModel,
    pub curve: Vec<EpochLoss>,
}

/// Trains a [`LearnedModel`] on the dataset's train split and reports
/// per-epoch losses on both splits.
pub fn train(
    dataset: &TransitionDataset,
    features: FeatureMap,
    dt: f64,
    config: &TrainConfig,
) -> Result<TrainOutcome, LearningError> {
    dataset.validate_for_training()?;
    let prep = |split| -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
        dataset
            .split(split)
            .map(|r| (features.inputs(&r.state, &r.action), features.target(&r.state, &r.delta)))
            .unzip()
    };
    let (xs, ys) = prep(Split::Train);
    let (vx, vy) = prep(Split::Validation);
    let (mlp, curve) = train_mlp(&xs, &ys, &vx, &vy, config)?;
    let model = LearnedModel::new(mlp, features, dataset.state_dim, dataset.action_dim, dt)?;
    Ok(TrainOutcome { model, curve })
}

/// Minibatch gradient descent with momentum on normalized MSE. Deterministic
/// for a fixed `config.seed`.
pub fn train_mlp(
    inputs: &[Vec<f64>],
    targets: &[Vec<f64>],
    val_inputs: &[Vec<f64>],
    val_targets: &[Vec<f64>],
    config: &TrainConfig,
) -> Result<(Mlp, Vec<EpochLoss>), LearningError> {
    config.validate()?;
    if inputs.is_empty() || inputs.len() != targets.len() || val_inputs.len() != val_targets.len() {
        return Err(LearningError::Dataset("empty or ragged training data".into()));
    }
    let mut sizes = vec![inputs[0].len()];
    sizes.extend(&config.hidden);
    sizes.push(targets[0].len());

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut mlp = Mlp::random(&sizes, &mut rng)?;
    mlp.input_norm = Normalizer::fit(inputs);
    mlp.output_norm = Normalizer::fit(targets);

    let mut velocity = vec![0.0; mlp.param_count()];
    let mut params = mlp.params();
    let mut order: Vec<usize> = (0..inputs.len()).collect();
    let mut lr = config.learning_rate;
    let mut best_val = f64::INFINITY;
    let mut since_best = 0;
    let mut curve = Vec::with_capacity(config.epochs);
    let mut bx = Vec::with_capacity(config.batch_size);
    let mut by = Vec::with_capacity(config.batch_size);

    for epoch in 0..config.epochs {
        order.shuffle(&mut rng);
        for chunk in order.chunks(config.batch_size) {
            bx.clear();
            by.clear();
            bx.extend(chunk.iter().map(|&i| inputs[i].clone()));
            by.extend(chunk.iter().map(|&i| targets[i].clone()));
            let grad = mlp.backprop_gradient(&bx, &by).flatten();
            for ((p, v), g) in params.iter_mut().zip(velocity.iter_mut()).zip(&grad) {
                *v = config.momentum * *v - lr * g;
                *p += *v;
            }
            mlp.set_params(&params);
        }
        let train = mlp.loss(inputs, targets);
        let validation = if val_inputs.is_empty() { train } else { mlp.loss(val_inputs, val_targets) };
        if !train.is_finite() || !validation.is_finite() {
            return Err(LearningError::Diverged { epoch, loss: train });
        }
        curve.push(EpochLoss { epoch, train, validation, learning_rate: lr });
        if validation < best_val {
            best_val = validation;
            since_best = 0;
        } else {
            since_best += 1;
            if since_best >= config.patience && lr > config.min_learning_rate {
                lr = (lr * 0.5).max(config.min_learning_rate);
                since_best = 0;
            }
        }
    }
    Ok((mlp, curve))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn linear_data(n: usize, seed: u64) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let xs: Vec<Vec<f64>> = (0..n).map(|_| (0..3).map(|_| rng.random_range(-2.0..2.0)).collect()).collect();
        let ys = xs
            .iter()
            .map(|x| vec![0.5 * x[0] - 1.5 * x[1] + 0.2 * x[2] + 0.3, 2.0 * x[2] - x[0]])
            .collect();
        (xs, ys)
    }

    #[test]
    fn linear_target_is_learned_by_linear_model() {
        let (xs, ys) = linear_data(400, 1);
        let (vx, vy) = linear_data(100, 2);
        let cfg = TrainConfig { hidden: vec![], epochs: 150, learning_rate: 0.05, batch_size: 32, ..Default::default() };
        let (mlp, curve) = train_mlp(&xs, &ys, &vx, &vy, &cfg).unwrap();
        let last = curve.last().unwrap();
        assert!(last.validation < 1e-6, "validation loss {}", last.validation);
        assert!(mlp.loss(&vx, &vy) < 1e-6);
    }

    #[test]
    fn constant_target_converges() {
        let (xs, _) = linear_data(300, 3);
        let ys: Vec<Vec<f64>> = xs.iter().map(|_| vec![2.5]).collect();
        let cfg = TrainConfig { hidden: vec![], epochs: 100, ..Default::default() };
        let (mlp, curve) = train_mlp(&xs, &ys, &xs[..50], &ys[..50], &cfg).unwrap();
        assert!(curve.last().unwrap().train < 1e-12, "{:?}", curve.last());
        let layer = &mlp.layers[0];
        let bias = layer.bias[0] * mlp.output_norm.std[0] + mlp.output_norm.mean[0];
        assert!((bias - 2.5).abs() < 1e-6);
        assert!(layer.weights.iter().all(|w| w.abs() < 1e-6));
        for x in &xs[..20] {
            assert!((mlp.forward(x).unwrap()[0] - 2.5).abs() < 1e-6);
        }
        // a hidden layer gets there too, just more slowly
        let cfg = TrainConfig { hidden: vec![8], epochs: 100, ..Default::default() };
        let (_, curve) = train_mlp(&xs, &ys, &xs[..50], &ys[..50], &cfg).unwrap();
        assert!(curve.last().unwrap().train < 1e-3 * curve[0].train);
    }

    #[test]
    fn deterministic_under_seed() {
        let (xs, ys) = linear_data(200, 4);
        let cfg = TrainConfig { hidden: vec![6], epochs: 5, ..Default::default() };
        let a = train_mlp(&xs, &ys, &xs, &ys, &cfg).unwrap();
        let b = train_mlp(&xs, &ys, &xs, &ys, &cfg).unwrap();
        assert_eq!(a.0, b.0);
        assert_eq!(a.1, b.1);
        let c = train_mlp(&xs, &ys, &xs, &ys, &TrainConfig { seed: 1, ..cfg }).unwrap();
        assert_ne!(a.0, c.0);
    }

    #[test]
    fn exploding_learning_rate_is_reported() {
        let (xs, ys) = linear_data(200, 5);
        let cfg = TrainConfig { hidden: vec![], learning_rate: 1e3, epochs: 50, ..Default::default() };
        assert!(matches!(train_mlp(&xs, &ys, &xs, &ys, &cfg), Err(LearningError::Diverged { .. })));
    }

    #[test]
    fn bad_hyperparams() {
        let (xs, ys) = linear_data(10, 6);
        let cfg = TrainConfig { batch_size: 0, ..Default::default() };
        assert!(matches!(train_mlp(&xs, &ys, &xs, &ys, &cfg), Err(LearningError::Hyperparams(_))));
    }
}

//! Feed-forward network with tanh hidden layers, an identity output layer and
//! per-dimension input/output normalization.

use std::cell::RefCell;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::LearningError;

const MIN_STD: f64 = 1e-8;

/// Per-dimension affine normalization `z = (x - mean) / std`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Normalizer {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Normalizer {
    pub fn identity(dim: usize) -> Self {
        Self { mean: vec![0.0; dim], std: vec![1.0; dim] }
    }

    /// Column statistics of `rows`; degenerate columns get unit scale.
    pub fn fit(rows: &[Vec<f64>]) -> Self {
        let dim = rows.first().map_or(0, Vec::len);
        let n = rows.len().max(1) as f64;
        let mut mean = vec![0.0; dim];
        for r in rows {
            for (m, v) in mean.iter_mut().zip(r) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![0.0; dim];
        for r in rows {
            for ((s, v), m) in var.iter_mut().zip(r).zip(&mean) {
                *s += (v - m) * (v - m);
            }
        }
        let std = var.iter().map(|s| (s / n).sqrt()).map(|s| if s > MIN_STD { s } else { 1.0 }).collect();
        Self { mean, std }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    #[inline]
    pub fn normalize_into(&self, x: &[f64], out: &mut [f64]) {
        for i in 0..x.len() {
            out[i] = (x[i] - self.mean[i]) / self.std[i];
        }
    }

    #[inline]
    pub fn denormalize_into(&self, z: &[f64], out: &mut [f64]) {
        for i in 0..z.len() {
            out[i] = z[i] * self.std[i] + self.mean[i];
        }
    }

    pub fn normalize(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; x.len()];
        self.normalize_into(x, &mut out);
        out
    }

    pub fn denormalize(&self, z: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; z.len()];
        self.denormalize_into(z, &mut out);
        out
    }
}

/// One dense layer, weights row-major `[outputs][inputs]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub inputs: usize,
    pub outputs: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Layer {
    pub fn zeros(inputs: usize, outputs: usize) -> Self {
        Self { inputs, outputs, weights: vec![0.0; inputs * outputs], bias: vec![0.0; outputs] }
    }

    #[inline]
    fn apply(&self, x: &[f64], out: &mut [f64], hidden: bool) {
        for o in 0..self.outputs {
            let row = &self.weights[o * self.inputs..(o + 1) * self.inputs];
            let mut acc = self.bias[o];
            for (w, xi) in row.iter().zip(x) {
                acc += w * xi;
            }
            out[o] = if hidden { acc.tanh() } else { acc };
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    pub layers: Vec<Layer>,
    pub input_norm: Normalizer,
    pub output_norm: Normalizer,
}

thread_local! {
    static SCRATCH: RefCell<(Vec<f64>, Vec<f64>)> = const { RefCell::new((Vec::new(), Vec::new())) };
}

/// Gradients with the same shape as the network's layers.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub layers: Vec<Layer>,
}

impl Gradients {
    pub fn flatten(&self) -> Vec<f64> {
        self.layers.iter().flat_map(|l| l.weights.iter().chain(&l.bias).copied()).collect()
    }
}

impl Mlp {
    /// Network with the given layer sizes (input first, output last), zero
    /// parameters and identity normalization.
    pub fn zeros(sizes: &[usize]) -> Result<Self, LearningError> {
        if sizes.len() < 2 || sizes.iter().any(|s| *s == 0) {
            return Err(LearningError::Shape(format!("invalid layer sizes {sizes:?}")));
        }
        let layers = sizes.windows(2).map(|w| Layer::zeros(w[0], w[1])).collect();
        Ok(Self {
            layers,
            input_norm: Normalizer::identity(sizes[0]),
            output_norm: Normalizer::identity(sizes[sizes.len() - 1]),
        })
    }

    /// Xavier-uniform initialized weights, zero biases.
    pub fn random(sizes: &[usize], rng: &mut impl Rng) -> Result<Self, LearningError> {
        let mut mlp = Self::zeros(sizes)?;
        for layer in &mut mlp.layers {
            let limit = (6.0 / (layer.inputs + layer.outputs) as f64).sqrt();
            for w in &mut layer.weights {
                *w = rng.random_range(-limit..limit);
            }
        }
        Ok(mlp)
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut s = vec![self.layers[0].inputs];
        s.extend(self.layers.iter().map(|l| l.outputs));
        s
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].inputs
    }

    pub fn output_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].outputs
    }

    fn max_width(&self) -> usize {
        self.sizes().into_iter().max().unwrap_or(0)
    }

    /// Normalized-space forward pass: `z_in -> z_out`.
    pub fn forward_normalized_into(&self, z_in: &[f64], z_out: &mut [f64]) {
        SCRATCH.with(|cell| {
            let mut guard = cell.borrow_mut();
            let (a, b) = &mut *guard;
            let width = self.max_width();
            if a.len() < width {
                a.resize(width, 0.0);
                b.resize(width, 0.0);
            }
            a[..z_in.len()].copy_from_slice(z_in);
            let last = self.layers.len() - 1;
            for (i, layer) in self.layers.iter().enumerate() {
                layer.apply(&a[..layer.inputs], &mut b[..layer.outputs], i != last);
                std::mem::swap(a, b);
            }
            z_out.copy_from_slice(&a[..self.output_dim()]);
        });
    }

    /// Raw-space forward pass.
    pub fn forward_into(&self, input: &[f64], out: &mut [f64]) -> Result<(), LearningError> {
        if input.len() != self.input_dim() || out.len() != self.output_dim() {
            return Err(LearningError::Shape(format!(
                "network {:?} given input {} / output {}",
                self.sizes(),
                input.len(),
                out.len()
            )));
        }
        let mut z = [0.0f64; 64];
        let mut z_heap;
        let z_in: &mut [f64] = if input.len() <= 64 {
            &mut z[..input.len()]
        } else {
            z_heap = vec![0.0; input.len()];
            &mut z_heap
        };
        self.input_norm.normalize_into(input, z_in);
        self.forward_normalized_into(z_in, out);
        let z_out = out.to_vec();
        self.output_norm.denormalize_into(&z_out, out);
        Ok(())
    }

    pub fn forward(&self, input: &[f64]) -> Result<Vec<f64>, LearningError> {
        let mut out = vec![0.0; self.output_dim()];
        self.forward_into(input, &mut out)?;
        Ok(out)
    }

    /// Mean squared error in normalized output space over a batch of raw
    /// `(input, target)` rows.
    pub fn loss(&self, inputs: &[Vec<f64>], targets: &[Vec<f64>]) -> f64 {
        let n_out = self.output_dim();
        let mut z_out = vec![0.0; n_out];
        let mut total = 0.0;
        for (x, t) in inputs.iter().zip(targets) {
            let z_in = self.input_norm.normalize(x);
            self.forward_normalized_into(&z_in, &mut z_out);
            let z_t = self.output_norm.normalize(t);
            total += z_out.iter().zip(&z_t).map(|(p, q)| (p - q) * (p - q)).sum::<f64>();
        }
        total / (inputs.len().max(1) * n_out) as f64
    }

    /// Exact gradient of [`Mlp::loss`] with respect to all weights and biases.
    pub fn backprop_gradient(&self, inputs: &[Vec<f64>], targets: &[Vec<f64>]) -> Gradients {
        let mut grads: Vec<Layer> = self.layers.iter().map(|l| Layer::zeros(l.inputs, l.outputs)).collect();
        let n_out = self.output_dim();
        let scale = 2.0 / (inputs.len().max(1) * n_out) as f64;
        let last = self.layers.len() - 1;
        let mut acts: Vec<Vec<f64>> = Vec::with_capacity(self.layers.len() + 1);
        for (x, t) in inputs.iter().zip(targets) {
            acts.clear();
            acts.push(self.input_norm.normalize(x));
            for (i, layer) in self.layers.iter().enumerate() {
                let mut out = vec![0.0; layer.outputs];
                layer.apply(&acts[i], &mut out, i != last);
                acts.push(out);
            }
            let z_t = self.output_norm.normalize(t);
            let mut delta: Vec<f64> =
                acts[last + 1].iter().zip(&z_t).map(|(p, q)| scale * (p - q)).collect();
            for i in (0..self.layers.len()).rev() {
                let layer = &self.layers[i];
                let g = &mut grads[i];
                let input = &acts[i];
                for o in 0..layer.outputs {
                    g.bias[o] += delta[o];
                    let row = &mut g.weights[o * layer.inputs..(o + 1) * layer.inputs];
                    for (gw, xi) in row.iter_mut().zip(input) {
                        *gw += delta[o] * xi;
                    }
                }
                if i > 0 {
                    let mut prev = vec![0.0; layer.inputs];
                    for o in 0..layer.outputs {
                        let row = &layer.weights[o * layer.inputs..(o + 1) * layer.inputs];
                        for (p, w) in prev.iter_mut().zip(row) {
                            *p += w * delta[o];
                        }
                    }
                    // tanh' = 1 - tanh²
                    for (p, a) in prev.iter_mut().zip(input) {
                        *p *= 1.0 - a * a;
                    }
                    delta = prev;
                }
            }
        }
        Gradients { layers: grads }
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.bias.len()).sum()
    }

    /// All parameters, layer by layer, weights before biases.
    pub fn params(&self) -> Vec<f64> {
        self.layers.iter().flat_map(|l| l.weights.iter().chain(&l.bias).copied()).collect()
    }

    pub fn set_params(&mut self, params: &[f64]) {
        assert_eq!(params.len(), self.param_count());
        let mut it = params.iter().copied();
        for l in &mut self.layers {
            l.weights.iter_mut().chain(l.bias.iter_mut()).for_each(|p| *p = it.next().unwrap());
        }
    }

    pub fn is_finite(&self) -> bool {
        self.params().iter().all(|p| p.is_finite())
            && self.input_norm.std.iter().chain(&self.output_norm.std).all(|s| *s > 0.0 && s.is_finite())
    }
}

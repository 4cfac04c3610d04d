//! Counter-based random streams.
//!
//! Every draw is addressed by `(seed, stream)` rather than by the position of
//! a shared generator, so the noise a rollout sees does not depend on which
//! worker evaluated it or in what order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::parallel::{self, ExecMode};

/// SplitMix64 finalizer.
fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives a sub-seed for one solver iteration (or episode, or any other
/// counter) from a base seed.
pub fn derive_seed(seed: u64, counter: u64) -> u64 {
    mix64(seed ^ mix64(counter.wrapping_add(0x5151_5eed)))
}

/// Generator for the given `(seed, stream)` address.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// `count` standard-normal draws from stream `stream` of `seed`.
pub fn seeded_normal(seed: u64, stream: u64, count: usize) -> Vec<f64> {
    let mut out = vec![0.0; count];
    fill_normal(seed, stream, &mut out);
    out
}

/// Fills `out` with standard-normal draws from the addressed stream.
pub fn fill_normal(seed: u64, stream: u64, out: &mut [f64]) {
    let mut rng = stream_rng(seed, stream);
    for v in out.iter_mut() {
        *v = StandardNormal.sample(&mut rng);
    }
}

/// K×T×m Gaussian perturbations, stored sample-major.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseBatch {
    samples: usize,
    horizon: usize,
    dim: usize,
    eps: Vec<f64>,
}

impl NoiseBatch {
    /// Draws a batch for solver iteration `iteration`. Sample `k` is a pure
    /// function of `(seed, iteration, k)` and the per-dimension standard
    /// deviations `std` (square roots of the diagonal covariance).
    pub fn sample(
        seed: u64,
        iteration: u64,
        samples: usize,
        horizon: usize,
        std: &[f64],
        mode: ExecMode,
    ) -> Self {
        let dim = std.len();
        let iter_seed = derive_seed(seed, iteration);
        let stride = horizon * dim;
        let mut eps = vec![0.0; samples * stride];
        parallel::for_each_chunk_mut(&mut eps, stride.max(1), mode, |k, chunk| {
            fill_normal(iter_seed, k as u64, chunk);
            for (i, v) in chunk.iter_mut().enumerate() {
                *v *= std[i % dim];
            }
        });
        Self { samples, horizon, dim, eps }
    }

    /// Batch of all-zero perturbations.
    pub fn zeros(samples: usize, horizon: usize, dim: usize) -> Self {
        Self { samples, horizon, dim, eps: vec![0.0; samples * horizon * dim] }
    }

    /// Wraps raw sample-major data.
    pub fn from_raw(samples: usize, horizon: usize, dim: usize, eps: Vec<f64>) -> Self {
        assert_eq!(eps.len(), samples * horizon * dim, "noise buffer has wrong length");
        Self { samples, horizon, dim, eps }
    }

    pub fn samples(&self) -> usize {
        self.samples
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// The T×m block of sample `k`, row-major.
    pub fn sample_slice(&self, k: usize) -> &[f64] {
        let stride = self.horizon * self.dim;
        &self.eps[k * stride..(k + 1) * stride]
    }

    pub fn sample_slice_mut(&mut self, k: usize) -> &mut [f64] {
        let stride = self.horizon * self.dim;
        &mut self.eps[k * stride..(k + 1) * stride]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.eps
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.eps
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_address_same_values() {
        assert_eq!(seeded_normal(7, 3, 4), seeded_normal(7, 3, 4));
    }

    #[test]
    fn streams_differ() {
        assert_ne!(seeded_normal(7, 3, 4), seeded_normal(7, 4, 4));
        assert_ne!(seeded_normal(7, 3, 4), seeded_normal(8, 3, 4));
    }

    #[test]
    fn zero_count() {
        assert!(seeded_normal(1, 1, 0).is_empty());
    }

    #[test]
    fn prefix_stable() {
        let long = seeded_normal(11, 2, 100);
        let short = seeded_normal(11, 2, 10);
        assert_eq!(&long[..10], &short[..]);
    }

    #[test]
    fn moments_of_a_million_draws() {
        let draws = seeded_normal(2024, 0, 1_000_000);
        let n = draws.len() as f64;
        let mean = draws.iter().sum::<f64>() / n;
        let var = draws.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        assert!(mean.abs() < 0.01, "mean {mean}");
        assert!((var - 1.0).abs() < 0.02, "var {var}");
    }

    #[test]
    fn scaled_batch_variance() {
        let std = [0.5, 2.0];
        let batch = NoiseBatch::sample(5, 9, 2000, 50, &std, ExecMode::Sequential);
        for (d, s) in std.iter().enumerate() {
            let vals: Vec<f64> =
                batch.as_slice().iter().skip(d).step_by(2).copied().collect();
            let n = vals.len() as f64;
            assert!(n >= 1e5);
            let var = vals.iter().map(|x| x * x).sum::<f64>() / n;
            let target = s * s;
            assert!((var - target).abs() / target < 0.03, "dim {d}: {var} vs {target}");
        }
    }

    #[test]
    fn batch_independent_of_exec_mode() {
        let a = NoiseBatch::sample(3, 1, 64, 10, &[1.0, 0.3], ExecMode::Sequential);
        let b = NoiseBatch::sample(3, 1, 64, 10, &[1.0, 0.3], ExecMode::Parallel);
        assert_eq!(a, b);
        let c = NoiseBatch::sample(3, 2, 64, 10, &[1.0, 0.3], ExecMode::Sequential);
        assert_ne!(a, c);
    }

    #[test]
    fn sample_k_is_its_own_stream() {
        let batch = NoiseBatch::sample(3, 1, 8, 5, &[1.0], ExecMode::Sequential);
        let direct = seeded_normal(derive_seed(3, 1), 6, 5);
        assert_eq!(batch.sample_slice(6), &direct[..]);
    }
}

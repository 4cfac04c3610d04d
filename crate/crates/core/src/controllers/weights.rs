use serde::{Deserialize, Serialize};

use super::ControlError;

/// Softmax weights `w_k ∝ exp(-(S_k - min S) / λ)`. Infinite (or NaN) costs
/// receive zero weight.
pub fn compute_weights(costs: &[f64], temperature: f64) -> Result<Vec<f64>, ControlError> {
    if !(temperature > 0.0) {
        return Err(ControlError::Config(format!("temperature must be positive, got {temperature}")));
    }
    let rho = costs.iter().copied().filter(|c| c.is_finite()).fold(f64::INFINITY, f64::min);
    if !rho.is_finite() {
        return Err(ControlError::DegenerateBatch);
    }
    let mut w: Vec<f64> =
        costs.iter().map(|&c| if c.is_finite() { (-(c - rho) / temperature).exp() } else { 0.0 }).collect();
    let eta: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= eta);
    Ok(w)
}

/// Per-step solver health figures.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SolverDiagnostics {
    pub min_cost: f64,
    pub mean_cost: f64,
    /// `1 / Σ w²`, in `[1, K]`.
    pub ess: f64,
    pub entropy: f64,
    pub diverged_fraction: f64,
    /// Set when every sample diverged and the previous plan was reused.
    pub degenerate: bool,
}

impl SolverDiagnostics {
    pub fn from_batch(costs: &[f64], weights: &[f64]) -> Self {
        let finite: Vec<f64> = costs.iter().copied().filter(|c| c.is_finite()).collect();
        let k = costs.len().max(1) as f64;
        let sum_sq: f64 = weights.iter().map(|w| w * w).sum();
        Self {
            min_cost: finite.iter().copied().fold(f64::INFINITY, f64::min),
            mean_cost: finite.iter().sum::<f64>() / finite.len().max(1) as f64,
            ess: if sum_sq > 0.0 { (1.0 / sum_sq).clamp(1.0, k) } else { 0.0 },
            entropy: -weights.iter().filter(|w| **w > 0.0).map(|w| w * w.ln()).sum::<f64>(),
            diverged_fraction: (costs.len() - finite.len()) as f64 / k,
            degenerate: false,
        }
    }

    pub fn degenerate(costs: &[f64]) -> Self {
        Self {
            min_cost: f64::INFINITY,
            mean_cost: f64::INFINITY,
            ess: 0.0,
            entropy: 0.0,
            diverged_fraction: if costs.is_empty() { 0.0 } else { 1.0 },
            degenerate: true,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_costs_uniform_weights() {
        let w = compute_weights(&[4.2, 4.2, 4.2], 0.7).unwrap();
        for x in w {
            assert!((x - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn log_two_gap() {
        let lambda = 0.37;
        let w = compute_weights(&[0.0, lambda * 2f64.ln()], lambda).unwrap();
        assert!((w[0] - 2.0 / 3.0).abs() < 1e-15);
        assert!((w[1] - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn shift_invariance() {
        let s = [1.0, 3.5, 0.2, 7.0];
        let shifted: Vec<f64> = s.iter().map(|c| c + 100.0).collect();
        let a = compute_weights(&s, 1.3).unwrap();
        let b = compute_weights(&shifted, 1.3).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-14);
        }
    }

    #[test]
    fn infinite_costs() {
        let w = compute_weights(&[f64::INFINITY, 1.0, f64::INFINITY], 1.0).unwrap();
        assert_eq!(w, vec![0.0, 1.0, 0.0]);
        assert!(matches!(compute_weights(&[f64::INFINITY; 3], 1.0), Err(ControlError::DegenerateBatch)));
        assert!(compute_weights(&[1.0], 0.0).is_err());
    }

    #[test]
    fn diagnostics_bounds() {
        let costs = [1.0, 2.0, f64::INFINITY, 0.5];
        let w = compute_weights(&costs, 1.0).unwrap();
        let d = SolverDiagnostics::from_batch(&costs, &w);
        assert!(d.ess >= 1.0 && d.ess <= 4.0);
        assert_eq!(d.diverged_fraction, 0.25);
        assert_eq!(d.min_cost, 0.5);
        let u = SolverDiagnostics::from_batch(&[3.0; 8], &[0.125; 8]);
        assert!((u.ess - 8.0).abs() < 1e-12);
        assert!((u.entropy - 8f64.ln()).abs() < 1e-12);
    }
}

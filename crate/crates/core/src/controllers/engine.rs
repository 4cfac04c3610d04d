//! Rollout evaluation shared by all solver variants.

use crate::costs::TaskCost;
use crate::dynamics::DynamicsModel;

/// Sum of stage costs over the states reached by `actions` (row-major `T×m`)
/// plus the terminal cost. Returns `+inf` if the model fails or any cost is
/// non-finite.
pub fn rollout_cost(model: &dyn DynamicsModel, cost: &dyn TaskCost, x0: &[f64], actions: &[f64]) -> f64 {
    let m = model.action_dim();
    let mut x = x0.to_vec();
    let mut next = vec![0.0; x0.len()];
    let mut cursor = cost.init_cursor(x0);
    let mut total = 0.0;
    for a in actions.chunks(m) {
        if model.step_into(&x, a, &mut next).is_err() {
            return f64::INFINITY;
        }
        std::mem::swap(&mut x, &mut next);
        total += cost.stage_cost(&x, &mut cursor);
    }
    total += cost.terminal_cost(&x, &mut cursor);
    if total.is_nan() {
        f64::INFINITY
    } else {
        total
    }
}

/// States visited by a rollout, `x0` first. Stops early on model failure.
pub fn rollout_states(model: &dyn DynamicsModel, x0: &[f64], actions: &[f64]) -> Vec<Vec<f64>> {
    let m = model.action_dim();
    let mut out = vec![x0.to_vec()];
    for a in actions.chunks(m) {
        match model.step(out.last().expect("non-empty"), a) {
            Ok(x) => out.push(x),
            Err(_) => break,
        }
    }
    out
}

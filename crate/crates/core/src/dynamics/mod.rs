//! Discrete-time forward models and the batch evaluation contract used by
//! parallel rollouts.

mod bicycle;
mod pendulum;

pub use bicycle::{bicycle_step, BicycleModel, BicycleParams, VehicleState};
pub use pendulum::{pendulum_energy, pendulum_step, PendulumModel, PendulumParams};

use thiserror::Error;

use crate::parallel::{self, ExecMode};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error("non-finite input")]
    NonFinite,
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("state diverged: {0}")]
    Diverged(String),
    #[error("invalid parameters: {0}")]
    Params(String),
}

/// A discrete-time model `x' = F(x, a)` with a fixed step `dt`.
///
/// `step_into` must be a pure function of its inputs.
pub trait DynamicsModel: Send + Sync {
    fn state_dim(&self) -> usize;
    fn action_dim(&self) -> usize;
    fn dt(&self) -> f64;

    fn step_into(&self, state: &[f64], action: &[f64], next: &mut [f64]) -> Result<(), DynamicsError>;

    fn step(&self, state: &[f64], action: &[f64]) -> Result<Vec<f64>, DynamicsError> {
        let mut next = vec![0.0; self.state_dim()];
        self.step_into(state, action, &mut next)?;
        Ok(next)
    }
}

impl<M: DynamicsModel + ?Sized> DynamicsModel for &M {
    fn state_dim(&self) -> usize {
        (**self).state_dim()
    }
    fn action_dim(&self) -> usize {
        (**self).action_dim()
    }
    fn dt(&self) -> f64 {
        (**self).dt()
    }
    fn step_into(&self, state: &[f64], action: &[f64], next: &mut [f64]) -> Result<(), DynamicsError> {
        (**self).step_into(state, action, next)
    }
}

impl<M: DynamicsModel + ?Sized> DynamicsModel for Box<M> {
    fn state_dim(&self) -> usize {
        (**self).state_dim()
    }
    fn action_dim(&self) -> usize {
        (**self).action_dim()
    }
    fn dt(&self) -> f64 {
        (**self).dt()
    }
    fn step_into(&self, state: &[f64], action: &[f64], next: &mut [f64]) -> Result<(), DynamicsError> {
        (**self).step_into(state, action, next)
    }
}

/// Result of stepping K states at once. Rows of diverged samples are NaN.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchOutput {
    pub states: Vec<f64>,
    pub diverged: Vec<bool>,
}

/// Steps K row-major states with K row-major actions. A failing sample is
/// flagged in `diverged`; it never aborts the batch.
pub fn batch_step(
    model: &dyn DynamicsModel,
    states: &[f64],
    actions: &[f64],
    mode: ExecMode,
) -> Result<BatchOutput, DynamicsError> {
    let (n, m) = (model.state_dim(), model.action_dim());
    if states.len() % n != 0 || actions.len() % m != 0 || states.len() / n != actions.len() / m {
        return Err(DynamicsError::Dimension(format!(
            "{} state values and {} action values for n={n}, m={m}",
            states.len(),
            actions.len()
        )));
    }
    let k = states.len() / n;
    let mut out = vec![0.0; k * n];
    let mut diverged = vec![false; k];
    let flags = parallel::map_indexed(k, mode, |i| {
        let mut next = vec![0.0; n];
        let ok = model.step_into(&states[i * n..(i + 1) * n], &actions[i * m..(i + 1) * m], &mut next);
        (next, ok.is_err())
    });
    for (i, (next, bad)) in flags.into_iter().enumerate() {
        if bad {
            out[i * n..(i + 1) * n].fill(f64::NAN);
        } else {
            out[i * n..(i + 1) * n].copy_from_slice(&next);
        }
        diverged[i] = bad;
    }
    Ok(BatchOutput { states: out, diverged })
}

/// One classical Runge–Kutta step of `f` for an `N`-dimensional state.
pub(crate) fn rk4<const N: usize>(x: &[f64; N], dt: f64, f: impl Fn(&[f64; N]) -> [f64; N]) -> [f64; N] {
    let k1 = f(x);
    let k2 = f(&axpy(x, 0.5 * dt, &k1));
    let k3 = f(&axpy(x, 0.5 * dt, &k2));
    let k4 = f(&axpy(x, dt, &k3));
    let mut out = *x;
    for i in 0..N {
        out[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out
}

fn axpy<const N: usize>(x: &[f64; N], a: f64, k: &[f64; N]) -> [f64; N] {
    let mut out = *x;
    for i in 0..N {
        out[i] += a * k[i];
    }
    out
}

pub(crate) fn check_dims(
    state: &[f64],
    action: &[f64],
    next: &[f64],
    n: usize,
    m: usize,
) -> Result<(), DynamicsError> {
    if state.len() != n || next.len() != n || action.len() != m {
        return Err(DynamicsError::Dimension(format!(
            "expected state {n} / action {m}, got {} / {} / out {}",
            state.len(),
            action.len(),
            next.len()
        )));
    }
    if state.iter().chain(action).any(|v| !v.is_finite()) {
        return Err(DynamicsError::NonFinite);
    }
    Ok(())
}

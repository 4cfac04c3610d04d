//! Sampling-based model predictive control.
//!
//! Three solvers share one rollout and weighting engine:
//!
//! * vanilla MPPI, which perturbs the action sequence directly,
//! * MPPI followed by an external smoothing filter (Savitzky–Golay or moving
//!   average),
//! * smooth MPPI, which perturbs the time derivative of the action, integrates
//!   it into actions inside every rollout, and penalises action differences as
//!   part of the trajectory cost.
//!
//! The [`benchmarks`] module runs these solvers closed-loop on a pendulum
//! swing-up and a variable-friction vehicle track, optionally with
//! neural-network dynamics trained by [`learning`].

pub mod benchmarks;
pub mod config;
pub mod controllers;
pub mod costs;
pub mod dynamics;
pub mod filters;
pub mod learning;
pub mod parallel;
pub mod rng;
pub mod types;

pub use config::{ConfigError, ControlCostConfig, SolverConfig};
pub use parallel::ExecMode;
pub use types::{ActionVector, Bounds, ControlSequence, StateVector};

//! Shared value types: states, actions, bounds and horizon sequences.

use std::ops::{Deref, DerefMut};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum TypeError {
    #[error("non-finite entry at index {0}")]
    NonFinite(usize),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("bound min must be below max in dimension {0}")]
    Bounds(usize),
    #[error("sequence horizon must be at least 2 (got {0})")]
    Horizon(usize),
    #[error("time step must be positive (got {0})")]
    TimeStep(f64),
}

fn check_finite(values: &[f64]) -> Result<(), TypeError> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(i) => Err(TypeError::NonFinite(i)),
        None => Ok(()),
    }
}

/// Task state. Angles are kept unwrapped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StateVector(Vec<f64>);

impl StateVector {
    pub fn new(values: Vec<f64>) -> Result<Self, TypeError> {
        check_finite(&values)?;
        Ok(Self(values))
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for StateVector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for StateVector {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

/// Commanded plant input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ActionVector(Vec<f64>);

impl ActionVector {
    pub fn new(values: Vec<f64>) -> Result<Self, TypeError> {
        check_finite(&values)?;
        Ok(Self(values))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(vec![0.0; dim])
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for ActionVector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for ActionVector {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

/// Per-dimension box `[min, max]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    min: Vec<f64>,
    max: Vec<f64>,
}

impl Bounds {
    pub fn new(min: Vec<f64>, max: Vec<f64>) -> Result<Self, TypeError> {
        if min.len() != max.len() {
            return Err(TypeError::Dimension { expected: min.len(), got: max.len() });
        }
        for (i, (lo, hi)) in min.iter().zip(&max).enumerate() {
            if lo.is_nan() || hi.is_nan() || lo >= hi {
                return Err(TypeError::Bounds(i));
            }
        }
        Ok(Self { min, max })
    }

    /// Symmetric box `[-limit, limit]`.
    pub fn symmetric(limit: &[f64]) -> Result<Self, TypeError> {
        Self::new(limit.iter().map(|l| -l).collect(), limit.to_vec())
    }

    pub fn unbounded(dim: usize) -> Self {
        Self { min: vec![f64::NEG_INFINITY; dim], max: vec![f64::INFINITY; dim] }
    }

    pub fn dim(&self) -> usize {
        self.min.len()
    }

    pub fn min(&self) -> &[f64] {
        &self.min
    }

    pub fn max(&self) -> &[f64] {
        &self.max
    }

    #[inline]
    pub fn clamp_dim(&self, d: usize, v: f64) -> f64 {
        v.clamp(self.min[d], self.max[d])
    }

    /// Clamps a row (or several concatenated rows) in place.
    pub fn clamp_in_place(&self, values: &mut [f64]) {
        let m = self.dim();
        for (i, v) in values.iter_mut().enumerate() {
            *v = self.clamp_dim(i % m, *v);
        }
    }

    pub fn contains(&self, values: &[f64]) -> bool {
        let m = self.dim();
        values.iter().enumerate().all(|(i, v)| *v >= self.min[i % m] && *v <= self.max[i % m])
    }
}

/// Length-T sequence of m-vectors on a uniform time grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlSequence {
    horizon: usize,
    dim: usize,
    dt: f64,
    data: Vec<f64>,
}

impl ControlSequence {
    pub fn zeros(horizon: usize, dim: usize, dt: f64) -> Result<Self, TypeError> {
        Self::constant(horizon, dt, &vec![0.0; dim])
    }

    pub fn constant(horizon: usize, dt: f64, value: &[f64]) -> Result<Self, TypeError> {
        let data = value.iter().copied().cycle().take(horizon * value.len()).collect();
        Self::from_flat(horizon, value.len(), dt, data)
    }

    pub fn from_rows(rows: &[Vec<f64>], dt: f64) -> Result<Self, TypeError> {
        let dim = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != dim) {
            return Err(TypeError::Dimension { expected: dim, got: bad.len() });
        }
        Self::from_flat(rows.len(), dim, dt, rows.concat())
    }

    pub fn from_flat(horizon: usize, dim: usize, dt: f64, data: Vec<f64>) -> Result<Self, TypeError> {
        if horizon < 2 {
            return Err(TypeError::Horizon(horizon));
        }
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(TypeError::TimeStep(dt));
        }
        if data.len() != horizon * dim {
            return Err(TypeError::Dimension { expected: horizon * dim, got: data.len() });
        }
        check_finite(&data)?;
        Ok(Self { horizon, dim, dt, data })
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn row(&self, t: usize) -> &[f64] {
        &self.data[t * self.dim..(t + 1) * self.dim]
    }

    pub fn row_mut(&mut self, t: usize) -> &mut [f64] {
        &mut self.data[t * self.dim..(t + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks(self.dim.max(1))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.rows().map(<[f64]>::to_vec).collect()
    }

    /// Receding-horizon warm start: drop the first row and repeat the last.
    pub fn shift(&mut self) {
        shift_rows(&mut self.data, self.dim);
    }
}

/// Drops row 0 of a row-major buffer and appends a copy of the last row.
pub fn shift_rows(data: &mut [f64], dim: usize) {
    if dim == 0 || data.len() <= dim {
        return;
    }
    data.copy_within(dim.., 0);
    let n = data.len();
    data.copy_within(n - 2 * dim..n - dim, n - dim);
}

/// Wraps an angle to `(-pi, pi]`.
pub fn wrap_angle(a: f64) -> f64 {
    use std::f64::consts::{PI, TAU};
    let mut w = a.rem_euclid(TAU);
    if w > PI {
        w -= TAU;
    }
    w
}

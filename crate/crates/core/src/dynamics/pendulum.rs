use serde::{Deserialize, Serialize};

use super::{check_dims, rk4, DynamicsError, DynamicsModel};

/// Point-mass pendulum with viscous damping. The angle is measured from the
/// downward equilibrium.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PendulumParams {
    pub mass: f64,
    pub length: f64,
    pub gravity: f64,
    pub damping: f64,
    pub max_torque: f64,
}

impl Default for PendulumParams {
    fn default() -> Self {
        Self { mass: 1.0, length: 1.0, gravity: 9.81, damping: 0.1, max_torque: 3.0 }
    }
}

impl PendulumParams {
    pub fn validate(&self) -> Result<(), DynamicsError> {
        let ok = self.mass > 0.0
            && self.length > 0.0
            && self.gravity > 0.0
            && self.damping >= 0.0
            && self.max_torque > 0.0
            && [self.mass, self.length, self.gravity, self.damping, self.max_torque]
                .iter()
                .all(|v| v.is_finite());
        if ok {
            Ok(())
        } else {
            Err(DynamicsError::Params(format!("{self:?}")))
        }
    }

    fn accel(&self, theta: f64, omega: f64, torque: f64) -> f64 {
        let ml2 = self.mass * self.length * self.length;
        (torque - self.damping * omega - self.mass * self.gravity * self.length * theta.sin()) / ml2
    }
}

/// Total mechanical energy, zero potential at the pivot height.
pub fn pendulum_energy(state: &[f64], params: &PendulumParams) -> f64 {
    let (theta, omega) = (state[0], state[1]);
    let ml = params.mass * params.length;
    0.5 * ml * params.length * omega * omega - ml * params.gravity * theta.cos()
}

/// One RK4 step of the pendulum. Torque is clamped to `±max_torque`.
pub fn pendulum_step(
    state: &[f64],
    action: &[f64],
    params: &PendulumParams,
    dt: f64,
) -> Result<[f64; 2], DynamicsError> {
    if !(dt > 0.0 && dt <= 0.1) {
        return Err(DynamicsError::InvalidInput(format!("dt {dt} outside (0, 0.1]")));
    }
    if state.len() != 2 || action.len() != 1 {
        return Err(DynamicsError::Dimension("pendulum expects n=2, m=1".into()));
    }
    if state.iter().chain(action).any(|v| !v.is_finite()) {
        return Err(DynamicsError::NonFinite);
    }
    let torque = action[0].clamp(-params.max_torque, params.max_torque);
    let next = rk4(&[state[0], state[1]], dt, |x| [x[1], params.accel(x[0], x[1], torque)]);
    if next.iter().all(|v| v.is_finite()) {
        Ok(next)
    } else {
        Err(DynamicsError::Diverged("pendulum state not finite".into()))
    }
}

/// Pendulum as a [`DynamicsModel`], integrating `substeps` RK4 steps per call.
#[derive(Debug, Clone, PartialEq)]
pub struct PendulumModel {
    pub params: PendulumParams,
    dt: f64,
    substeps: usize,
}

impl PendulumModel {
    pub fn new(params: PendulumParams, dt: f64, substeps: usize) -> Result<Self, DynamicsError> {
        params.validate()?;
        if substeps == 0 || !(dt > 0.0) || dt / substeps as f64 > 0.1 {
            return Err(DynamicsError::Params(format!("dt {dt} with {substeps} substeps")));
        }
        Ok(Self { params, dt, substeps })
    }
}

impl DynamicsModel for PendulumModel {
    fn state_dim(&self) -> usize {
        2
    }

    fn action_dim(&self) -> usize {
        1
    }

    fn dt(&self) -> f64 {
        self.dt
    }

    fn step_into(&self, state: &[f64], action: &[f64], next: &mut [f64]) -> Result<(), DynamicsError> {
        check_dims(state, action, next, 2, 1)?;
        let h = self.dt / self.substeps as f64;
        let mut x = [state[0], state[1]];
        for _ in 0..self.substeps {
            x = pendulum_step(&x, action, &self.params, h)?;
        }
        next.copy_from_slice(&x);
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn stable_equilibrium_is_fixed() {
        let p = PendulumParams::default();
        assert_eq!(pendulum_step(&[0.0, 0.0], &[0.0], &p, 0.05).unwrap(), [0.0, 0.0]);
    }

    #[test]
    fn unstable_equilibrium_drift_is_tiny() {
        let p = PendulumParams::default();
        let x = pendulum_step(&[PI, 0.0], &[0.0], &p, 0.01).unwrap();
        assert!((x[0] - PI).abs() < 1e-6);
    }

    #[test]
    fn matches_fine_euler() {
        let p = PendulumParams::default();
        let rk = pendulum_step(&[0.5, 0.0], &[1.0], &p, 0.05).unwrap();
        // forward Euler at h = 1e-6 as an independent oracle
        let (mut th, mut om) = (0.5f64, 0.0f64);
        let h = 1e-6;
        for _ in 0..50_000 {
            let acc = (1.0 - p.damping * om - p.mass * p.gravity * p.length * th.sin())
                / (p.mass * p.length * p.length);
            th += h * om;
            om += h * acc;
        }
        assert!((rk[0] - th).abs() < 1e-4, "{} vs {th}", rk[0]);
        assert!((rk[1] - om).abs() < 1e-4, "{} vs {om}", rk[1]);
    }

    #[test]
    fn undamped_energy_conserved() {
        let p = PendulumParams { damping: 0.0, ..Default::default() };
        let mut x = [1.0, 0.0];
        let e0 = pendulum_energy(&x, &p);
        for _ in 0..1000 {
            x = pendulum_step(&x, &[0.0], &p, 0.01).unwrap();
        }
        let e1 = pendulum_energy(&x, &p);
        assert!(((e1 - e0) / e0).abs() < 1e-5, "{e0} -> {e1}");
    }

    #[test]
    fn errors() {
        let p = PendulumParams::default();
        assert_eq!(pendulum_step(&[f64::NAN, 0.0], &[0.0], &p, 0.01), Err(DynamicsError::NonFinite));
        assert!(pendulum_step(&[0.0, 0.0], &[0.0], &p, 0.2).is_err());
        assert!(PendulumModel::new(PendulumParams { mass: 0.0, ..p.clone() }, 0.05, 5).is_err());
    }

    #[test]
    fn torque_is_saturated() {
        let p = PendulumParams::default();
        let a = pendulum_step(&[0.0, 0.0], &[100.0], &p, 0.05).unwrap();
        let b = pendulum_step(&[0.0, 0.0], &[p.max_torque], &p, 0.05).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn substeps_compose() {
        let p = PendulumParams::default();
        let model = PendulumModel::new(p.clone(), 0.05, 5).unwrap();
        let mut x = [0.3, -0.2];
        for _ in 0..5 {
            x = pendulum_step(&x, &[0.7], &p, 0.01).unwrap();
        }
        assert_eq!(model.step(&[0.3, -0.2], &[0.7]).unwrap(), x.to_vec());
    }
}

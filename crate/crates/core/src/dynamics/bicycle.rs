//! Single-track vehicle with linear tires clipped at the friction limit.
//!
//! State `[x, y, yaw, vx, yaw_rate, slip]` (m, m, rad, m/s, rad/s, rad),
//! action `[steering rad, throttle in [-1, 1]]`. Below `KINEMATIC_SPEED` the
//! tire model is replaced by kinematic rolling to avoid the slip-angle
//! singularity at standstill.

use serde::{Deserialize, Serialize};

use super::{check_dims, rk4, DynamicsError, DynamicsModel};

pub const KINEMATIC_SPEED: f64 = 1.0;
const MAX_SPEED: f64 = 100.0;
const MAX_YAW_RATE: f64 = 10.0;

/// Named view of a vehicle state row.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct VehicleState {
    pub x: f64,
    pub y: f64,
    pub yaw: f64,
    pub speed: f64,
    pub yaw_rate: f64,
    pub slip: f64,
}

impl VehicleState {
    pub const X: usize = 0;
    pub const Y: usize = 1;
    pub const YAW: usize = 2;
    pub const SPEED: usize = 3;
    pub const YAW_RATE: usize = 4;
    pub const SLIP: usize = 5;

    pub fn from_slice(s: &[f64]) -> Self {
        Self { x: s[0], y: s[1], yaw: s[2], speed: s[3], yaw_rate: s[4], slip: s[5] }
    }

    pub fn to_array(self) -> [f64; 6] {
        [self.x, self.y, self.yaw, self.speed, self.yaw_rate, self.slip]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BicycleParams {
    pub wheelbase: f64,
    pub cg_to_front: f64,
    pub cg_to_rear: f64,
    pub mass: f64,
    pub yaw_inertia: f64,
    pub cornering_stiffness_front: f64,
    pub cornering_stiffness_rear: f64,
    pub friction: f64,
    pub max_steering: f64,
    /// Force at throttle +1 (N).
    pub max_drive_force: f64,
    /// Force magnitude at throttle -1 (N).
    pub max_brake_force: f64,
    /// Aerodynamic drag, force = drag · vx² (N·s²/m²).
    #[serde(default)]
    pub drag: f64,
    #[serde(default = "default_gravity")]
    pub gravity: f64,
}

fn default_gravity() -> f64 {
    9.81
}

impl Default for BicycleParams {
    fn default() -> Self {
        Self {
            wheelbase: 2.6,
            cg_to_front: 1.2,
            cg_to_rear: 1.4,
            mass: 1500.0,
            yaw_inertia: 2250.0,
            cornering_stiffness_front: 80_000.0,
            cornering_stiffness_rear: 90_000.0,
            friction: 1.0,
            max_steering: 0.5,
            max_drive_force: 6000.0,
            max_brake_force: 9000.0,
            drag: 0.4,
            gravity: 9.81,
        }
    }
}

impl BicycleParams {
    pub fn validate(&self) -> Result<(), DynamicsError> {
        let err = |m: &str| Err(DynamicsError::Params(m.into()));
        if !(self.cg_to_front > 0.0 && self.cg_to_rear > 0.0) {
            return err("axle distances must be positive");
        }
        if (self.wheelbase - (self.cg_to_front + self.cg_to_rear)).abs() > 1e-9 {
            return err("wheelbase must equal cg_to_front + cg_to_rear");
        }
        if !(self.friction > 0.0 && self.friction <= 1.2) {
            return err("friction must lie in (0, 1.2]");
        }
        if !(self.cornering_stiffness_front > 0.0 && self.cornering_stiffness_rear > 0.0) {
            return err("cornering stiffnesses must be positive");
        }
        if !(self.mass > 0.0 && self.yaw_inertia > 0.0 && self.max_steering > 0.0 && self.gravity > 0.0) {
            return err("mass, inertia, steering limit and gravity must be positive");
        }
        if !(self.max_drive_force >= 0.0 && self.max_brake_force >= 0.0 && self.drag >= 0.0) {
            return err("force map entries must be non-negative");
        }
        Ok(())
    }

    pub fn with_friction(&self, friction: f64) -> Self {
        Self { friction, ..self.clone() }
    }

    fn drive_force(&self, throttle: f64) -> f64 {
        let t = throttle.clamp(-1.0, 1.0);
        if t >= 0.0 {
            t * self.max_drive_force
        } else {
            t * self.max_brake_force
        }
    }
}

fn dynamic_rates(x: &[f64; 6], p: &BicycleParams, steer: f64, drive: f64) -> [f64; 6] {
    let [_, _, yaw, vx, r, beta] = *x;
    let vx_eff = vx.max(KINEMATIC_SPEED * 0.5);
    let vy = vx_eff * beta.tan();
    let l = p.wheelbase;
    let mg = p.mass * p.gravity;
    let fz_front = mg * p.cg_to_rear / l;
    let fz_rear = mg * p.cg_to_front / l;
    let alpha_f = steer - (vy + p.cg_to_front * r).atan2(vx_eff);
    let alpha_r = -(vy - p.cg_to_rear * r).atan2(vx_eff);
    let fy_f = (p.cornering_stiffness_front * alpha_f).clamp(-p.friction * fz_front, p.friction * fz_front);
    let fy_r = (p.cornering_stiffness_rear * alpha_r).clamp(-p.friction * fz_rear, p.friction * fz_rear);
    let fx = (drive - p.drag * vx * vx).clamp(-p.friction * mg, p.friction * mg);
    let (ss, cs) = steer.sin_cos();
    let dvx = (fx - fy_f * ss) / p.mass + vy * r;
    let dvy = (fy_r + fy_f * cs) / p.mass - vx_eff * r;
    let dr = (p.cg_to_front * fy_f * cs - p.cg_to_rear * fy_r) / p.yaw_inertia;
    let dbeta = (vx_eff * dvy - vy * dvx) / (vx_eff * vx_eff + vy * vy);
    let (sy, cy) = yaw.sin_cos();
    [vx * cy - vx * beta.tan() * sy, vx * sy + vx * beta.tan() * cy, r, dvx, dr, dbeta]
}

fn kinematic_rates(x: &[f64; 6], p: &BicycleParams, steer: f64, drive: f64) -> [f64; 6] {
    let [_, _, yaw, vx, _, _] = *x;
    let tan_beta = p.cg_to_rear * steer.tan() / p.wheelbase;
    let fx = (drive - p.drag * vx * vx).clamp(-p.friction * p.mass * p.gravity, p.friction * p.mass * p.gravity);
    let mut dvx = fx / p.mass;
    if vx <= 0.0 && dvx < 0.0 {
        dvx = 0.0;
    }
    let (sy, cy) = yaw.sin_cos();
    [vx * (cy - tan_beta * sy), vx * (sy + tan_beta * cy), vx * steer.tan() / p.wheelbase, dvx, 0.0, 0.0]
}

/// One RK4 step of the vehicle. Steering is clamped to `±max_steering` and
/// throttle to `[-1, 1]`; speed never goes negative.
pub fn bicycle_step(
    state: &[f64],
    action: &[f64],
    params: &BicycleParams,
    dt: f64,
) -> Result<[f64; 6], DynamicsError> {
    if state.len() != 6 || action.len() != 2 {
        return Err(DynamicsError::Dimension("vehicle expects n=6, m=2".into()));
    }
    if state.iter().chain(action).any(|v| !v.is_finite()) {
        return Err(DynamicsError::NonFinite);
    }
    if state[VehicleState::SPEED] < 0.0 {
        return Err(DynamicsError::InvalidInput("negative speed".into()));
    }
    let steer = action[0].clamp(-params.max_steering, params.max_steering);
    let drive = params.drive_force(action[1]);
    let x0: [f64; 6] = state.try_into().expect("length checked");
    let mut next = if x0[VehicleState::SPEED] < KINEMATIC_SPEED {
        let mut next = rk4(&x0, dt, |x| kinematic_rates(x, params, steer, drive));
        let vx = next[VehicleState::SPEED].max(0.0);
        next[VehicleState::SPEED] = vx;
        next[VehicleState::YAW_RATE] = vx * steer.tan() / params.wheelbase;
        next[VehicleState::SLIP] = (params.cg_to_rear * steer.tan() / params.wheelbase).atan();
        next
    } else {
        rk4(&x0, dt, |x| dynamic_rates(x, params, steer, drive))
    };
    next[VehicleState::SPEED] = next[VehicleState::SPEED].max(0.0);
    if next.iter().any(|v| !v.is_finite())
        || next[VehicleState::SPEED] > MAX_SPEED
        || next[VehicleState::YAW_RATE].abs() > MAX_YAW_RATE
    {
        return Err(DynamicsError::Diverged(format!(
            "speed {:.3} m/s, yaw rate {:.3} rad/s",
            next[VehicleState::SPEED],
            next[VehicleState::YAW_RATE]
        )));
    }
    Ok(next)
}

/// Vehicle as a [`DynamicsModel`] with RK4 substepping.
#[derive(Debug, Clone, PartialEq)]
pub struct BicycleModel {
    pub params: BicycleParams,
    dt: f64,
    substeps: usize,
}

impl BicycleModel {
    pub fn new(params: BicycleParams, dt: f64, substeps: usize) -> Result<Self, DynamicsError> {
        params.validate()?;
        if substeps == 0 || !(dt > 0.0 && dt.is_finite()) {
            return Err(DynamicsError::Params(format!("dt {dt} with {substeps} substeps")));
        }
        Ok(Self { params, dt, substeps })
    }

    pub fn substeps(&self) -> usize {
        self.substeps
    }

    /// Same model on a surface with a different friction coefficient.
    pub fn with_friction(&self, friction: f64) -> Self {
        Self { params: self.params.with_friction(friction), ..self.clone() }
    }
}

impl DynamicsModel for BicycleModel {
    fn state_dim(&self) -> usize {
        6
    }

    fn action_dim(&self) -> usize {
        2
    }

    fn dt(&self) -> f64 {
        self.dt
    }

    fn step_into(&self, state: &[f64], action: &[f64], next: &mut [f64]) -> Result<(), DynamicsError> {
        check_dims(state, action, next, 6, 2)?;
        let h = self.dt / self.substeps as f64;
        let mut x: [f64; 6] = state.try_into().expect("length checked");
        for _ in 0..self.substeps {
            x = bicycle_step(&x, action, &self.params, h)?;
        }
        next.copy_from_slice(&x);
        Ok(())
    }
}

//! Ground-truth plant: a point-mass quadrotor tracking body-frame velocity
//! commands through a first-order lag.

use nalgebra::{UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::SpecError;
use crate::world::heading;
use crate::GRAVITY;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrueState {
    /// World frame (m).
    pub position: Vector3<f64>,
    /// World frame (m/s).
    pub velocity: Vector3<f64>,
    /// World-frame acceleration over the last step (m/s²); the IMU model reads it.
    pub acceleration: Vector3<f64>,
    pub attitude: UnitQuaternion<f64>,
    /// Body frame (rad/s).
    pub angular_rate: Vector3<f64>,
    pub time: f64,
}

impl TrueState {
    pub fn at_rest(position: Vector3<f64>, yaw: f64) -> Self {
        Self {
            position,
            velocity: Vector3::zeros(),
            acceleration: Vector3::zeros(),
            attitude: UnitQuaternion::from_euler_angles(0.0, 0.0, yaw),
            angular_rate: Vector3::zeros(),
            time: 0.0,
        }
    }

    pub fn yaw(&self) -> f64 {
        heading(&self.attitude)
    }
}

/// Body-frame velocity request: +x nose, +y left, +z up.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct VelocityCommand {
    pub v_body: Vector3<f64>,
    pub yaw_rate: f64,
}

impl VelocityCommand {
    pub const ZERO: Self = Self { v_body: Vector3::new(0.0, 0.0, 0.0), yaw_rate: 0.0 };

    pub fn new(v_body: Vector3<f64>, yaw_rate: f64) -> Self {
        Self { v_body, yaw_rate }
    }

    /// Clamp speed and yaw rate to the vehicle limits, preserving direction.
    pub fn saturate(self, limits: &VehicleParams) -> Self {
        let speed = self.v_body.norm();
        let v_body = if speed > limits.v_max { self.v_body * (limits.v_max / speed) } else { self.v_body };
        Self { v_body, yaw_rate: self.yaw_rate.clamp(-limits.yaw_rate_max, limits.yaw_rate_max) }
    }

    /// Command velocity expressed in the world frame for a body heading `yaw`.
    pub fn world_velocity(&self, yaw: f64) -> Vector3<f64> {
        let (s, c) = yaw.sin_cos();
        Vector3::new(c * self.v_body.x - s * self.v_body.y, s * self.v_body.x + c * self.v_body.y, self.v_body.z)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VehicleParams {
    /// Velocity-tracking time constant (s).
    pub tau: f64,
    pub v_max: f64,
    pub yaw_rate_max: f64,
}

impl Default for VehicleParams {
    fn default() -> Self {
        Self { tau: 0.3, v_max: 3.0, yaw_rate_max: 1.0 }
    }
}

impl VehicleParams {
    pub fn validate(&self) -> Result<(), SpecError> {
        if !(self.tau > 0.0) || !(self.v_max > 0.0) || !(self.yaw_rate_max > 0.0) {
            return Err(SpecError::invalid("vehicle tau, v_max and yaw_rate_max must be > 0"));
        }
        Ok(())
    }
}

/// Tilt that would point the thrust along the horizontal part of `accel`
/// (world frame) plus gravity, given the body heading. Vertical acceleration
/// is left out so a fast descent never flips the body. Returns `(roll, pitch)`.
fn horizontal_tilt(accel: &Vector3<f64>, yaw: f64) -> (f64, f64) {
    let (s, c) = yaw.sin_cos();
    // acceleration in the heading frame
    let hx = c * accel.x + s * accel.y;
    let hy = -s * accel.x + c * accel.y;
    let pitch = hx.atan2(GRAVITY);
    let roll = (-hy).atan2(hx.hypot(GRAVITY));
    (roll, pitch)
}

/// Advance the plant by `dt`. Velocity relaxes toward the rotated command,
/// position integrates the new velocity, heading integrates the yaw rate and
/// the body tilts with the horizontal acceleration.
pub fn step_dynamics(state: &TrueState, cmd: &VelocityCommand, params: &VehicleParams, dt: f64) -> TrueState {
    assert!(dt > 0.0, "dt must be positive");
    let cmd = cmd.saturate(params);
    let yaw = state.yaw();
    let target = cmd.world_velocity(yaw);
    let blend = (dt / params.tau).min(1.0);
    let mut velocity = state.velocity + (target - state.velocity) * blend;
    let mut position = state.position + velocity * dt;
    if position.z < 0.0 {
        position.z = 0.0;
        velocity.z = velocity.z.max(0.0);
    }
    let acceleration = (velocity - state.velocity) / dt;
    let new_yaw = yaw + cmd.yaw_rate * dt;
    let (roll, pitch) = horizontal_tilt(&acceleration, new_yaw);
    let attitude = UnitQuaternion::new_normalize(*UnitQuaternion::from_euler_angles(roll, pitch, new_yaw).quaternion());
    // body rate that carries the old attitude onto the new one over dt
    let delta = state.attitude.inverse() * attitude;
    let angular_rate = delta.scaled_axis() / dt;
    TrueState { position, velocity, acceleration, attitude, angular_rate, time: state.time + dt }
}

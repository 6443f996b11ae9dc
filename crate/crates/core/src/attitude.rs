//! Complementary attitude filter.
//!
//! Gyro rates rotate the previous quaternion; its Z-Y-X Euler angles are then
//! blended, angle by angle, with roll/pitch from the gravity direction and yaw
//! from the magnetometer levelled by the blended tilt. The blended triple is converted to a unit
//! quaternion after every step.

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::{UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::SpecError;
use crate::sensors::ImuSample;
use crate::GRAVITY;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum AttitudeError {
    #[error("gravity unobservable: specific force magnitude at or below 0.1 g")]
    GravityUnobservable,
    #[error("magnetic degeneracy: horizontal field component vanishes")]
    MagneticDegeneracy,
}

/// Wrap an angle into `(-pi, pi]`.
pub fn wrap_angle(a: f64) -> f64 {
    let w = a.rem_euclid(2.0 * PI);
    if w > PI {
        w - 2.0 * PI
    } else {
        w
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttitudeEstimate {
    pub roll: f64,
    pub pitch: f64,
    pub yaw: f64,
    pub quat: UnitQuaternion<f64>,
    pub time: f64,
}

impl AttitudeEstimate {
    pub fn from_euler(roll: f64, pitch: f64, yaw: f64, time: f64) -> Self {
        let roll = wrap_angle(roll);
        let pitch = pitch.clamp(-FRAC_PI_2, FRAC_PI_2);
        let yaw = wrap_angle(yaw);
        let quat = UnitQuaternion::new_normalize(*UnitQuaternion::from_euler_angles(roll, pitch, yaw).quaternion());
        Self { roll, pitch, yaw, quat, time }
    }

    pub fn level(yaw: f64) -> Self {
        Self::from_euler(0.0, 0.0, yaw, 0.0)
    }

    /// Attitude from a single accelerometer/magnetometer reading.
    pub fn from_measurement(imu: &ImuSample) -> Result<Self, AttitudeError> {
        let (roll, pitch) = accel_roll_pitch(&imu.accel)?;
        let yaw = mag_yaw(&imu.mag, roll, pitch)?;
        Ok(Self::from_euler(roll, pitch, yaw, imu.time))
    }
}

/// Blend weight on the gyro-propagated angles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct ComplementaryGain(f64);

impl TryFrom<f64> for ComplementaryGain {
    type Error = SpecError;

    fn try_from(alpha: f64) -> Result<Self, SpecError> {
        Self::new(alpha)
    }
}

impl From<ComplementaryGain> for f64 {
    fn from(g: ComplementaryGain) -> f64 {
        g.0
    }
}

impl ComplementaryGain {
    pub fn new(alpha: f64) -> Result<Self, SpecError> {
        if (0.0..=1.0).contains(&alpha) {
            Ok(Self(alpha))
        } else {
            Err(SpecError::invalid(format!("complementary alpha must lie in [0, 1], got {alpha}")))
        }
    }

    pub fn alpha(self) -> f64 {
        self.0
    }
}

impl Default for ComplementaryGain {
    fn default() -> Self {
        Self(0.98)
    }
}

/// Roll and pitch from the gravity reaction seen by the accelerometer
/// (hover reads `(0, 0, +g)`).
pub fn accel_roll_pitch(accel: &Vector3<f64>) -> Result<(f64, f64), AttitudeError> {
    if accel.norm() <= 0.1 * GRAVITY {
        return Err(AttitudeError::GravityUnobservable);
    }
    let roll = accel.y.atan2(accel.z);
    let pitch = (-accel.x).atan2(accel.y.hypot(accel.z));
    Ok((roll, pitch))
}

/// Roll and pitch that rotate the measured specific force onto `expected`,
/// the world-frame specific force `a + g z` predicted for this instant, with
/// heading held at `yaw`. Of the two roll solutions the one nearer `roll_hint`
/// wins. With `expected` straight up this is [`accel_roll_pitch`].
pub fn aided_roll_pitch(
    accel: &Vector3<f64>,
    expected: &Vector3<f64>,
    yaw: f64,
    roll_hint: f64,
) -> Result<(f64, f64), AttitudeError> {
    if accel.norm() <= 0.1 * GRAVITY || expected.norm() <= 0.1 * GRAVITY {
        return Err(AttitudeError::GravityUnobservable);
    }
    let f = accel.normalize();
    let e = (UnitQuaternion::from_axis_angle(&Vector3::z_axis(), -yaw) * expected).normalize();
    // Ry(pitch) Rx(roll) f = e; the y row fixes roll, the x-z plane then fixes pitch
    let rho = f.y.hypot(f.z);
    if rho < 1e-9 {
        return Err(AttitudeError::GravityUnobservable);
    }
    let phi = f.z.atan2(f.y);
    let c = (e.y / rho).clamp(-1.0, 1.0).acos();
    let (r1, r2) = (wrap_angle(c - phi), wrap_angle(-c - phi));
    let roll = if wrap_angle(r1 - roll_hint).abs() <= wrap_angle(r2 - roll_hint).abs() { r1 } else { r2 };
    let z1 = f.y * roll.sin() + f.z * roll.cos();
    let pitch = wrap_angle(e.x.atan2(e.z) - f.x.atan2(z1));
    Ok((roll, pitch))
}

/// Heading from a unit magnetometer vector after levelling it by `roll` and `pitch`.
/// Yaw 0 means the body x axis points at magnetic north.
pub fn mag_yaw(mag: &Vector3<f64>, roll: f64, pitch: f64) -> Result<f64, AttitudeError> {
    let (sr, cr) = roll.sin_cos();
    let (sp, cp) = pitch.sin_cos();
    let mx = mag.x * cp + (mag.y * sr + mag.z * cr) * sp;
    let my = mag.y * cr - mag.z * sr;
    if mx.hypot(my) < 1e-6 {
        return Err(AttitudeError::MagneticDegeneracy);
    }
    Ok((-my).atan2(mx))
}

/// `alpha * propagated + (1 - alpha) * measured`, taken along the short arc.
fn blend_angle(propagated: f64, measured: f64, alpha: f64) -> f64 {
    if alpha == 1.0 {
        return propagated;
    }
    if alpha == 0.0 {
        return measured;
    }
    wrap_angle(measured + alpha * wrap_angle(propagated - measured))
}

fn blend_linear(propagated: f64, measured: f64, alpha: f64) -> f64 {
    alpha * propagated + (1.0 - alpha) * measured
}

pub fn complementary_step(
    prev: &AttitudeEstimate,
    imu: &ImuSample,
    gain: ComplementaryGain,
    dt: f64,
) -> AttitudeEstimate {
    blend_step(prev, imu, gain, dt, None)
}

/// As [`complementary_step`], but the tilt measurement assumes the vehicle is
/// accelerating at `accel_world` rather than at rest.
pub fn complementary_step_aided(
    prev: &AttitudeEstimate,
    imu: &ImuSample,
    gain: ComplementaryGain,
    dt: f64,
    accel_world: &Vector3<f64>,
) -> AttitudeEstimate {
    blend_step(prev, imu, gain, dt, Some(accel_world))
}

fn blend_step(
    prev: &AttitudeEstimate,
    imu: &ImuSample,
    gain: ComplementaryGain,
    dt: f64,
    accel_world: Option<&Vector3<f64>>,
) -> AttitudeEstimate {
    assert!(dt > 0.0, "dt must be positive");
    let alpha = gain.alpha();
    let propagated = prev.quat * UnitQuaternion::from_scaled_axis(imu.gyro * dt);
    let (roll_g, pitch_g, yaw_g) = propagated.euler_angles();

    let measured = match accel_world {
        None => accel_roll_pitch(&imu.accel),
        Some(a) => aided_roll_pitch(&imu.accel, &(a + Vector3::new(0.0, 0.0, GRAVITY)), yaw_g, roll_g),
    };
    let (roll, pitch) = match measured {
        Ok((r, p)) => (blend_angle(roll_g, r, alpha), blend_linear(pitch_g, p, alpha)),
        Err(_) => (roll_g, pitch_g),
    };
    let yaw = match mag_yaw(&imu.mag, roll, pitch) {
        Ok(y) => blend_angle(yaw_g, y, alpha),
        Err(_) => yaw_g,
    };
    AttitudeEstimate::from_euler(roll, pitch, yaw, imu.time)
}

/// Stateful wrapper over [`complementary_step`].
#[derive(Debug, Clone)]
pub struct ComplementaryFilter {
    gain: ComplementaryGain,
    estimate: AttitudeEstimate,
}

impl ComplementaryFilter {
    pub fn new(gain: ComplementaryGain, initial: AttitudeEstimate) -> Self {
        Self { gain, estimate: initial }
    }

    pub fn update(&mut self, imu: &ImuSample, dt: f64) -> &AttitudeEstimate {
        self.estimate = complementary_step(&self.estimate, imu, self.gain, dt);
        &self.estimate
    }

    pub fn update_aided(&mut self, imu: &ImuSample, dt: f64, accel_world: &Vector3<f64>) -> &AttitudeEstimate {
        self.estimate = complementary_step_aided(&self.estimate, imu, self.gain, dt, accel_world);
        &self.estimate
    }

    pub fn estimate(&self) -> &AttitudeEstimate {
        &self.estimate
    }
}

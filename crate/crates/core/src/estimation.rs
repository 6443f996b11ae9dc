//! Per-axis linear Kalman filter over `[position, velocity, acceleration]`
//! driven by the two IMUs' world-frame accelerations, plus the unfiltered
//! double-integration baseline.
//!
//! Two motion models are available. [`MotionModel::ConstantAcceleration`] is
//! the textbook kinematic chain. [`MotionModel::VelocityTracking`] adds the
//! plant's known velocity-tracking lag, `a = (v_cmd - v) / tau`, so the
//! commanded velocity acts as a control input and the measured acceleration
//! pins down velocity. Without it, acceleration-only measurements leave
//! velocity and position unobservable and the filter drifts exactly like
//! dead reckoning.

use nalgebra::{Matrix2, Matrix2x3, Matrix3, Matrix3x2, Vector2, Vector3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::attitude::AttitudeEstimate;
use crate::error::SpecError;
use crate::sensors::{gravity_vector, ImuSample};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum KalmanError {
    #[error("innovation covariance is singular; the measurement noise R must be invertible")]
    SingularInnovation,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MotionModel {
    ConstantAcceleration,
    /// Acceleration relaxes toward `(v_cmd - v) / tau`.
    VelocityTracking {
        tau: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KalmanConfig {
    pub q: Matrix3<f64>,
    pub r: Matrix2<f64>,
    pub x0: Vector3<f64>,
    pub p0: Matrix3<f64>,
    pub model: MotionModel,
}

impl KalmanConfig {
    pub fn from_diagonals(q: [f64; 3], r: [f64; 2], p0: [f64; 3], model: MotionModel) -> Self {
        Self {
            q: Matrix3::from_diagonal(&Vector3::from(q)),
            r: Matrix2::from_diagonal(&Vector2::from(r)),
            x0: Vector3::zeros(),
            p0: Matrix3::from_diagonal(&Vector3::from(p0)),
            model,
        }
    }

    pub fn validate(&self) -> Result<(), SpecError> {
        let sym3 =
            (self.q - self.q.transpose()).abs().max() < 1e-12 && (self.p0 - self.p0.transpose()).abs().max() < 1e-12;
        let sym2 = (self.r - self.r.transpose()).abs().max() < 1e-12;
        if !sym3 || !sym2 {
            return Err(SpecError::invalid("Q, R and P0 must be symmetric"));
        }
        let psd3 = |m: &Matrix3<f64>| m.symmetric_eigenvalues().iter().all(|&e| e >= -1e-12);
        if !psd3(&self.q) || !psd3(&self.p0) {
            return Err(SpecError::invalid("Q and P0 must be positive semi-definite"));
        }
        let r_eig = self.r.symmetric_eigenvalues();
        if r_eig.iter().any(|&e| e <= 0.0) {
            return Err(SpecError::invalid("R must be positive definite"));
        }
        if let MotionModel::VelocityTracking { tau } = self.model {
            if !(tau > 0.0) {
                return Err(SpecError::invalid("motion model tau must be > 0"));
            }
        }
        Ok(())
    }
}

/// Filter state for one world axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KalmanState {
    /// `[position, velocity, acceleration]`
    pub x: Vector3<f64>,
    pub p: Matrix3<f64>,
    pub time: f64,
}

impl KalmanState {
    pub fn new(x: Vector3<f64>, p: Matrix3<f64>) -> Self {
        Self { x, p, time: 0.0 }
    }

    pub fn initial(cfg: &KalmanConfig) -> Self {
        Self::new(cfg.x0, cfg.p0)
    }
}

/// Measurement matrix: both IMUs observe the acceleration component.
pub fn measurement_matrix() -> Matrix2x3<f64> {
    Matrix2x3::new(0.0, 0.0, 1.0, 0.0, 0.0, 1.0)
}

/// State transition `F` and control column `B` for one step.
pub fn transition(model: MotionModel, dt: f64) -> (Matrix3<f64>, Vector3<f64>) {
    match model {
        MotionModel::ConstantAcceleration => {
            (Matrix3::new(1.0, dt, dt * dt / 2.0, 0.0, 1.0, dt, 0.0, 0.0, 1.0), Vector3::zeros())
        }
        MotionModel::VelocityTracking { tau } => (
            Matrix3::new(1.0, dt, dt * dt / 2.0, 0.0, 1.0, dt, 0.0, -1.0 / tau, -dt / tau),
            Vector3::new(0.0, 0.0, 1.0 / tau),
        ),
    }
}

fn symmetrize(p: &Matrix3<f64>) -> Matrix3<f64> {
    (p + p.transpose()) * 0.5
}

/// Predict step. `command` is the commanded velocity on this axis; the
/// constant-acceleration model ignores it.
pub fn kalman_predict(state: &KalmanState, cfg: &KalmanConfig, dt: f64, command: f64) -> KalmanState {
    assert!(dt > 0.0, "dt must be positive");
    let (f, b) = transition(cfg.model, dt);
    KalmanState {
        x: f * state.x + b * command,
        p: symmetrize(&(f * state.p * f.transpose() + cfg.q)),
        time: state.time + dt,
    }
}

fn gain(state: &KalmanState, cfg: &KalmanConfig) -> Result<Matrix3x2<f64>, KalmanError> {
    let h = measurement_matrix();
    let s = h * state.p * h.transpose() + cfg.r;
    let s_inv = s.try_inverse().ok_or(KalmanError::SingularInnovation)?;
    if !s_inv.iter().all(|v| v.is_finite()) {
        return Err(KalmanError::SingularInnovation);
    }
    Ok(state.p * h.transpose() * s_inv)
}

/// Update with the two IMUs' accelerations on this axis.
pub fn kalman_update(state: &KalmanState, z: [f64; 2], cfg: &KalmanConfig) -> Result<KalmanState, KalmanError> {
    let h = measurement_matrix();
    let k = gain(state, cfg)?;
    let innovation = Vector2::from(z) - h * state.x;
    let p = (Matrix3::identity() - k * h) * state.p;
    Ok(KalmanState { x: state.x + k * innovation, p: symmetrize(&p), time: state.time })
}

/// Joseph-form covariance update, numerically robust reference.
pub fn joseph_covariance(state: &KalmanState, cfg: &KalmanConfig) -> Result<Matrix3<f64>, KalmanError> {
    let h = measurement_matrix();
    let k = gain(state, cfg)?;
    let a = Matrix3::identity() - k * h;
    Ok(a * state.p * a.transpose() + k * cfg.r * k.transpose())
}

/// Specific force rotated into the world frame with gravity removed.
pub fn world_accel(imu: &ImuSample, att: &AttitudeEstimate) -> Vector3<f64> {
    att.quat * imu.accel + gravity_vector()
}

/// Trapezoidal double integration from rest at the origin. One position per input sample.
pub fn dead_reckon(accel: &[Vector3<f64>], dt: f64) -> Vec<Vector3<f64>> {
    let mut dr = DeadReckoner::new(Vector3::zeros(), Vector3::zeros());
    accel.iter().map(|a| dr.push(*a, dt)).collect()
}

/// Online form of [`dead_reckon`].
#[derive(Debug, Clone)]
pub struct DeadReckoner {
    position: Vector3<f64>,
    velocity: Vector3<f64>,
    last_accel: Option<Vector3<f64>>,
}

impl DeadReckoner {
    pub fn new(position: Vector3<f64>, velocity: Vector3<f64>) -> Self {
        Self { position, velocity, last_accel: None }
    }

    /// Feed the next acceleration sample; the first sample only anchors the integration.
    pub fn push(&mut self, accel: Vector3<f64>, dt: f64) -> Vector3<f64> {
        if let Some(prev) = self.last_accel {
            let v_next = self.velocity + (prev + accel) * (dt / 2.0);
            self.position += (self.velocity + v_next) * (dt / 2.0);
            self.velocity = v_next;
        }
        self.last_accel = Some(accel);
        self.position
    }

    pub fn position(&self) -> Vector3<f64> {
        self.position
    }
}

/// Three independent axis filters.
#[derive(Debug, Clone)]
pub struct PositionEstimator {
    cfg: KalmanConfig,
    axes: [KalmanState; 3],
}

impl PositionEstimator {
    pub fn new(cfg: KalmanConfig, position: Vector3<f64>, velocity: Vector3<f64>) -> Self {
        let axis = |k: usize| {
            let mut s = KalmanState::initial(&cfg);
            s.x[0] += position[k];
            s.x[1] += velocity[k];
            s
        };
        Self { cfg, axes: [axis(0), axis(1), axis(2)] }
    }

    pub fn config(&self) -> &KalmanConfig {
        &self.cfg
    }

    pub fn axis(&self, k: usize) -> &KalmanState {
        &self.axes[k]
    }

    /// One predict/update cycle with world accelerations from both IMUs and
    /// the world-frame velocity command.
    pub fn step(
        &mut self,
        accel_1: &Vector3<f64>,
        accel_2: &Vector3<f64>,
        command: &Vector3<f64>,
        dt: f64,
    ) -> Result<(), KalmanError> {
        self.predict(command, dt);
        self.correct(accel_1, accel_2)
    }

    /// Time update only; returns the predicted world acceleration.
    pub fn predict(&mut self, command: &Vector3<f64>, dt: f64) -> Vector3<f64> {
        for k in 0..3 {
            self.axes[k] = kalman_predict(&self.axes[k], &self.cfg, dt, command[k]);
        }
        self.acceleration()
    }

    /// Measurement update with world accelerations from both IMUs.
    pub fn correct(&mut self, accel_1: &Vector3<f64>, accel_2: &Vector3<f64>) -> Result<(), KalmanError> {
        for k in 0..3 {
            self.axes[k] = kalman_update(&self.axes[k], [accel_1[k], accel_2[k]], &self.cfg)?;
        }
        Ok(())
    }

    pub fn acceleration(&self) -> Vector3<f64> {
        Vector3::new(self.axes[0].x[2], self.axes[1].x[2], self.axes[2].x[2])
    }

    pub fn position(&self) -> Vector3<f64> {
        Vector3::new(self.axes[0].x[0], self.axes[1].x[0], self.axes[2].x[0])
    }

    pub fn velocity(&self) -> Vector3<f64> {
        Vector3::new(self.axes[0].x[1], self.axes[1].x[1], self.axes[2].x[1])
    }
}

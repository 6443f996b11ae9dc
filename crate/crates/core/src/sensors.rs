//! Noisy IMU model: gyro, accelerometer and magnetometer with Gaussian white
//! noise and a constant per-run bias.

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::SpecError;
use crate::vehicle::TrueState;
use crate::GRAVITY;

/// Magnetic north in the world frame (no declination or dip).
pub const MAG_NORTH: Vector3<f64> = Vector3::new(1.0, 0.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ImuId {
    One = 1,
    Two = 2,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImuSample {
    pub imu: ImuId,
    /// Body angular rate (rad/s).
    pub gyro: Vector3<f64>,
    /// Body specific force (m/s²).
    pub accel: Vector3<f64>,
    /// Unit magnetic field direction in the body frame.
    pub mag: Vector3<f64>,
    pub time: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ImuNoiseSpec {
    pub gyro_noise_std: f64,
    pub gyro_bias: [f64; 3],
    pub accel_noise_std: f64,
    pub accel_bias: [f64; 3],
    pub mag_noise_std: f64,
    #[serde(skip)]
    pub seed: u64,
}

impl Default for ImuNoiseSpec {
    fn default() -> Self {
        Self {
            gyro_noise_std: 0.005,
            gyro_bias: [0.0, 0.0, 0.01],
            accel_noise_std: 0.05,
            accel_bias: [0.02, 0.0, 0.0],
            mag_noise_std: 0.01,
            seed: 0,
        }
    }
}

impl ImuNoiseSpec {
    pub fn noiseless() -> Self {
        Self {
            gyro_noise_std: 0.0,
            gyro_bias: [0.0; 3],
            accel_noise_std: 0.0,
            accel_bias: [0.0; 3],
            mag_noise_std: 0.0,
            seed: 0,
        }
    }

    /// True when every noise level and bias is zero; the seed is ignored.
    pub fn is_noiseless(&self) -> bool {
        *self == Self { seed: self.seed, ..Self::noiseless() }
    }

    pub fn validate(&self) -> Result<(), SpecError> {
        let stds = [self.gyro_noise_std, self.accel_noise_std, self.mag_noise_std];
        if stds.iter().any(|s| !(*s >= 0.0 && s.is_finite())) {
            return Err(SpecError::invalid("noise standard deviations must be finite and >= 0"));
        }
        if self.gyro_bias.iter().chain(&self.accel_bias).any(|b| !b.is_finite()) {
            return Err(SpecError::invalid("sensor biases must be finite"));
        }
        Ok(())
    }
}

/// One IMU with its own noise stream.
#[derive(Debug, Clone)]
pub struct Imu {
    id: ImuId,
    spec: ImuNoiseSpec,
    rng: ChaCha8Rng,
}

impl Imu {
    pub fn new(id: ImuId, spec: ImuNoiseSpec) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        rng.set_stream(id as u64);
        Self { id, spec, rng }
    }

    pub fn id(&self) -> ImuId {
        self.id
    }

    pub fn spec(&self) -> &ImuNoiseSpec {
        &self.spec
    }

    fn white(&mut self, std: f64) -> Vector3<f64> {
        if std == 0.0 {
            return Vector3::zeros();
        }
        let mut draw = || -> f64 { self.rng.sample::<f64, _>(StandardNormal) * std };
        Vector3::new(draw(), draw(), draw())
    }

    pub fn sample(&mut self, state: &TrueState) -> ImuSample {
        let spec = self.spec;
        let to_body = state.attitude.inverse();
        let gyro = state.angular_rate + Vector3::from(spec.gyro_bias) + self.white(spec.gyro_noise_std);
        let specific = to_body * (state.acceleration - gravity_vector());
        let accel = specific + Vector3::from(spec.accel_bias) + self.white(spec.accel_noise_std);
        let mag = (to_body * MAG_NORTH + self.white(spec.mag_noise_std)).normalize();
        ImuSample { imu: self.id, gyro, accel, mag, time: state.time }
    }
}

/// Gravity acceleration in the world frame, pointing down.
pub fn gravity_vector() -> Vector3<f64> {
    Vector3::new(0.0, 0.0, -GRAVITY)
}

//! Wheel odometry and gyro readings.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rowfollow_core::ControlInput;

use crate::spec::NoiseSpec;

/// `v (1 + odom_frac n1)` and `omega + gyro_sigma n2`. Both normals are drawn
/// on every call.
pub fn sensor_readings(true_v: f64, true_omega: f64, rng: &mut ChaCha8Rng, noise: &NoiseSpec) -> ControlInput<f64> {
    let n1: f64 = rng.sample(StandardNormal);
    let n2: f64 = rng.sample(StandardNormal);
    ControlInput::new(true_v * (1.0 + noise.odom_frac * n1), true_omega + noise.gyro_sigma * n2)
}

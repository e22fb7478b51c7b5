//! Raycast model of the front planar LiDAR.

use std::sync::OnceLock;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rowfollow_core::geometry::{DEFAULT_BEAM_COUNT, DEFAULT_MAX_RANGE};
use rowfollow_core::LaserScan;

use crate::field::Field;
use crate::robot::RobotPose;
use crate::spec::NoiseSpec;

/// Beam `(sin, cos)` in the robot frame.
static BEAM_DIRECTIONS: OnceLock<Vec<(f64, f64)>> = OnceLock::new();

/// Closest range the sensor reports when noise pushes a return toward zero.
const MIN_RANGE: f64 = 1e-3;

/// One sweep from the sensor at the robot origin. Every beam draws its noise
/// and dropout samples whether or not it hits, so the stream position depends
/// only on the number of scans taken.
pub fn raycast_scan(
    field: &Field,
    pose: &RobotPose,
    timestamp: f64,
    rate_hz: f64,
    noise: &NoiseSpec,
    rng: &mut ChaCha8Rng,
) -> LaserScan<f64> {
    let mut scan = LaserScan::new(timestamp, rate_hz, vec![0.0; DEFAULT_BEAM_COUNT]);
    let sentinel = scan.no_return();
    let beams = BEAM_DIRECTIONS.get_or_init(|| (0..DEFAULT_BEAM_COUNT).map(|i| scan.beam_angle(i).sin_cos()).collect());
    let (sh, ch) = pose.heading.sin_cos();
    for (i, &(sb, cb)) in beams.iter().enumerate() {
        let n: f64 = rng.sample(StandardNormal);
        let u: f64 = rng.random();
        let dir = (cb * ch - sb * sh, sb * ch + cb * sh);
        let hit = field.cast_dir(pose.x, pose.y, dir, DEFAULT_MAX_RANGE);
        scan.ranges[i] = match hit {
            Some(_) if u < noise.dropout_prob => sentinel,
            Some(r) => {
                let noisy = r + noise.range_sigma * n;
                if noisy > DEFAULT_MAX_RANGE {
                    sentinel
                } else {
                    noisy.max(MIN_RANGE)
                }
            }
            None => sentinel,
        };
    }
    scan
}

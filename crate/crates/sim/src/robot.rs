//! Unicycle robot with exact arc integration.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rowfollow_core::{wrap_angle, Command};
use serde::{Deserialize, Serialize};

use crate::centerline::Centerline;
use crate::spec::NoiseSpec;

/// Footprint length and width, meters, centered on the robot origin.
pub const FOOTPRINT: (f64, f64) = (0.54, 0.32);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RobotPose {
    pub x: f64,
    pub y: f64,
    pub heading: f64,
    pub arc_progress: f64,
}

impl RobotPose {
    /// Centered on the lane and aligned with it at `station`.
    pub fn on_centerline(center: &Centerline, station: f64) -> Self {
        let p = center.pose_at(station);
        RobotPose { x: p.x, y: p.y, heading: p.heading, arc_progress: station }
    }
}

/// Velocities the robot actually executed over a step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Motion {
    pub v: f64,
    pub omega: f64,
}

/// Closed-form pose after driving `v`, `omega` for `dt`.
pub fn integrate(pose: &RobotPose, v: f64, omega: f64, dt: f64) -> (f64, f64, f64) {
    let h = pose.heading;
    if omega.abs() < 1e-9 {
        return (pose.x + v * dt * h.cos(), pose.y + v * dt * h.sin(), h);
    }
    let h1 = h + omega * dt;
    let r = v / omega;
    (pose.x + r * (h1.sin() - h.sin()), pose.y - r * (h1.cos() - h.cos()), wrap_angle(h1))
}

/// Applies a command for `dt` seconds. Yaw-rate actuation noise is drawn on
/// every call.
pub fn robot_step(
    pose: &RobotPose,
    cmd: &Command<f64>,
    dt: f64,
    rng: &mut ChaCha8Rng,
    noise: &NoiseSpec,
    center: &Centerline,
) -> (RobotPose, Motion) {
    assert!(dt > 0.0, "robot_step needs a positive dt");
    let n: f64 = rng.sample(StandardNormal);
    let motion = Motion { v: cmd.v_x_cmd, omega: cmd.omega_cmd + noise.actuation_sigma * n };
    let (x, y, heading) = integrate(pose, motion.v, motion.omega, dt);
    let arc_progress = center.project(x, y).station.clamp(0.0, center.length());
    (RobotPose { x, y, heading, arc_progress }, motion)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn origin() -> RobotPose {
        RobotPose { x: 0.0, y: 0.0, heading: 0.0, arc_progress: 0.0 }
    }

    #[test]
    fn straight_and_spin() {
        let (x, y, h) = integrate(&origin(), 0.7, 0.0, 0.025);
        assert!((x - 0.0175).abs() < 1e-15 && y == 0.0 && h == 0.0);
        let (x, y, h) = integrate(&origin(), 0.0, FRAC_PI_2, 1.0);
        assert!(x.abs() < 1e-15 && y.abs() < 1e-15 && (h - FRAC_PI_2).abs() < 1e-15);
    }

    #[test]
    fn zero_omega_keeps_heading_bits() {
        let p = RobotPose { heading: 0.123_456_789, ..origin() };
        let (_, _, h) = integrate(&p, 0.7, 0.0, 0.1);
        assert_eq!(h.to_bits(), p.heading.to_bits());
    }
}

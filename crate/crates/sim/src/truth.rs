//! Ground truth relative to the idealized row walls.

use rowfollow_core::wrap_angle;
use serde::{Deserialize, Serialize};

use crate::field::Field;
use crate::robot::RobotPose;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub d_left: f64,
    pub d_right: f64,
    /// Heading relative to the local row direction, counterclockwise positive.
    pub phi: f64,
    pub in_gap_left: bool,
    pub in_gap_right: bool,
    pub station: f64,
    /// Signed offset from the centerline, positive left.
    pub offset: f64,
    /// False once the sensor origin is beyond either row wall.
    pub in_lane: bool,
}

impl GroundTruth {
    pub fn cte(&self) -> f64 {
        0.5 * (self.d_right - self.d_left)
    }

    pub fn in_gap(&self) -> bool {
        self.in_gap_left || self.in_gap_right
    }
}

pub fn ground_truth(field: &Field, pose: &RobotPose) -> GroundTruth {
    let proj = field.centerline.project(pose.x, pose.y);
    let half = field.lane_halfwidth;
    let (in_gap_left, in_gap_right) = field.spec.gap_flags(proj.station);
    GroundTruth {
        d_left: half - proj.offset,
        d_right: half + proj.offset,
        phi: wrap_angle(pose.heading - proj.tangent),
        in_gap_left,
        in_gap_right,
        station: proj.station,
        offset: proj.offset,
        in_lane: proj.offset.abs() <= half,
    }
}

//! Deterministic 2-D field simulator for row-following experiments.
//!
//! A [`FieldSpec`] describes rows, gaps, an optional bend, leaf clutter and
//! sensor noise. [`build_field`] realizes it into stems and occluders; the
//! robot, LiDAR and odometry models then run against the immutable [`Field`].

// `!(a > b)` is used on purpose so NaN fails the check
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod centerline;
pub mod events;
pub mod field;
pub mod lidar;
pub mod rng;
pub mod robot;
pub mod sensors;
pub mod spec;
pub mod truth;

use thiserror::Error;

pub use centerline::{Centerline, Pose2, Projection};
pub use events::{
    detect_intervention, EventHistory, InterventionEvent, InterventionKind, BAD_START_WINDOW_M, GAP_WINDOW_M,
};
pub use field::{build_field, Field, Segment, Stem};
pub use lidar::raycast_scan;
pub use rng::{EpisodeRng, Stream};
pub use robot::{robot_step, Motion, RobotPose, FOOTPRINT};
pub use sensors::sensor_readings;
pub use spec::{BlockingLeaf, CurveSpec, FieldSpec, GapSpec, NoiseSpec, RowSide, PRESETS};
pub use truth::{ground_truth, GroundTruth};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid field spec: {0}")]
    InvalidSpec(String),
    #[error("scenario json: {0}")]
    Json(#[from] serde_json::Error),
}

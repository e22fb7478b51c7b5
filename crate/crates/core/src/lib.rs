//! Estimation and control core for LiDAR-based crop-row following.
//!
//! The pipeline runs in four stages, each in its own module:
//!
//! - [`geometry`]: polar scan projection, path-frame rotation, region of interest
//!   and left/right split.
//! - [`perception`]: histogram row detection, least-squares wall fitting and
//!   validation of the resulting `(d_L, d_R, phi)` measurement.
//! - [`ekf`]: a three-state extended Kalman filter over the lateral distances and
//!   heading, driven by wheel odometry and gyro yaw rate.
//! - [`goal`]: the local goal vector field and the PID heading controller.
//!
//! Everything numeric is generic over [`Real`], so the same code runs in `f32` on
//! small targets and `f64` in simulation. Concrete aliases for both are exported
//! at the crate root.

// `!(a > b)` is used on purpose so NaN fails the check
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ekf;
pub mod geometry;
pub mod goal;
pub mod perception;
pub mod scalar;
pub mod scan_log;

pub use ekf::{ControlInput, EkfError, EkfEstimate, Mat3, NoiseConfig, UpdateStatus};
pub use geometry::{LaserScan, Point2, RoiBox, ScanError};
pub use goal::{Command, DriveConfig, GoalError, GoalParams, PidState};
pub use perception::{
    FitError, HistogramPeak, LineFit, PerceptionConfig, RowObservation, ValidationThresholds,
};
pub use scalar::{wrap_angle, Real};

pub type LaserScanF64 = LaserScan<f64>;
pub type LaserScanF32 = LaserScan<f32>;
pub type Point2F64 = Point2<f64>;
pub type Point2F32 = Point2<f32>;
pub type RoiBoxF64 = RoiBox<f64>;
pub type LineFitF64 = LineFit<f64>;
pub type RowObservationF64 = RowObservation<f64>;
pub type RowObservationF32 = RowObservation<f32>;
pub type PerceptionConfigF64 = PerceptionConfig<f64>;
pub type ValidationThresholdsF64 = ValidationThresholds<f64>;
pub type EkfEstimateF64 = EkfEstimate<f64>;
pub type EkfEstimateF32 = EkfEstimate<f32>;
pub type ControlInputF64 = ControlInput<f64>;
pub type ControlInputF32 = ControlInput<f32>;
pub type NoiseConfigF64 = NoiseConfig<f64>;
pub type GoalParamsF64 = GoalParams<f64>;
pub type PidStateF64 = PidState<f64>;
pub type CommandF64 = Command<f64>;
pub type DriveConfigF64 = DriveConfig<f64>;

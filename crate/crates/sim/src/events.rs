//! Intervention detection.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::field::Field;
use crate::robot::{RobotPose, FOOTPRINT};
use crate::truth::{ground_truth, GroundTruth};

/// Failures this close to the lane entry are bad starts, meters.
pub const BAD_START_WINDOW_M: f64 = 2.0;
/// A departure this soon after a gap is attributed to the gap, meters.
pub const GAP_WINDOW_M: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InterventionKind {
    Collision,
    LaneDeparture,
    BadStart,
    GapLoss,
    EndOfLane,
    /// Simulated time ran out before the lane ended.
    TimeCap,
}

impl InterventionKind {
    pub const ALL: [InterventionKind; 6] = [
        InterventionKind::Collision,
        InterventionKind::LaneDeparture,
        InterventionKind::BadStart,
        InterventionKind::GapLoss,
        InterventionKind::EndOfLane,
        InterventionKind::TimeCap,
    ];

    /// Counted in distance per intervention.
    pub fn is_relevant(self) -> bool {
        !matches!(self, InterventionKind::EndOfLane | InterventionKind::TimeCap)
    }

    /// Whether the robot must be recovered by the operator and reset.
    pub fn needs_reset(self) -> bool {
        self.is_relevant()
    }

    pub fn name(self) -> &'static str {
        match self {
            InterventionKind::Collision => "collision",
            InterventionKind::LaneDeparture => "lane_departure",
            InterventionKind::BadStart => "bad_start",
            InterventionKind::GapLoss => "gap_loss",
            InterventionKind::EndOfLane => "end_of_lane",
            InterventionKind::TimeCap => "time_cap",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InterventionEvent {
    pub kind: InterventionKind,
    pub at_arc_m: f64,
    pub at_time: f64,
}

/// Stations at which a gap flag was raised, pruned to the attribution window.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EventHistory {
    gap_stations: VecDeque<f64>,
}

impl EventHistory {
    pub fn record(&mut self, truth: &GroundTruth) {
        if truth.in_gap() {
            self.gap_stations.push_back(truth.station);
        }
        while self.gap_stations.front().is_some_and(|&s| s < truth.station - GAP_WINDOW_M) {
            self.gap_stations.pop_front();
        }
    }

    pub fn gap_within_window(&self, station: f64) -> bool {
        self.gap_stations.iter().any(|&s| s >= station - GAP_WINDOW_M && s <= station)
    }
}

/// Classifies the current pose. End of lane wins over failures; a failure in
/// the start window is a bad start; a departure right after a gap is a gap loss;
/// a departure outranks a simultaneous collision.
pub fn detect_intervention(field: &Field, pose: &RobotPose, history: &EventHistory) -> Option<InterventionKind> {
    if pose.arc_progress >= field.row_length() {
        return Some(InterventionKind::EndOfLane);
    }
    let truth = ground_truth(field, pose);
    let departed = !truth.in_lane;
    let collided = field.footprint_hits_stem(pose.x, pose.y, pose.heading, FOOTPRINT.0 / 2.0, FOOTPRINT.1 / 2.0);
    if !(departed || collided) {
        return None;
    }
    Some(if pose.arc_progress < BAD_START_WINDOW_M {
        InterventionKind::BadStart
    } else if departed && (truth.in_gap() || history.gap_within_window(truth.station)) {
        InterventionKind::GapLoss
    } else if departed {
        InterventionKind::LaneDeparture
    } else {
        InterventionKind::Collision
    })
}

//! Lane centerline as a chain of straight and constant-curvature pieces,
//! parametrized by arc length ("station").

use rowfollow_core::wrap_angle;
use serde::{Deserialize, Serialize};

use crate::spec::CurveSpec;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose2 {
    pub x: f64,
    pub y: f64,
    pub heading: f64,
}

impl Pose2 {
    /// Point `offset` meters to the left of this pose.
    pub fn offset_point(&self, offset: f64) -> (f64, f64) {
        (self.x - offset * self.heading.sin(), self.y + offset * self.heading.cos())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
struct Piece {
    station: f64,
    length: f64,
    start: Pose2,
    curvature: f64,
}

impl Piece {
    fn pose_at(&self, u: f64) -> Pose2 {
        let Pose2 { x, y, heading: h0 } = self.start;
        if self.curvature == 0.0 {
            return Pose2 { x: x + u * h0.cos(), y: y + u * h0.sin(), heading: h0 };
        }
        let k = self.curvature;
        let h = h0 + k * u;
        Pose2 { x: x + (h.sin() - h0.sin()) / k, y: y - (h.cos() - h0.cos()) / k, heading: h }
    }

    /// Unclamped local arc length and left offset of a point.
    fn local(&self, px: f64, py: f64) -> (f64, f64) {
        let Pose2 { x, y, heading: h0 } = self.start;
        let (s0, c0) = h0.sin_cos();
        if self.curvature == 0.0 {
            let (dx, dy) = (px - x, py - y);
            return (dx * c0 + dy * s0, dy * c0 - dx * s0);
        }
        let radius = 1.0 / self.curvature;
        let (cx, cy) = (x - radius * s0, y + radius * c0);
        let (rx, ry) = (px - cx, py - cy);
        // radial direction of the start point, seen from the center
        let (ax, ay) = (x - cx, y - cy);
        let angle = (ax * ry - ay * rx).atan2(ax * rx + ay * ry);
        let rho = rx.hypot(ry);
        (angle * radius, radius - radius.signum() * rho)
    }
}

/// Foot of the perpendicular on the centerline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Projection {
    pub station: f64,
    /// Signed, positive to the left of the centerline.
    pub offset: f64,
    pub tangent: f64,
    pub curvature: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Centerline {
    pieces: Vec<Piece>,
    length: f64,
}

impl Centerline {
    /// Straight lane starting at the origin along +x, with an optional left bend.
    pub fn new(length: f64, curve: Option<&CurveSpec>) -> Self {
        fn push(pieces: &mut Vec<Piece>, length: f64, curvature: f64) {
            let (station, start) = match pieces.last() {
                Some(p) => (p.station + p.length, p.pose_at(p.length)),
                None => (0.0, Pose2 { x: 0.0, y: 0.0, heading: 0.0 }),
            };
            if length > 0.0 {
                pieces.push(Piece { station, length, start, curvature });
            }
        }
        let mut pieces = Vec::new();
        match curve {
            Some(c) if c.arc_start_m < length => {
                let arc = c.arc_length_m.min(length - c.arc_start_m);
                push(&mut pieces, c.arc_start_m, 0.0);
                push(&mut pieces, arc, 1.0 / c.radius_m);
                push(&mut pieces, length - c.arc_start_m - arc, 0.0);
            }
            _ => push(&mut pieces, length, 0.0),
        }
        Centerline { pieces, length }
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    fn piece_at(&self, station: f64) -> &Piece {
        let i = self.pieces.partition_point(|p| p.station <= station);
        &self.pieces[i.saturating_sub(1)]
    }

    /// Stations outside `[0, length]` extend the end pieces.
    pub fn pose_at(&self, station: f64) -> Pose2 {
        let p = self.piece_at(station);
        let mut pose = p.pose_at(station - p.station);
        pose.heading = wrap_angle(pose.heading);
        pose
    }

    pub fn curvature_at(&self, station: f64) -> f64 {
        self.piece_at(station).curvature
    }

    pub fn project(&self, x: f64, y: f64) -> Projection {
        let last = self.pieces.len() - 1;
        let mut best: Option<(f64, Projection)> = None;
        for (i, p) in self.pieces.iter().enumerate() {
            let (mut u, mut offset) = p.local(x, y);
            let lo = if i == 0 { f64::NEG_INFINITY } else { 0.0 };
            let hi = if i == last { f64::INFINITY } else { p.length };
            if u < lo || u > hi {
                u = u.clamp(lo, hi);
                let foot = p.pose_at(u);
                let (fx, fy) = (x - foot.x, y - foot.y);
                offset = fy * foot.heading.cos() - fx * foot.heading.sin();
            }
            let foot = p.pose_at(u);
            let dist = (x - foot.x).hypot(y - foot.y);
            if best.as_ref().is_none_or(|(d, _)| dist < *d) {
                let proj = Projection {
                    station: p.station + u,
                    offset,
                    tangent: wrap_angle(foot.heading),
                    curvature: p.curvature,
                };
                best = Some((dist, proj));
            }
        }
        best.expect("centerline has at least one piece").1
    }

    /// Arc-length intervals of a parallel curve offset to the left, as
    /// `(station, length, length along the offset curve)` per piece.
    pub fn offset_pieces(&self, offset: f64) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.pieces.iter().map(move |p| (p.station, p.length, p.length * (1.0 - p.curvature * offset)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn curve() -> Centerline {
        Centerline::new(40.0, Some(&CurveSpec { radius_m: 8.0, arc_start_m: 10.0, arc_length_m: 10.0 }))
    }

    #[test]
    fn straight_pose_and_projection() {
        let c = Centerline::new(10.0, None);
        let p = c.pose_at(3.0);
        assert_eq!((p.x, p.y, p.heading), (3.0, 0.0, 0.0));
        let proj = c.project(4.0, 0.2);
        assert!((proj.station - 4.0).abs() < 1e-12 && (proj.offset - 0.2).abs() < 1e-12);
        assert!((c.project(-1.0, -0.1).station + 1.0).abs() < 1e-12);
    }

    #[test]
    fn pieces_join_continuously() {
        let c = curve();
        for s in [10.0, 20.0] {
            let a = c.pose_at(s - 1e-9);
            let b = c.pose_at(s + 1e-9);
            assert!((a.x - b.x).abs() < 1e-8 && (a.y - b.y).abs() < 1e-8);
            assert!((a.heading - b.heading).abs() < 1e-8);
        }
        assert!((c.pose_at(20.0).heading - 10.0 / 8.0).abs() < 1e-12);
    }

    #[test]
    fn projection_inverts_offset_points() {
        let c = curve();
        for i in 0..400 {
            let s = 0.1 * i as f64;
            for off in [-0.6, -0.2, 0.0, 0.3, 0.7] {
                let (x, y) = c.pose_at(s).offset_point(off);
                let p = c.project(x, y);
                assert!((p.station - s).abs() < 1e-9, "station {s} offset {off}: {p:?}");
                assert!((p.offset - off).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn arc_length_matches_chord_sum() {
        let c = curve();
        let n = 100_000;
        let h = 40.0 / n as f64;
        let total: f64 = (0..n)
            .map(|i| {
                let a = c.pose_at(i as f64 * h);
                let b = c.pose_at((i + 1) as f64 * h);
                (b.x - a.x).hypot(b.y - a.y)
            })
            .sum();
        assert!((total - 40.0).abs() < 1e-6);
    }
}

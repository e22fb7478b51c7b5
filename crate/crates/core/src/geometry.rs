//! Laser scan representation and the frame transforms that carry a raw polar
//! sweep into a path-aligned point set split into left and right row candidates.
//!
//! Axis naming: `forward` is the along-row axis of the active frame and `lateral`
//! is positive to the robot's left. In the robot frame `forward` is the robot's
//! longitudinal axis; after [`rotate_to_path_frame`] it is parallel to the rows.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Real;

/// Beam count of a 270 degree sweep at 0.25 degree resolution.
pub const DEFAULT_BEAM_COUNT: usize = 1081;
/// Rated range of the front LiDAR, meters.
pub const DEFAULT_MAX_RANGE: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScanError {
    #[error("scan has {found} beams, expected {expected}")]
    WrongBeamCount { expected: usize, found: usize },
    #[error("beam {index} has invalid range {value}")]
    InvalidRange { index: usize, value: f64 },
    #[error("invalid scan geometry: {0}")]
    InvalidGeometry(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point2<T> {
    pub forward: T,
    pub lateral: T,
}

impl<T: Real> Point2<T> {
    pub fn new(forward: T, lateral: T) -> Self {
        Self { forward, lateral }
    }

    pub fn norm(&self) -> T {
        self.forward.hypot(self.lateral)
    }

    /// Counterclockwise rotation by `angle`.
    pub fn rotated(&self, angle: T) -> Self {
        let (s, c) = angle.sin_cos();
        Self {
            forward: c * self.forward - s * self.lateral,
            lateral: s * self.forward + c * self.lateral,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.forward.is_finite() && self.lateral.is_finite()
    }
}

/// One planar LiDAR sweep.
///
/// Ranges greater than `max_range` (conventionally the sentinel
/// `max_range + 1`) and non-finite ranges mean "no return".
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LaserScan<T> {
    pub timestamp: T,
    pub rate_hz: T,
    pub ranges: Vec<T>,
    pub angular_span: T,
    pub angle_of_first_beam: T,
    pub max_range: T,
}

impl<T: Real> LaserScan<T> {
    /// Scan with the default 270 degree geometry and 10 m range.
    pub fn new(timestamp: T, rate_hz: T, ranges: Vec<T>) -> Self {
        Self::with_max_range(timestamp, rate_hz, ranges, T::lit(DEFAULT_MAX_RANGE))
    }

    pub fn with_max_range(timestamp: T, rate_hz: T, ranges: Vec<T>, max_range: T) -> Self {
        let pi = T::PI();
        Self {
            timestamp,
            rate_hz,
            ranges,
            angular_span: T::lit(1.5) * pi,
            angle_of_first_beam: -T::lit(0.75) * pi,
            max_range,
        }
    }

    /// Sentinel written for beams without a return.
    pub fn no_return(&self) -> T {
        self.max_range + T::one()
    }

    pub fn beam_count(&self) -> usize {
        self.ranges.len()
    }

    pub fn angle_increment(&self) -> T {
        self.angular_span / T::from_usize(self.ranges.len().max(2) - 1).unwrap()
    }

    pub fn beam_angle(&self, index: usize) -> T {
        self.angle_of_first_beam + T::from_usize(index).unwrap() * self.angle_increment()
    }

    /// Beam index whose angle is closest to `angle`, if inside the sweep.
    pub fn beam_index(&self, angle: T) -> Option<usize> {
        let idx = ((angle - self.angle_of_first_beam) / self.angle_increment()).round();
        if idx < T::zero() {
            return None;
        }
        let idx = idx.to_usize()?;
        (idx < self.ranges.len()).then_some(idx)
    }

    pub fn is_return(&self, range: T) -> bool {
        range.is_finite() && range > T::zero() && range <= self.max_range
    }

    /// Checks beam count and range values.
    pub fn validate(&self) -> Result<(), ScanError> {
        if !(self.max_range > T::zero()) || !self.angular_span.is_finite() {
            return Err(ScanError::InvalidGeometry("max_range and span must be positive and finite"));
        }
        if !(self.angular_span > T::zero()) {
            return Err(ScanError::InvalidGeometry("angular span must be positive"));
        }
        let pi = T::PI();
        let default_span = T::lit(1.5) * pi;
        let expected = if (self.angular_span - default_span).abs() <= T::lit(1e-6) {
            Some(DEFAULT_BEAM_COUNT)
        } else {
            None
        };
        match expected {
            Some(n) if self.ranges.len() != n => {
                return Err(ScanError::WrongBeamCount { expected: n, found: self.ranges.len() })
            }
            None if self.ranges.len() < 2 => {
                return Err(ScanError::WrongBeamCount { expected: 2, found: self.ranges.len() })
            }
            _ => {}
        }
        for (index, &r) in self.ranges.iter().enumerate() {
            if r.is_finite() && r <= T::zero() {
                return Err(ScanError::InvalidRange { index, value: r.to_f64().unwrap_or(f64::NAN) });
            }
        }
        Ok(())
    }
}

/// Axis-aligned region of interest in the path frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoiBox<T> {
    pub forward_min: T,
    pub forward_max: T,
    pub lateral_halfwidth: T,
}

impl<T: Real> RoiBox<T> {
    pub fn new(forward_min: T, forward_max: T, lateral_halfwidth: T) -> Result<Self, ScanError> {
        let roi = Self { forward_min, forward_max, lateral_halfwidth };
        roi.check()?;
        Ok(roi)
    }

    pub fn check(&self) -> Result<(), ScanError> {
        if !(self.forward_min < self.forward_max) {
            return Err(ScanError::InvalidGeometry("roi forward_min must be below forward_max"));
        }
        if !(self.lateral_halfwidth > T::zero()) {
            return Err(ScanError::InvalidGeometry("roi lateral half-width must be positive"));
        }
        Ok(())
    }

    pub fn contains(&self, p: &Point2<T>) -> bool {
        p.forward > self.forward_min
            && p.forward < self.forward_max
            && p.lateral.abs() < self.lateral_halfwidth
    }
}

impl<T: Real> Default for RoiBox<T> {
    fn default() -> Self {
        Self { forward_min: T::lit(0.1), forward_max: T::lit(1.9), lateral_halfwidth: T::one() }
    }
}

/// Projects every returning beam into the robot frame, in beam order.
pub fn polar_to_cartesian<T: Real>(scan: &LaserScan<T>) -> Result<Vec<Point2<T>>, ScanError> {
    scan.validate()?;
    let inc = scan.angle_increment();
    Ok(scan
        .ranges
        .iter()
        .enumerate()
        .filter(|(_, &r)| scan.is_return(r))
        .map(|(i, &r)| {
            let theta = scan.angle_of_first_beam + T::from_usize(i).unwrap() * inc;
            let (s, c) = theta.sin_cos();
            Point2::new(r * c, r * s)
        })
        .collect())
}

/// Rotates every point by `-phi`.
///
/// With `phi` the heading of the frame the points are expressed in, relative to
/// the target frame, pass `-phi`: a robot-frame point set rotated by
/// `rotate_to_path_frame(points, -heading)` lands in the path frame.
pub fn rotate_to_path_frame<T: Real>(points: &[Point2<T>], phi: T) -> Vec<Point2<T>> {
    points.iter().map(|p| p.rotated(-phi)).collect()
}

pub fn roi_filter<T: Real>(points: &[Point2<T>], roi: &RoiBox<T>) -> Vec<Point2<T>> {
    points.iter().copied().filter(|p| roi.contains(p)).collect()
}

/// Splits into (left, right). Points with lateral exactly zero go right.
pub fn split_sides<T: Real>(points: &[Point2<T>]) -> (Vec<Point2<T>>, Vec<Point2<T>>) {
    points.iter().copied().partition(|p| p.lateral > T::zero())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn scan_with(entries: &[(usize, f64)]) -> LaserScan<f64> {
        let mut scan = LaserScan::new(0.0, 40.0, vec![0.0; DEFAULT_BEAM_COUNT]);
        let sentinel = scan.no_return();
        scan.ranges.iter_mut().for_each(|r| *r = sentinel);
        for &(i, r) in entries {
            scan.ranges[i] = r;
        }
        scan
    }

    #[test]
    fn beam_angles_follow_index() {
        let scan = scan_with(&[]);
        assert!((scan.beam_angle(0) + 3.0 * PI / 4.0).abs() < 1e-15);
        assert!(scan.beam_angle(540).abs() < 1e-15);
        assert!((scan.beam_angle(1080) - 3.0 * PI / 4.0).abs() < 1e-12);
        assert_eq!(scan.beam_index(FRAC_PI_2), Some(900));
        assert!((scan.angle_increment() - 0.25_f64.to_radians()).abs() < 1e-15);
    }

    #[test]
    fn polar_examples() {
        let scan = scan_with(&[(540, 1.0), (900, 0.5), (0, 2.0)]);
        let pts = polar_to_cartesian(&scan).unwrap();
        assert_eq!(pts.len(), 3);
        // beam order: 0, 540, 900
        assert!((pts[0].forward + std::f64::consts::SQRT_2).abs() < 1e-5);
        assert!((pts[0].lateral + std::f64::consts::SQRT_2).abs() < 1e-5);
        assert!((pts[1].forward - 1.0).abs() < 1e-15 && pts[1].lateral.abs() < 1e-15);
        assert!(pts[2].forward.abs() < 1e-12 && (pts[2].lateral - 0.5).abs() < 1e-15);
    }

    #[test]
    fn polar_rejects_wrong_length_and_bad_ranges() {
        let scan = LaserScan::new(0.0, 40.0, vec![1.0; 1080]);
        assert_eq!(
            polar_to_cartesian(&scan),
            Err(ScanError::WrongBeamCount { expected: 1081, found: 1080 })
        );
        let scan = scan_with(&[(3, -1.0)]);
        assert!(matches!(polar_to_cartesian(&scan), Err(ScanError::InvalidRange { index: 3, .. })));
    }

    #[test]
    fn nonfinite_and_sentinel_are_skipped() {
        let scan = scan_with(&[(10, f64::INFINITY), (11, f64::NAN), (12, 10.0)]);
        let pts = polar_to_cartesian(&scan).unwrap();
        assert_eq!(pts.len(), 1);
    }

    #[test]
    fn rotation_examples() {
        let p = [Point2::new(1.0, 0.3)];
        assert_eq!(rotate_to_path_frame(&p, 0.0), p.to_vec());
        let q = rotate_to_path_frame(&[Point2::new(1.0, 0.0)], FRAC_PI_2);
        assert!(q[0].forward.abs() < 1e-15 && (q[0].lateral + 1.0).abs() < 1e-15);
        let r = rotate_to_path_frame(&[Point2::new(1.0_f64, 0.375)], 0.1);
        // cos/sin of 0.1 evaluated independently
        assert!((r[0].forward - 1.032_441_697).abs() < 1e-8);
        assert!((r[0].lateral - 0.273_293_145).abs() < 1e-8);
    }

    #[test]
    fn roi_examples() {
        let roi = RoiBox::new(0.1, 1.9, 1.0).unwrap();
        let pts = [Point2::new(0.05, 0.2), Point2::new(2.5, 0.2), Point2::new(1.0, 0.3)];
        assert_eq!(roi_filter(&pts, &roi), vec![Point2::new(1.0, 0.3)]);
        assert!(RoiBox::new(1.0, 1.0, 1.0).is_err());
        assert!(RoiBox::new(0.1, 1.9, 0.0).is_err());
    }

    #[test]
    fn split_examples() {
        let (l, r) = split_sides(&[Point2::new(1.0, 0.4), Point2::new(1.0, -0.35)]);
        assert_eq!(l, vec![Point2::new(1.0, 0.4)]);
        assert_eq!(r, vec![Point2::new(1.0, -0.35)]);
        let (l, r) = split_sides::<f64>(&[]);
        assert!(l.is_empty() && r.is_empty());
        let (l, r) = split_sides(&[Point2::new(1.0, 0.0)]);
        assert!(l.is_empty());
        assert_eq!(r, vec![Point2::new(1.0, 0.0)]);
    }

    #[test]
    fn works_in_f32() {
        let mut scan = LaserScan::<f32>::new(0.0, 40.0, vec![20.0; DEFAULT_BEAM_COUNT]);
        scan.ranges[540] = 1.0;
        let pts = polar_to_cartesian(&scan).unwrap();
        assert_eq!(pts.len(), 1);
        assert!((pts[0].forward - 1.0).abs() < 1e-6);
    }

    fn arb_points() -> impl Strategy<Value = Vec<Point2<f64>>> {
        prop::collection::vec((-3.0..3.0f64, -3.0..3.0f64), 0..64)
            .prop_map(|v| v.into_iter().map(|(f, l)| Point2::new(f, l)).collect())
    }

    proptest! {
        #[test]
        fn rotation_round_trips_and_preserves_norm(pts in arb_points(), phi in -PI..PI) {
            let there = rotate_to_path_frame(&pts, phi);
            let back = rotate_to_path_frame(&there, -phi);
            for ((a, b), c) in pts.iter().zip(&back).zip(&there) {
                prop_assert!((a.forward - b.forward).abs() <= 1e-12);
                prop_assert!((a.lateral - b.lateral).abs() <= 1e-12);
                prop_assert!((a.norm() - c.norm()).abs() <= 1e-12);
            }
        }

        #[test]
        fn roi_is_subset_and_idempotent(pts in arb_points()) {
            let roi = RoiBox::default();
            let once = roi_filter(&pts, &roi);
            prop_assert!(once.iter().all(|p| pts.contains(p)));
            prop_assert_eq!(roi_filter(&once, &roi), once);
        }

        #[test]
        fn split_partitions_exactly(pts in arb_points(), zeros in 0usize..4) {
            let mut pts = pts;
            pts.extend((0..zeros).map(|i| Point2::new(i as f64, 0.0)));
            let (l, r) = split_sides(&pts);
            prop_assert_eq!(l.len() + r.len(), pts.len());
            let mut merged: Vec<_> = l.iter().chain(&r).map(|p| (p.forward.to_bits(), p.lateral.to_bits())).collect();
            let mut orig: Vec<_> = pts.iter().map(|p| (p.forward.to_bits(), p.lateral.to_bits())).collect();
            merged.sort_unstable();
            orig.sort_unstable();
            prop_assert_eq!(merged, orig);
            prop_assert!(l.iter().all(|p| p.lateral > 0.0) && r.iter().all(|p| p.lateral <= 0.0));
        }

        #[test]
        fn projection_count_matches_returns(ranges in prop::collection::vec(prop_oneof![0.01..10.0f64, Just(11.0)], 1081)) {
            let n = ranges.iter().filter(|&&r| r <= 10.0).count();
            let scan = LaserScan::new(0.0, 40.0, ranges);
            prop_assert_eq!(polar_to_cartesian(&scan).unwrap().len(), n);
        }
    }
}

//! Row perception: histogram row detection, least-squares virtual walls and the
//! validation heuristic that decides which side measurements can be trusted.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{
    polar_to_cartesian, roi_filter, rotate_to_path_frame, split_sides, LaserScan, Point2, RoiBox,
    ScanError,
};
use crate::scalar::{wrap_angle, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum FitError {
    #[error("line fit needs at least two points, got {0}")]
    TooFewPoints(usize),
    #[error("line fit points share one forward coordinate")]
    ZeroForwardVariance,
}

/// Least-squares line `lateral = slope * forward + intercept`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineFit<T> {
    pub slope: T,
    pub intercept: T,
    pub orthogonal_distance: T,
    pub point_count: usize,
    pub span: T,
    pub residual_std: T,
}

impl<T: Real> LineFit<T> {
    pub fn slope_angle(&self) -> T {
        self.slope.atan()
    }

    /// Lower residual spread wins, ties go to the longer support.
    fn better_defined_than(&self, other: &Self) -> bool {
        self.residual_std < other.residual_std
            || (self.residual_std == other.residual_std && self.span > other.span)
    }
}

/// Ordinary least squares of lateral on forward.
pub fn fit_line<T: Real>(points: &[Point2<T>]) -> Result<LineFit<T>, FitError> {
    if points.len() < 2 {
        return Err(FitError::TooFewPoints(points.len()));
    }
    let n = T::from_usize(points.len()).unwrap();
    let (sum_f, sum_l) = points
        .iter()
        .fold((T::zero(), T::zero()), |(a, b), p| (a + p.forward, b + p.lateral));
    let mean_f = sum_f / n;
    let mean_l = sum_l / n;
    let (sxx, sxy) = points.iter().fold((T::zero(), T::zero()), |(sxx, sxy), p| {
        let df = p.forward - mean_f;
        (sxx + df * df, sxy + df * (p.lateral - mean_l))
    });
    let (min_f, max_f) = points
        .iter()
        .fold((T::infinity(), T::neg_infinity()), |(lo, hi), p| (lo.min(p.forward), hi.max(p.forward)));
    let span = max_f - min_f;
    if !(sxx > T::zero()) || !(span > T::zero()) {
        return Err(FitError::ZeroForwardVariance);
    }
    let slope = sxy / sxx;
    let intercept = mean_l - slope * mean_f;
    let ssr = points.iter().fold(T::zero(), |acc, p| {
        let r = p.lateral - (slope * p.forward + intercept);
        acc + r * r
    });
    Ok(LineFit {
        slope,
        intercept,
        orthogonal_distance: intercept.abs() / (T::one() + slope * slope).sqrt(),
        point_count: points.len(),
        span,
        residual_std: (ssr / n).sqrt(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct HistogramPeak<T> {
    /// `[lo, hi)` bounds of the winning bin over `|lateral|`.
    pub interval: (T, T),
    pub count: usize,
    /// Points in the winning bin and its two neighbours, in input order.
    pub selected: Vec<Point2<T>>,
}

/// Histogram of `|lateral|` with bins anchored at zero. Returns `None` for an
/// empty side.
pub fn histogram_peak<T: Real>(points: &[Point2<T>], bin_width: T) -> Option<HistogramPeak<T>> {
    assert!(bin_width > T::zero(), "histogram bin width must be positive");
    let bin_of = |p: &Point2<T>| (p.lateral.abs() / bin_width).floor().to_usize().unwrap_or(usize::MAX);
    let bins: Vec<usize> = points.iter().map(bin_of).collect();
    let max_bin = *bins.iter().filter(|&&b| b != usize::MAX).max()?;
    let mut counts = vec![0usize; max_bin + 1];
    for &b in bins.iter().filter(|&&b| b != usize::MAX) {
        counts[b] += 1;
    }
    // first maximum is the bin nearest the robot
    let (peak, &count) = counts
        .iter()
        .enumerate()
        .fold((0, &0), |best, cur| if cur.1 > best.1 { cur } else { best });
    let selected = points
        .iter()
        .zip(&bins)
        .filter(|(_, &b)| b + 1 >= peak && b <= peak + 1)
        .map(|(p, _)| *p)
        .collect();
    let lo = T::from_usize(peak).unwrap() * bin_width;
    Some(HistogramPeak { interval: (lo, lo + bin_width), count, selected })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerceptionConfig<T> {
    pub roi: RoiBox<T>,
    pub bin_width: T,
    /// Sanity bound only: fits farther than this from the sensor are dropped.
    pub nominal_lane_width: T,
}

impl<T: Real> Default for PerceptionConfig<T> {
    fn default() -> Self {
        Self { roi: RoiBox::default(), bin_width: T::lit(0.05), nominal_lane_width: T::lit(0.75) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValidationThresholds<T> {
    pub min_points: usize,
    pub min_span: T,
    pub max_residual_std: T,
    pub max_distance_jump: T,
    /// Radians.
    pub max_slope_jump: T,
    /// Seconds a held value may still be forwarded.
    pub max_stale_age: T,
}

impl<T: Real> Default for ValidationThresholds<T> {
    fn default() -> Self {
        Self {
            min_points: 8,
            min_span: T::lit(0.3),
            max_residual_std: T::lit(0.05),
            max_distance_jump: T::lit(0.1),
            max_slope_jump: T::lit(15f64.to_radians()),
            max_stale_age: T::lit(0.5),
        }
    }
}

/// Per-scan row measurement.
///
/// `*_valid` means freshly measured this scan. `*_usable` means a value may be
/// forwarded to the filter: fresh, or held from the last valid scan for no longer
/// than the staleness limit. A side that is neither is absent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RowObservation<T> {
    pub d_left: T,
    pub d_right: T,
    pub phi_meas: T,
    pub left_valid: bool,
    pub right_valid: bool,
    pub left_usable: bool,
    pub right_usable: bool,
    pub phi_usable: bool,
    pub left_fit: Option<LineFit<T>>,
    pub right_fit: Option<LineFit<T>>,
    pub stale_age_left: T,
    pub stale_age_right: T,
    pub stale_age_phi: T,
    /// Heading used to pre-rotate the scan.
    pub phi_prior: T,
    /// Heading implied by the best-defined fit before validation.
    pub raw_phi: Option<T>,
}

impl<T: Real> RowObservation<T> {
    /// Centered, aligned robot in a lane of the given width. Seeds `validate`
    /// at the start of an episode.
    pub fn nominal(lane_width: T) -> Self {
        let half = lane_width * T::half();
        Self {
            d_left: half,
            d_right: half,
            phi_meas: T::zero(),
            left_valid: true,
            right_valid: true,
            left_usable: true,
            right_usable: true,
            phi_usable: true,
            left_fit: None,
            right_fit: None,
            stale_age_left: T::zero(),
            stale_age_right: T::zero(),
            stale_age_phi: T::zero(),
            phi_prior: T::zero(),
            raw_phi: None,
        }
    }

    pub fn both_valid(&self) -> bool {
        self.left_valid && self.right_valid
    }

    /// Heading of the rows implied by a fit made in this observation's path frame.
    pub fn side_heading(&self, fit: &LineFit<T>) -> T {
        fold_half_turn(self.phi_prior - fit.slope_angle())
    }
}

/// Rows are undirected lines, so a row heading is only defined modulo pi.
fn fold_half_turn<T: Real>(angle: T) -> T {
    let half_pi = T::FRAC_PI_2();
    let a = wrap_angle(angle);
    if a > half_pi {
        a - T::PI()
    } else if a <= -half_pi {
        a + T::PI()
    } else {
        a
    }
}

fn fit_side<T: Real>(points: &[Point2<T>], cfg: &PerceptionConfig<T>) -> Option<LineFit<T>> {
    let peak = histogram_peak(points, cfg.bin_width)?;
    let fit = fit_line(&peak.selected).ok()?;
    (fit.orthogonal_distance > T::zero() && fit.orthogonal_distance < cfg.nominal_lane_width)
        .then_some(fit)
}

fn best_of<'a, T: Real>(a: Option<&'a LineFit<T>>, b: Option<&'a LineFit<T>>) -> Option<&'a LineFit<T>> {
    match (a, b) {
        (Some(l), Some(r)) => Some(if r.better_defined_than(l) { r } else { l }),
        (l, r) => l.or(r),
    }
}

/// Runs the estimate stage on one scan, pre-rotated by `phi_prior`.
///
/// The returned observation is unvalidated: a side is marked valid exactly when
/// a fit exists. Feed it through [`validate`] before use.
pub fn estimate<T: Real>(
    scan: &LaserScan<T>,
    phi_prior: T,
    cfg: &PerceptionConfig<T>,
) -> Result<RowObservation<T>, ScanError> {
    let robot_frame = polar_to_cartesian(scan)?;
    let path_frame = rotate_to_path_frame(&robot_frame, -phi_prior);
    let inside = roi_filter(&path_frame, &cfg.roi);
    let (left, right) = split_sides(&inside);
    let left_fit = fit_side(&left, cfg);
    let right_fit = fit_side(&right, cfg);

    let mut obs = RowObservation {
        d_left: left_fit.map_or(T::zero(), |f| f.orthogonal_distance),
        d_right: right_fit.map_or(T::zero(), |f| f.orthogonal_distance),
        phi_meas: fold_half_turn(phi_prior),
        left_valid: left_fit.is_some(),
        right_valid: right_fit.is_some(),
        left_usable: left_fit.is_some(),
        right_usable: right_fit.is_some(),
        phi_usable: false,
        left_fit,
        right_fit,
        stale_age_left: T::zero(),
        stale_age_right: T::zero(),
        stale_age_phi: T::zero(),
        phi_prior,
        raw_phi: None,
    };
    if let Some(best) = best_of(left_fit.as_ref(), right_fit.as_ref()) {
        let heading = obs.side_heading(best);
        obs.phi_meas = heading;
        obs.phi_usable = true;
        obs.raw_phi = Some(heading);
    }
    Ok(obs)
}

struct SideOutcome<T> {
    d: T,
    valid: bool,
    usable: bool,
    stale: T,
}

fn validate_side<T: Real>(
    obs: &RowObservation<T>,
    fit: Option<&LineFit<T>>,
    prev: &RowObservation<T>,
    prev_side: (T, bool, T),
    thr: &ValidationThresholds<T>,
    dt: T,
) -> SideOutcome<T> {
    let (prev_d, prev_usable, prev_stale) = prev_side;
    let fresh = fit.filter(|f| {
        f.point_count >= thr.min_points
            && f.span >= thr.min_span
            && f.residual_std <= thr.max_residual_std
            && (!prev_usable || (f.orthogonal_distance - prev_d).abs() <= thr.max_distance_jump)
            && (!prev.phi_usable
                || wrap_angle(obs.side_heading(f) - prev.phi_meas).abs() <= thr.max_slope_jump)
    });
    match fresh {
        Some(f) => SideOutcome { d: f.orthogonal_distance, valid: true, usable: true, stale: T::zero() },
        None => {
            let stale = prev_stale + dt;
            SideOutcome { d: prev_d, valid: false, usable: prev_usable && stale <= thr.max_stale_age, stale }
        }
    }
}

/// Validate stage: accepts or rejects each side and carries the last valid
/// values forward for rejected ones.
pub fn validate<T: Real>(
    obs: &RowObservation<T>,
    prev: &RowObservation<T>,
    thr: &ValidationThresholds<T>,
    dt: T,
) -> RowObservation<T> {
    let left = validate_side(
        obs,
        obs.left_fit.as_ref(),
        prev,
        (prev.d_left, prev.left_usable, prev.stale_age_left),
        thr,
        dt,
    );
    let right = validate_side(
        obs,
        obs.right_fit.as_ref(),
        prev,
        (prev.d_right, prev.right_usable, prev.stale_age_right),
        thr,
        dt,
    );

    let mut out = RowObservation {
        d_left: left.d,
        d_right: right.d,
        left_valid: left.valid,
        right_valid: right.valid,
        left_usable: left.usable,
        right_usable: right.usable,
        stale_age_left: left.stale,
        stale_age_right: right.stale,
        ..*obs
    };
    let fresh_left = obs.left_fit.as_ref().filter(|_| left.valid);
    let fresh_right = obs.right_fit.as_ref().filter(|_| right.valid);
    match best_of(fresh_left, fresh_right) {
        Some(best) => {
            out.phi_meas = obs.side_heading(best);
            out.phi_usable = true;
            out.stale_age_phi = T::zero();
        }
        None => {
            out.phi_meas = prev.phi_meas;
            out.stale_age_phi = prev.stale_age_phi + dt;
            out.phi_usable = prev.phi_usable && out.stale_age_phi <= thr.max_stale_age;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn lat(values: &[f64]) -> Vec<Point2<f64>> {
        values.iter().enumerate().map(|(i, &l)| Point2::new(0.2 + 0.1 * i as f64, l)).collect()
    }

    /// Brute-force bin occupancy without the implementation's bookkeeping.
    fn brute_counts(points: &[Point2<f64>], w: f64, bins: usize) -> Vec<usize> {
        (0..bins)
            .map(|k| {
                points
                    .iter()
                    .filter(|p| (p.lateral.abs() / w).floor() as usize == k)
                    .count()
            })
            .collect()
    }

    #[test]
    fn histogram_picks_densest_bin_and_neighbours() {
        let pts = lat(&[0.36, 0.37, 0.38, 0.39, 0.74, 0.75]);
        let peak = histogram_peak(&pts, 0.05).unwrap();
        assert!((peak.interval.0 - 0.35).abs() < 1e-12 && (peak.interval.1 - 0.40).abs() < 1e-12);
        assert_eq!(peak.selected, pts[..4].to_vec());
        assert_eq!(brute_counts(&pts, 0.05, 20)[7], 4);
    }

    #[test]
    fn histogram_singleton_and_empty() {
        let pts = lat(&[0.375]);
        let peak = histogram_peak(&pts, 0.05).unwrap();
        assert!((peak.interval.0 - 0.35).abs() < 1e-12);
        assert_eq!(peak.selected, pts);
        assert!(histogram_peak::<f64>(&[], 0.05).is_none());
    }

    #[test]
    fn histogram_tie_goes_to_nearer_bin() {
        let pts = lat(&[0.36, 0.37, 0.74, 0.75]);
        let counts = brute_counts(&pts, 0.05, 20);
        assert_eq!(counts[7], 2);
        assert_eq!(counts[14] + counts[15], 2);
        let peak = histogram_peak(&pts, 0.05).unwrap();
        assert!((peak.interval.0 - 0.35).abs() < 1e-12);
        assert_eq!(peak.selected, pts[..2].to_vec());
    }

    #[test]
    fn histogram_uses_absolute_lateral() {
        let pts = lat(&[-0.36, -0.37, -0.38, -0.6]);
        let peak = histogram_peak(&pts, 0.05).unwrap();
        assert_eq!(peak.count, 3);
        assert_eq!(peak.selected.len(), 3);
    }

    #[test]
    fn fit_horizontal_and_diagonal() {
        let pts: Vec<_> = [0.2_f64, 0.8, 1.4].iter().map(|&f| Point2::new(f, 0.375)).collect();
        let fit = fit_line(&pts).unwrap();
        assert!(fit.slope.abs() < 1e-15);
        assert!((fit.intercept - 0.375).abs() < 1e-15);
        assert!((fit.orthogonal_distance - 0.375).abs() < 1e-15);
        assert!(fit.residual_std < 1e-15);
        assert!((fit.span - 1.2).abs() < 1e-15);

        let pts: Vec<_> = [0.3_f64, 0.9, 1.7].iter().map(|&f| Point2::new(f, f)).collect();
        let fit = fit_line(&pts).unwrap();
        assert!((fit.slope - 1.0).abs() < 1e-12);
        assert!(fit.intercept.abs() < 1e-12);
        assert!(fit.orthogonal_distance < 1e-12);
    }

    #[test]
    fn fit_matches_normal_equations() {
        // independent route: solve [[n, Σx],[Σx, Σx²]] [b a]ᵀ = [Σy, Σxy] by Cramer's rule
        let pts = vec![Point2::new(0.5_f64, 0.40), Point2::new(1.0, 0.35), Point2::new(1.5, 0.42)];
        let (n, sx, sy, sxx, sxy) = pts.iter().fold((0.0, 0.0, 0.0, 0.0, 0.0), |a, p| {
            (a.0 + 1.0, a.1 + p.forward, a.2 + p.lateral, a.3 + p.forward * p.forward, a.4 + p.forward * p.lateral)
        });
        let det = n * sxx - sx * sx;
        let slope = (n * sxy - sx * sy) / det;
        let intercept = (sxx * sy - sx * sxy) / det;
        let fit = fit_line(&pts).unwrap();
        assert!((fit.slope - slope).abs() < 1e-12 && (fit.slope - 0.02).abs() < 1e-12);
        assert!((fit.intercept - intercept).abs() < 1e-12 && (fit.intercept - 0.37).abs() < 1e-12);
        assert!((fit.orthogonal_distance - 0.369_926_022).abs() < 1e-8);
    }

    #[test]
    fn fit_degenerate_inputs() {
        assert_eq!(fit_line(&[Point2::new(1.0, 0.3)]), Err(FitError::TooFewPoints(1)));
        assert_eq!(
            fit_line(&[Point2::new(1.0, 0.3), Point2::new(1.0, 0.5)]),
            Err(FitError::ZeroForwardVariance)
        );
    }

    fn fit(d: f64, sign: f64) -> LineFit<f64> {
        LineFit {
            slope: 0.0,
            intercept: sign * d,
            orthogonal_distance: d,
            point_count: 20,
            span: 1.5,
            residual_std: 0.01,
        }
    }

    fn raw(left: Option<LineFit<f64>>, right: Option<LineFit<f64>>) -> RowObservation<f64> {
        RowObservation {
            d_left: left.map_or(0.0, |f| f.orthogonal_distance),
            d_right: right.map_or(0.0, |f| f.orthogonal_distance),
            phi_meas: 0.0,
            left_valid: left.is_some(),
            right_valid: right.is_some(),
            left_usable: left.is_some(),
            right_usable: right.is_some(),
            phi_usable: left.is_some() || right.is_some(),
            left_fit: left,
            right_fit: right,
            stale_age_left: 0.0,
            stale_age_right: 0.0,
            stale_age_phi: 0.0,
            phi_prior: 0.0,
            raw_phi: Some(0.0),
        }
    }

    #[test]
    fn validate_passes_good_fits() {
        let thr = ValidationThresholds::default();
        let prev = RowObservation::nominal(0.75);
        let out = validate(&raw(Some(fit(0.38, 1.0)), Some(fit(0.36, -1.0))), &prev, &thr, 0.025);
        assert!(out.left_valid && out.right_valid && out.phi_usable);
        assert_eq!(out.stale_age_left, 0.0);
        assert_eq!(out.d_left, 0.38);
        assert_eq!(out.d_right, 0.36);
    }

    #[test]
    fn validate_holds_last_value_on_noisy_fit() {
        let thr = ValidationThresholds::default();
        let prev = RowObservation::nominal(0.75);
        let mut noisy = fit(0.30, 1.0);
        noisy.residual_std = 0.08;
        let out = validate(&raw(Some(noisy), Some(fit(0.37, -1.0))), &prev, &thr, 0.025);
        assert!(!out.left_valid && out.left_usable);
        assert_eq!(out.d_left, 0.375);
        assert_eq!(out.stale_age_left, 0.025);
        assert!(out.right_valid);
    }

    #[test]
    fn validate_rejects_jumps() {
        let thr = ValidationThresholds::default();
        let prev = RowObservation::nominal(0.75);
        let out = validate(&raw(Some(fit(0.60, 1.0)), None), &prev, &thr, 0.025);
        assert!(!out.left_valid);
        let mut tilted = fit(0.37, 1.0);
        tilted.slope = (20f64).to_radians().tan();
        let out = validate(&raw(Some(tilted), None), &prev, &thr, 0.025);
        assert!(!out.left_valid);
    }

    #[test]
    fn occluded_side_goes_absent_after_staleness_limit() {
        // occluded left side scanned at 40 Hz; rule: usable while age <= 0.5 s
        let thr = ValidationThresholds::default();
        let dt = 0.025;
        let mut prev = RowObservation::nominal(0.75);
        let mut transitions = Vec::new();
        for k in 1..=30 {
            let out = validate(&raw(None, Some(fit(0.375, -1.0))), &prev, &thr, dt);
            let expected_age = k as f64 * dt;
            assert!((out.stale_age_left - expected_age).abs() < 1e-9);
            assert_eq!(out.left_usable, out.stale_age_left <= 0.5, "scan {k}");
            assert_eq!(out.d_left, 0.375);
            transitions.push(out.left_usable);
            prev = out;
        }
        // 0.5 s is 20 scans; accumulated rounding puts the boundary at scan 20 or 21
        let first_absent = transitions.iter().position(|u| !u).unwrap() + 1;
        assert!(first_absent == 20 || first_absent == 21, "{first_absent}");
        assert!(transitions[first_absent - 1..].iter().all(|u| !u));

        // a fresh fit after absence is accepted without a jump check
        let out = validate(&raw(Some(fit(0.55, 1.0)), Some(fit(0.2, -1.0))), &prev, &thr, dt);
        assert!(out.left_valid && out.left_usable && out.stale_age_left == 0.0);
    }

    #[test]
    fn phi_is_held_when_no_side_is_fresh() {
        let thr = ValidationThresholds::default();
        let mut prev = RowObservation::nominal(0.75);
        prev.phi_meas = 0.05;
        let out = validate(&raw(None, None), &prev, &thr, 0.2);
        assert_eq!(out.phi_meas, 0.05);
        assert!(out.phi_usable);
        let out = validate(&raw(None, None), &out, &thr, 0.4);
        assert!(!out.phi_usable && !out.left_usable && !out.right_usable);
    }

    proptest! {
        #[test]
        fn collinear_fit_reproduces_line(slope in -1.0..1.0f64, intercept in -1.0..1.0f64,
                                         xs in prop::collection::vec(0.0..2.0f64, 2..40)) {
            prop_assume!(xs.iter().any(|&x| (x - xs[0]).abs() > 1e-3));
            let pts: Vec<_> = xs.iter().map(|&x| Point2::new(x, slope * x + intercept)).collect();
            let fit = fit_line(&pts).unwrap();
            prop_assert!((fit.slope - slope).abs() <= 1e-10);
            prop_assert!((fit.intercept - intercept).abs() <= 1e-10);
            prop_assert!(fit.residual_std <= 1e-10);
        }

        #[test]
        fn residuals_sum_to_zero(pts in prop::collection::vec((0.0..2.0f64, -1.0..1.0f64), 3..60)) {
            let pts: Vec<_> = pts.into_iter().map(|(f, l)| Point2::new(f, l)).collect();
            if let Ok(fit) = fit_line(&pts) {
                let sum: f64 = pts.iter().map(|p| p.lateral - fit.slope * p.forward - fit.intercept).sum();
                prop_assert!(sum.abs() <= 1e-9 * pts.len() as f64);
                let expect = fit.intercept.abs() / (1.0 + fit.slope * fit.slope).sqrt();
                prop_assert!((fit.orthogonal_distance - expect).abs() <= 1e-15);
            }
        }

        #[test]
        fn histogram_selection_is_bounded_subset(pts in prop::collection::vec((0.0..2.0f64, -1.0..1.0f64), 1..60)) {
            let pts: Vec<_> = pts.into_iter().map(|(f, l)| Point2::new(f, l)).collect();
            let w = 0.05;
            let peak = histogram_peak(&pts, w).unwrap();
            prop_assert!(!peak.selected.is_empty());
            for p in &peak.selected {
                prop_assert!(pts.contains(p));
                prop_assert!(p.lateral.abs() >= peak.interval.0 - w - 1e-12);
                prop_assert!(p.lateral.abs() < peak.interval.1 + w + 1e-12);
            }
            let counts = brute_counts(&pts, w, 41);
            let best = *counts.iter().max().unwrap();
            prop_assert_eq!(peak.count, best);
            prop_assert_eq!(counts.iter().position(|&c| c == best).unwrap() as f64 * w, peak.interval.0);
        }

        #[test]
        fn validate_never_emits_threshold_violation(
            d in 0.05..0.74f64, count in 0usize..30, span in 0.0..2.0f64,
            res in 0.0..0.1f64, slope in -0.5..0.5f64, prev_d in 0.1..0.7f64,
        ) {
            let thr = ValidationThresholds::default();
            let f = LineFit { slope, intercept: d, orthogonal_distance: d, point_count: count, span, residual_std: res };
            let mut prev = RowObservation::nominal(0.75);
            prev.d_left = prev_d;
            let out = validate(&raw(Some(f), None), &prev, &thr, 0.025);
            if out.left_valid {
                prop_assert!(count >= thr.min_points && span >= thr.min_span && res <= thr.max_residual_std);
                prop_assert!((d - prev_d).abs() <= thr.max_distance_jump);
                prop_assert!(slope.atan().abs() <= thr.max_slope_jump + 1e-12);
            }
        }
    }
}

//! Declarative scenario description and the built-in presets.

use serde::{Deserialize, Serialize};

use crate::SimError;

/// Which row a gap or blocking leaf belongs to, seen from inside the lane.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RowSide {
    Left,
    Right,
    Both,
}

impl RowSide {
    pub fn covers_left(self) -> bool {
        matches!(self, RowSide::Left | RowSide::Both)
    }

    pub fn covers_right(self) -> bool {
        matches!(self, RowSide::Right | RowSide::Both)
    }
}

/// Stretch of row with no plants, in centerline arc length.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GapSpec {
    pub row_side: RowSide,
    pub start_m: f64,
    pub length_m: f64,
}

impl GapSpec {
    /// Half-open membership `[start, start + length)`.
    pub fn contains(&self, station: f64) -> bool {
        station >= self.start_m && station < self.start_m + self.length_m
    }
}

/// Left-hand constant-radius bend.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveSpec {
    pub radius_m: f64,
    pub arc_start_m: f64,
    pub arc_length_m: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSpec {
    /// Additive range noise, meters.
    pub range_sigma: f64,
    pub dropout_prob: f64,
    /// Additive gyro noise, rad/s.
    pub gyro_sigma: f64,
    /// Multiplicative odometry noise.
    pub odom_frac: f64,
    /// Additive yaw-rate actuation noise, rad/s.
    #[serde(default)]
    pub actuation_sigma: f64,
}

impl NoiseSpec {
    pub const NONE: NoiseSpec =
        NoiseSpec { range_sigma: 0.0, dropout_prob: 0.0, gyro_sigma: 0.0, odom_frac: 0.0, actuation_sigma: 0.0 };

    pub fn field_default() -> Self {
        NoiseSpec { range_sigma: 0.01, dropout_prob: 0.02, gyro_sigma: 0.01, odom_frac: 0.02, actuation_sigma: 0.02 }
    }
}

/// Leaf wall parallel to a row, a little inside the lane, that hides the row
/// behind it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockingLeaf {
    pub row_side: RowSide,
    pub start_m: f64,
    pub length_m: f64,
    /// How far the leaf sits inside the lane from the row line, meters.
    pub inset_m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldSpec {
    pub row_spacing: f64,
    pub plant_spacing: f64,
    pub row_length: f64,
    pub stem_radius: f64,
    /// Standard deviation of each stem's positional jitter, meters.
    #[serde(default)]
    pub stem_jitter: f64,
    #[serde(default)]
    pub gaps: Vec<GapSpec>,
    #[serde(default)]
    pub curve: Option<CurveSpec>,
    /// Leaves per meter of each lane row.
    #[serde(default)]
    pub clutter_density: f64,
    #[serde(default)]
    pub blocking_leaves: Vec<BlockingLeaf>,
    /// Extra rows modeled outside the lane on each side.
    #[serde(default = "default_neighbor_rows")]
    pub neighbor_rows_per_side: usize,
    pub noise: NoiseSpec,
    pub seed: u64,
}

fn default_neighbor_rows() -> usize {
    1
}

pub const MIN_CURVE_RADIUS: f64 = 8.0;

/// Names accepted by [`FieldSpec::preset`].
pub const PRESETS: [&str; 5] = ["clean", "lane-a", "lane-b", "curve", "production"];

impl FieldSpec {
    pub fn straight(row_length: f64) -> Self {
        FieldSpec {
            row_spacing: 0.75,
            plant_spacing: 0.1,
            row_length,
            stem_radius: 0.015,
            stem_jitter: 0.01,
            gaps: Vec::new(),
            curve: None,
            clutter_density: 0.0,
            blocking_leaves: Vec::new(),
            neighbor_rows_per_side: 1,
            noise: NoiseSpec::NONE,
            seed: 0,
        }
    }

    pub fn preset(name: &str) -> Option<Self> {
        let spec = match name {
            "clean" => Self::straight(100.0),
            "lane-a" => Self { clutter_density: 0.5, noise: NoiseSpec::field_default(), ..Self::straight(220.0) },
            "lane-b" => Self { gaps: lane_b_gaps(), ..Self::preset("lane-a")? },
            "curve" => Self {
                curve: Some(CurveSpec { radius_m: MIN_CURVE_RADIUS, arc_start_m: 15.0, arc_length_m: 15.0 }),
                ..Self::preset("lane-a").map(|s| Self { row_length: 50.0, ..s })?
            },
            "production" => Self {
                clutter_density: 2.0,
                blocking_leaves: vec![
                    BlockingLeaf { row_side: RowSide::Right, start_m: 40.0, length_m: 1.0, inset_m: 0.12 },
                    BlockingLeaf { row_side: RowSide::Left, start_m: 120.0, length_m: 0.8, inset_m: 0.1 },
                ],
                ..Self::preset("lane-b")?
            },
            _ => return None,
        };
        Some(spec)
    }

    pub fn from_json(text: &str) -> Result<Self, SimError> {
        let spec: FieldSpec = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("field spec serializes")
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |msg: String| Err(SimError::InvalidSpec(msg));
        let positive = [
            ("row_spacing", self.row_spacing),
            ("plant_spacing", self.plant_spacing),
            ("row_length", self.row_length),
            ("stem_radius", self.stem_radius),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return bad(format!("{name} must be positive and finite, got {v}"));
            }
        }
        if self.row_spacing <= 2.0 * self.stem_radius {
            return bad("row_spacing must exceed the stem diameter".into());
        }
        if !(self.stem_jitter >= 0.0 && self.clutter_density >= 0.0) {
            return bad("stem_jitter and clutter_density must be non-negative".into());
        }
        for g in &self.gaps {
            if !(g.start_m >= 0.0 && g.length_m > 0.0) || g.start_m + g.length_m > self.row_length {
                return bad(format!("gap at {} m of length {} m lies outside the row", g.start_m, g.length_m));
            }
        }
        for b in &self.blocking_leaves {
            if !(b.start_m >= 0.0 && b.length_m > 0.0) || b.start_m + b.length_m > self.row_length {
                return bad(format!("blocking leaf at {} m lies outside the row", b.start_m));
            }
            if !(b.inset_m >= 0.0 && b.inset_m < self.row_spacing / 2.0) {
                return bad(format!("blocking leaf inset {} m is outside the lane", b.inset_m));
            }
        }
        if let Some(c) = &self.curve {
            if !(c.radius_m >= MIN_CURVE_RADIUS) {
                return bad(format!("curve radius {} m is below {MIN_CURVE_RADIUS} m", c.radius_m));
            }
            if !(c.arc_start_m >= 0.0 && c.arc_length_m > 0.0) {
                return bad("curve arc must start at a non-negative station with positive length".into());
            }
            let outer = self.row_spacing * (self.neighbor_rows_per_side as f64 + 0.5);
            if outer >= c.radius_m {
                return bad("outermost row would cross the curve center".into());
            }
        }
        let n = &self.noise;
        for (name, v) in [
            ("range_sigma", n.range_sigma),
            ("gyro_sigma", n.gyro_sigma),
            ("odom_frac", n.odom_frac),
            ("actuation_sigma", n.actuation_sigma),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return bad(format!("noise.{name} must be non-negative, got {v}"));
            }
        }
        if !(0.0..=1.0).contains(&n.dropout_prob) {
            return bad(format!("noise.dropout_prob must lie in [0, 1], got {}", n.dropout_prob));
        }
        Ok(())
    }

    pub fn gap_flags(&self, station: f64) -> (bool, bool) {
        self.gaps.iter().filter(|g| g.contains(station)).fold((false, false), |(l, r), g| {
            (l || g.row_side.covers_left(), r || g.row_side.covers_right())
        })
    }
}

/// Twelve minor gaps of 0.5 to 1.0 m and one 2 m gap over a 220 m lane.
fn lane_b_gaps() -> Vec<GapSpec> {
    let sides = [RowSide::Left, RowSide::Right, RowSide::Both];
    let mut gaps: Vec<GapSpec> = (0..12)
        .map(|i| GapSpec { row_side: sides[i % 3], start_m: 12.0 + 16.0 * i as f64, length_m: 0.5 + 0.1 * (i % 6) as f64 })
        .collect();
    gaps.push(GapSpec { row_side: RowSide::Both, start_m: 100.0, length_m: 2.0 });
    gaps.sort_by(|a, b| a.start_m.total_cmp(&b.start_m));
    gaps
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_are_valid() {
        for name in PRESETS {
            FieldSpec::preset(name).unwrap().validate().unwrap();
        }
        assert!(FieldSpec::preset("nope").is_none());
    }

    #[test]
    fn lane_b_gap_lengths() {
        let gaps = lane_b_gaps();
        assert_eq!(gaps.len(), 13);
        let minor = gaps.iter().filter(|g| g.length_m <= 1.0 + 1e-12).count();
        assert_eq!(minor, 12);
        assert!(gaps.iter().all(|g| g.length_m >= 0.5 - 1e-12));
        assert_eq!(gaps.iter().filter(|g| g.length_m == 2.0).count(), 1);
    }

    #[test]
    fn rejects_bad_specs() {
        let mut s = FieldSpec::straight(10.0);
        s.gaps.push(GapSpec { row_side: RowSide::Left, start_m: 9.5, length_m: 1.0 });
        assert!(matches!(s.validate(), Err(SimError::InvalidSpec(_))));

        let mut s = FieldSpec::straight(10.0);
        s.curve = Some(CurveSpec { radius_m: 7.9, arc_start_m: 1.0, arc_length_m: 1.0 });
        assert!(s.validate().is_err());

        let mut s = FieldSpec::straight(10.0);
        s.noise.dropout_prob = 1.5;
        assert!(s.validate().is_err());
    }

    #[test]
    fn json_round_trip_and_unknown_keys() {
        let spec = FieldSpec::preset("production").unwrap();
        assert_eq!(FieldSpec::from_json(&spec.to_json()).unwrap(), spec);
        let text = spec.to_json().replacen('{', "{\"bogus\": 1,", 1);
        assert!(matches!(FieldSpec::from_json(&text), Err(SimError::Json(_))));
    }

    #[test]
    fn gap_membership_is_half_open() {
        let g = GapSpec { row_side: RowSide::Right, start_m: 2.0, length_m: 1.0 };
        assert!(!g.contains(1.999) && g.contains(2.0) && g.contains(2.999) && !g.contains(3.0));
    }
}

//! Flat key/value run configuration.
//!
//! The file is TOML; dotted keys such as `roi.forward_min = 0.1` or tables
//! such as `[pid]` are both accepted and flattened to the same key. Unknown
//! keys are rejected.

use std::fmt;

use rowfollow_core::{
    DriveConfig, GoalParams, NoiseConfig, PerceptionConfig, PidState, RoiBox, ValidationThresholds,
};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("config syntax: {0}")]
    Syntax(String),
    #[error("unknown config key `{0}`")]
    UnknownKey(String),
    #[error("config key `{key}`: {reason}")]
    BadValue { key: String, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Mode {
    #[serde(rename = "PL")]
    Pl,
    #[serde(rename = "PL+EKF")]
    PlEkf,
}

impl Mode {
    pub const BOTH: [Mode; 2] = [Mode::Pl, Mode::PlEkf];

    pub fn parse(s: &str) -> Option<Mode> {
        match s.to_ascii_uppercase().as_str() {
            "PL" => Some(Mode::Pl),
            "PL+EKF" | "EKF" | "PL-EKF" => Some(Mode::PlEkf),
            _ => None,
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Pl => "PL",
            Mode::PlEkf => "PL+EKF",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub perception: PerceptionConfig<f64>,
    pub thresholds: ValidationThresholds<f64>,
    pub ekf: NoiseConfig<f64>,
    pub ekf_enabled: bool,
    /// Initial filter variances for `d_L`, `d_R` and `phi`.
    pub ekf_initial_var: [f64; 3],
    pub goal: GoalParams<f64>,
    pub pid: PidState<f64>,
    pub drive: DriveConfig<f64>,
    pub lidar_rate_hz: f64,
    pub tick_hz: f64,
    /// Simulated time limit; `None` derives one from the row length.
    pub time_cap_s: Option<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            perception: PerceptionConfig::default(),
            thresholds: ValidationThresholds::default(),
            ekf: NoiseConfig::default(),
            ekf_enabled: true,
            ekf_initial_var: [0.01, 0.01, 0.01],
            goal: GoalParams::default(),
            pid: PidState::default(),
            drive: DriveConfig::default(),
            lidar_rate_hz: 40.0,
            tick_hz: 40.0,
            time_cap_s: None,
        }
    }
}

/// Every accepted key with a one-line description, for `--help`.
pub const KEYS: &[(&str, &str)] = &[
    ("roi.forward_min", "ROI near edge ahead of the sensor, m (0.1)"),
    ("roi.forward_max", "ROI far edge, m (1.9)"),
    ("roi.lateral_halfwidth", "ROI half width, m (1.0)"),
    ("hist.bin_width", "row histogram bin width, m (0.05)"),
    ("validate.min_points", "minimum points per side fit (8)"),
    ("validate.min_span", "minimum forward extent of a fit, m (0.3)"),
    ("validate.max_residual_std", "maximum fit residual std, m (0.05)"),
    ("validate.max_distance_jump", "maximum change of a side distance between scans, m (0.1)"),
    ("validate.max_slope_jump", "maximum heading change between scans, rad (15 deg)"),
    ("validate.max_stale_age", "how long a held value stays usable, s (0.5)"),
    ("lane.nominal_width", "nominal lane width for sanity bounds, m (0.75)"),
    ("ekf.q_diag", "process noise diagonal, 3 floats (0.001, 0.001, 0.01)"),
    ("ekf.r_diag", "measurement noise diagonal, 3 floats (0.05, 0.05, 0.5)"),
    ("ekf.initial_var", "initial covariance diagonal, 3 floats (0.01, 0.01, 0.01)"),
    ("ekf.enabled", "true for PL+EKF, false for PL when no --mode is given (true)"),
    ("goal.b", "trajectory curve smoothness (3.8)"),
    ("goal.c", "trajectory curve exponent (0.55)"),
    ("goal.e", "trajectory curve width, m (0.7)"),
    ("goal.d_ref", "reference lateral offset, m (0)"),
    ("goal.deadband", "lateral error mapped to zero reference, m (0.02)"),
    ("goal.phi_r_max", "reference heading clamp, rad, or \"off\" (pi/4)"),
    ("pid.kp", "heading proportional gain (2.0)"),
    ("pid.ki", "heading integral gain (0)"),
    ("pid.kd", "heading derivative gain (0.1)"),
    ("pid.omega_max", "angular rate limit, rad/s (1.5)"),
    ("drive.v_x", "forward speed, m/s (0.7)"),
    ("lidar.rate_hz", "perception rate, Hz; must divide the tick rate (40)"),
    ("sim.tick_hz", "dynamics and filter tick rate, Hz (40)"),
    ("sim.time_cap_s", "simulated time limit, s (derived from row length)"),
];

/// Help text listing every key.
pub fn keys_help() -> String {
    let width = KEYS.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    let mut out = String::from("Config keys (TOML, dotted or tabled):\n");
    for (k, d) in KEYS {
        out.push_str(&format!("  {k:<width$}  {d}\n"));
    }
    out
}

fn flatten(prefix: &str, table: &toml::Table, out: &mut Vec<(String, toml::Value)>) {
    for (k, v) in table {
        let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
        match v {
            toml::Value::Table(t) => flatten(&key, t, out),
            other => out.push((key, other.clone())),
        }
    }
}

fn number(key: &str, v: &toml::Value) -> Result<f64, ConfigError> {
    let x = match v {
        toml::Value::Float(f) => *f,
        toml::Value::Integer(i) => *i as f64,
        _ => return Err(bad(key, "expected a number")),
    };
    if !x.is_finite() {
        return Err(bad(key, "must be finite"));
    }
    Ok(x)
}

fn positive(key: &str, v: &toml::Value) -> Result<f64, ConfigError> {
    let x = number(key, v)?;
    if x <= 0.0 {
        return Err(bad(key, "must be positive"));
    }
    Ok(x)
}

fn triple(key: &str, v: &toml::Value) -> Result<[f64; 3], ConfigError> {
    let arr = v.as_array().ok_or_else(|| bad(key, "expected an array of 3 numbers"))?;
    if arr.len() != 3 {
        return Err(bad(key, "expected an array of 3 numbers"));
    }
    let mut out = [0.0; 3];
    for (o, x) in out.iter_mut().zip(arr) {
        *o = positive(key, x)?;
    }
    Ok(out)
}

fn bad(key: &str, reason: &str) -> ConfigError {
    ConfigError::BadValue { key: key.to_string(), reason: reason.to_string() }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let table: toml::Table = text.parse().map_err(|e: toml::de::Error| ConfigError::Syntax(e.to_string()))?;
        let mut pairs = Vec::new();
        flatten("", &table, &mut pairs);
        let mut cfg = RunConfig::default();
        for (key, value) in &pairs {
            cfg.set(key, value)?;
        }
        cfg.check()?;
        Ok(cfg)
    }

    /// Parses `key=value` overrides with TOML value syntax.
    pub fn apply_overrides(&mut self, overrides: &[String]) -> Result<(), ConfigError> {
        for o in overrides {
            let (key, value) = o.split_once('=').ok_or_else(|| ConfigError::Syntax(format!("expected key=value, got `{o}`")))?;
            let parsed: toml::Table = format!("v = {}", value.trim())
                .parse()
                .map_err(|e: toml::de::Error| ConfigError::Syntax(e.to_string()))?;
            self.set(key.trim(), &parsed["v"])?;
        }
        self.check()
    }

    fn set(&mut self, key: &str, v: &toml::Value) -> Result<(), ConfigError> {
        match key {
            "roi.forward_min" => self.perception.roi.forward_min = number(key, v)?,
            "roi.forward_max" => self.perception.roi.forward_max = number(key, v)?,
            "roi.lateral_halfwidth" => self.perception.roi.lateral_halfwidth = positive(key, v)?,
            "hist.bin_width" => self.perception.bin_width = positive(key, v)?,
            "validate.min_points" => {
                let n = v.as_integer().filter(|&n| n >= 2).ok_or_else(|| bad(key, "expected an integer >= 2"))?;
                self.thresholds.min_points = n as usize;
            }
            "validate.min_span" => self.thresholds.min_span = positive(key, v)?,
            "validate.max_residual_std" => self.thresholds.max_residual_std = positive(key, v)?,
            "validate.max_distance_jump" => self.thresholds.max_distance_jump = positive(key, v)?,
            "validate.max_slope_jump" => self.thresholds.max_slope_jump = positive(key, v)?,
            "validate.max_stale_age" => self.thresholds.max_stale_age = positive(key, v)?,
            "lane.nominal_width" => self.perception.nominal_lane_width = positive(key, v)?,
            "ekf.q_diag" => self.ekf.q_diag = triple(key, v)?,
            "ekf.r_diag" => self.ekf.r_diag = triple(key, v)?,
            "ekf.initial_var" => self.ekf_initial_var = triple(key, v)?,
            "ekf.enabled" => self.ekf_enabled = v.as_bool().ok_or_else(|| bad(key, "expected true or false"))?,
            "goal.b" => self.goal.b = positive(key, v)?,
            "goal.c" => self.goal.c = positive(key, v)?,
            "goal.e" => self.goal.e = positive(key, v)?,
            "goal.d_ref" => self.goal.d_ref = number(key, v)?,
            "goal.deadband" => {
                let x = number(key, v)?;
                if x < 0.0 {
                    return Err(bad(key, "must be non-negative"));
                }
                self.goal.deadband = x;
            }
            "goal.phi_r_max" => {
                self.goal.phi_r_max = match v.as_str() {
                    Some("off") => None,
                    Some(_) => return Err(bad(key, "expected a number or \"off\"")),
                    None => {
                        let x = positive(key, v)?;
                        if x > std::f64::consts::FRAC_PI_2 {
                            return Err(bad(key, "must not exceed pi/2"));
                        }
                        Some(x)
                    }
                }
            }
            "pid.kp" => self.pid.kp = number(key, v)?,
            "pid.ki" => self.pid.ki = number(key, v)?,
            "pid.kd" => self.pid.kd = number(key, v)?,
            "pid.omega_max" => {
                let x = positive(key, v)?;
                self.pid.omega_max = x;
                self.drive.omega_max = x;
            }
            "drive.v_x" => self.drive.v_x = positive(key, v)?,
            "lidar.rate_hz" => self.lidar_rate_hz = positive(key, v)?,
            "sim.tick_hz" => self.tick_hz = positive(key, v)?,
            "sim.time_cap_s" => self.time_cap_s = Some(positive(key, v)?),
            _ => return Err(ConfigError::UnknownKey(key.to_string())),
        }
        Ok(())
    }

    pub fn check(&self) -> Result<(), ConfigError> {
        RoiBox::new(self.perception.roi.forward_min, self.perception.roi.forward_max, self.perception.roi.lateral_halfwidth)
            .map_err(|e| bad("roi", &e.to_string()))?;
        self.scan_every()?;
        Ok(())
    }

    /// Ticks between scans.
    pub fn scan_every(&self) -> Result<u64, ConfigError> {
        let ratio = self.tick_hz / self.lidar_rate_hz;
        let n = ratio.round();
        if n < 1.0 || (ratio - n).abs() > 1e-9 {
            return Err(bad("lidar.rate_hz", "must divide sim.tick_hz"));
        }
        Ok(n as u64)
    }

    pub fn default_mode(&self) -> Mode {
        if self.ekf_enabled {
            Mode::PlEkf
        } else {
            Mode::Pl
        }
    }

    pub fn with_rate(&self, rate_hz: f64) -> Self {
        RunConfig { lidar_rate_hz: rate_hz, ..self.clone() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dotted_and_tabled_keys_agree() {
        let a = RunConfig::from_toml("pid.kp = 3.0\ngoal.phi_r_max = \"off\"\nekf.q_diag = [0.1, 0.2, 0.3]").unwrap();
        let b = RunConfig::from_toml("[pid]\nkp = 3\n[goal]\nphi_r_max = \"off\"\n[ekf]\nq_diag = [0.1, 0.2, 0.3]").unwrap();
        assert_eq!(a, b);
        assert_eq!(a.pid.kp, 3.0);
        assert_eq!(a.goal.phi_r_max, None);
        assert_eq!(a.ekf.q_diag, [0.1, 0.2, 0.3]);
    }

    #[test]
    fn every_documented_key_is_accepted() {
        for (key, _) in KEYS {
            let value = match *key {
                "ekf.q_diag" | "ekf.r_diag" | "ekf.initial_var" => "[0.1, 0.1, 0.1]",
                "ekf.enabled" => "false",
                "validate.min_points" => "9",
                "roi.forward_min" => "0.2",
                "roi.forward_max" => "1.5",
                "lidar.rate_hz" => "10",
                "sim.tick_hz" => "80",
                _ => "0.5",
            };
            RunConfig::from_toml(&format!("{key} = {value}")).unwrap_or_else(|e| panic!("{key}: {e}"));
        }
    }

    #[test]
    fn rejects_unknown_and_bad_values() {
        assert_eq!(RunConfig::from_toml("pid.kq = 1"), Err(ConfigError::UnknownKey("pid.kq".into())));
        assert!(matches!(RunConfig::from_toml("pid.kp = \"x\""), Err(ConfigError::BadValue { .. })));
        assert!(matches!(RunConfig::from_toml("lidar.rate_hz = 7"), Err(ConfigError::BadValue { .. })));
        assert!(matches!(RunConfig::from_toml("roi.forward_min = 3.0"), Err(ConfigError::BadValue { .. })));
        assert!(matches!(RunConfig::from_toml("pid.kp = "), Err(ConfigError::Syntax(_))));
    }

    #[test]
    fn overrides_and_scan_ratio() {
        let mut cfg = RunConfig::default();
        cfg.apply_overrides(&["lidar.rate_hz=5".into(), "drive.v_x = 0.5".into()]).unwrap();
        assert_eq!(cfg.scan_every().unwrap(), 8);
        assert_eq!(cfg.drive.v_x, 0.5);
        assert_eq!(Mode::parse("pl+ekf"), Some(Mode::PlEkf));
        assert_eq!(Mode::Pl.to_string(), "PL");
    }
}

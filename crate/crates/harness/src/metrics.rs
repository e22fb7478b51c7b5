//! Cross-track error, lane width and distance per intervention.

use std::collections::BTreeMap;

use rowfollow_sim::InterventionKind;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::record::RunRecord;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricsError {
    #[error("distance must be non-negative and finite, got {0}")]
    NegativeDistance(f64),
    #[error("record has no ticks")]
    EmptyRecord,
}

/// `0.5 (d_R - d_L)`, positive when the robot is left of center.
pub fn cte(d_left: f64, d_right: f64) -> f64 {
    0.5 * (d_right - d_left)
}

pub fn lane_width(d_left: f64, d_right: f64) -> f64 {
    d_left + d_right
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Dpi {
    pub value: f64,
    /// No relevant intervention happened; `value` is the total distance and
    /// only a lower bound.
    pub censored: bool,
}

pub fn distance_per_intervention(total_m: f64, relevant_count: usize) -> Result<Dpi, MetricsError> {
    if !(total_m >= 0.0 && total_m.is_finite()) {
        return Err(MetricsError::NegativeDistance(total_m));
    }
    Ok(match relevant_count {
        0 => Dpi { value: total_m, censored: true },
        n => Dpi { value: total_m / n as f64, censored: false },
    })
}

/// Failure category an event is reported under.
pub fn category(kind: InterventionKind) -> &'static str {
    match kind {
        InterventionKind::BadStart => "bad start",
        InterventionKind::GapLoss => "gap",
        // the detector cannot tell a control failure from a perception one
        InterventionKind::Collision | InterventionKind::LaneDeparture => "control/perception",
        InterventionKind::EndOfLane => "end of lane",
        InterventionKind::TimeCap => "time cap",
    }
}

/// Lane-width statistics against a nominal width: mean and the fractions
/// within 0.05 m and 0.10 m.
pub fn lane_width_stats(widths: &[f64], nominal: f64) -> (f64, f64, f64) {
    if widths.is_empty() {
        return (f64::NAN, 0.0, 0.0);
    }
    let n = widths.len() as f64;
    let within = |tol: f64| widths.iter().filter(|&&w| (w - nominal).abs() <= tol + 1e-12).count() as f64 / n;
    (widths.iter().sum::<f64>() / n, within(0.05), within(0.10))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsSummary {
    pub scenario_id: String,
    pub mode: String,
    pub seed: u64,
    /// From ground truth over every tick.
    pub mean_abs_cte: f64,
    pub max_abs_cte: f64,
    /// From scans where both sides were freshly valid; `None` without any.
    pub lw_mean: Option<f64>,
    pub lw_within_005: f64,
    pub lw_within_010: f64,
    pub lw_samples: usize,
    pub distance_m: f64,
    pub duration_s: f64,
    pub dpi: Dpi,
    pub relevant_interventions: usize,
    pub intervention_counts: BTreeMap<InterventionKind, usize>,
}

pub fn summarize(record: &RunRecord) -> Result<MetricsSummary, MetricsError> {
    if record.ticks.is_empty() {
        return Err(MetricsError::EmptyRecord);
    }
    let n = record.ticks.len() as f64;
    let abs_cte: Vec<f64> = record.ticks.iter().map(|t| t.truth.cte().abs()).collect();
    let widths: Vec<f64> = record
        .ticks
        .iter()
        .filter_map(|t| t.obs.filter(|o| o.both_valid()))
        .map(|o| lane_width(o.d_left, o.d_right))
        .collect();
    let (lw_mean, within_005, within_010) =
        lane_width_stats(&widths, record.header.config.perception.nominal_lane_width);

    let mut counts: BTreeMap<InterventionKind, usize> = InterventionKind::ALL.iter().map(|&k| (k, 0)).collect();
    for e in &record.events {
        *counts.entry(e.kind).or_default() += 1;
    }
    let relevant = record.events.iter().filter(|e| e.kind.is_relevant()).count();
    Ok(MetricsSummary {
        scenario_id: record.header.scenario_id.clone(),
        mode: record.header.mode.to_string(),
        seed: record.header.seed,
        mean_abs_cte: abs_cte.iter().sum::<f64>() / n,
        max_abs_cte: abs_cte.iter().cloned().fold(0.0, f64::max),
        lw_mean: (!widths.is_empty()).then_some(lw_mean),
        lw_within_005: within_005,
        lw_within_010: within_010,
        lw_samples: widths.len(),
        distance_m: record.totals.distance_m,
        duration_s: record.totals.duration_s,
        dpi: distance_per_intervention(record.totals.distance_m, relevant)?,
        relevant_interventions: relevant,
        intervention_counts: counts,
    })
}

pub const CSV_HEADER: &str = "scenario,mode,seed,mean_abs_cte,max_abs_cte,lw_mean,lw_within_005,lw_within_010,lw_samples,distance_m,duration_s,dpi,dpi_censored,relevant,collision,lane_departure,bad_start,gap_loss,end_of_lane,time_cap";

impl MetricsSummary {
    pub fn csv_row(&self) -> String {
        let c = |k| self.intervention_counts.get(&k).copied().unwrap_or(0);
        format!(
            "{},{},{},{:.6},{:.6},{},{:.6},{:.6},{},{:.3},{:.3},{:.3},{},{},{},{},{},{},{},{}",
            self.scenario_id,
            self.mode,
            self.seed,
            self.mean_abs_cte,
            self.max_abs_cte,
            self.lw_mean.map_or(String::new(), |v| format!("{v:.6}")),
            self.lw_within_005,
            self.lw_within_010,
            self.lw_samples,
            self.distance_m,
            self.duration_s,
            self.dpi.value,
            self.dpi.censored,
            self.relevant_interventions,
            c(InterventionKind::Collision),
            c(InterventionKind::LaneDeparture),
            c(InterventionKind::BadStart),
            c(InterventionKind::GapLoss),
            c(InterventionKind::EndOfLane),
            c(InterventionKind::TimeCap),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cte_and_lane_width_examples() {
        assert_eq!(cte(0.375, 0.375), 0.0);
        assert!((cte(0.35, 0.40) - 0.025).abs() < 1e-15);
        assert_eq!(cte(0.35, 0.40), -cte(0.40, 0.35));
        assert_eq!(lane_width(0.375, 0.375), 0.75);
        assert!((lane_width(0.35, 0.40) - 0.75).abs() < 1e-15);
        assert_eq!(lane_width(0.35, 0.40), lane_width(0.40, 0.35));
    }

    #[test]
    fn dpi_examples() {
        assert!((distance_per_intervention(6551.0, 138).unwrap().value - 47.47).abs() < 0.01);
        assert!((distance_per_intervention(28245.670, 73).unwrap().value - 386.93).abs() < 0.01);
        assert_eq!(distance_per_intervention(100.0, 0).unwrap(), Dpi { value: 100.0, censored: true });
        assert!(distance_per_intervention(-1.0, 3).is_err());
    }

    #[test]
    fn lane_width_fractions() {
        let widths = [0.75, 0.79, 0.86];
        // deviations 0, 0.04 and 0.11
        let count = |tol: f64| widths.iter().filter(|w| ((*w - 0.75_f64) * 100.0).round() <= tol * 100.0).count();
        let (mean, a, b) = lane_width_stats(&widths, 0.75);
        assert!((mean - 0.8).abs() < 1e-12);
        assert_eq!(count(0.05), 2);
        assert_eq!(count(0.10), 2);
        assert_eq!(a, 2.0 / 3.0);
        assert_eq!(b, 2.0 / 3.0);
    }
}

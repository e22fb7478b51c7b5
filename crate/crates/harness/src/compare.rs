//! Paired-seed PL vs PL+EKF comparison and perception-rate sweeps.

use rayon::prelude::*;
use rowfollow_sim::{build_field, FieldSpec};
use serde::{Deserialize, Serialize};

use crate::config::{Mode, RunConfig};
use crate::episode::{run_on_field, EpisodeOptions};
use crate::metrics::{summarize, MetricsSummary, CSV_HEADER};
use crate::record::RunRecord;
use crate::HarnessError;

/// One episode to run.
#[derive(Debug, Clone, PartialEq)]
pub struct Job {
    pub seed: u64,
    pub mode: Mode,
    pub cfg: RunConfig,
}

/// Runs every job, possibly concurrently; results come back in job order.
/// Jobs with the same seed share one field.
pub fn run_jobs(scenario_id: &str, spec: &FieldSpec, jobs: &[Job], opts: EpisodeOptions) -> Result<Vec<RunRecord>, HarnessError> {
    run_jobs_with(scenario_id, spec, jobs, opts, Ok)
}

/// Like [`run_jobs`], reducing each record with `reduce` as soon as its
/// episode finishes so full records never pile up.
pub fn run_jobs_with<R, F>(
    scenario_id: &str,
    spec: &FieldSpec,
    jobs: &[Job],
    opts: EpisodeOptions,
    reduce: F,
) -> Result<Vec<R>, HarnessError>
where
    R: Send,
    F: Fn(RunRecord) -> Result<R, HarnessError> + Sync,
{
    let mut seeds: Vec<u64> = jobs.iter().map(|j| j.seed).collect();
    seeds.sort_unstable();
    seeds.dedup();
    let fields = seeds
        .par_iter()
        .map(|&seed| build_field(&FieldSpec { seed, ..spec.clone() }).map(|f| (seed, f)))
        .collect::<Result<Vec<_>, _>>()?;
    jobs.par_iter()
        .map(|job| {
            let field = &fields.iter().find(|(s, _)| *s == job.seed).expect("field built for every seed").1;
            reduce(run_on_field(scenario_id, field, job.mode, &job.cfg, opts)?)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairedRow {
    pub seed: u64,
    pub field_hash: String,
    pub pl_relevant: usize,
    pub ekf_relevant: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub scenario_id: String,
    pub pl: Vec<MetricsSummary>,
    pub ekf: Vec<MetricsSummary>,
    pub pairs: Vec<PairedRow>,
    pub pl_median_relevant: f64,
    pub ekf_median_relevant: f64,
}

pub fn median(values: &[usize]) -> f64 {
    let mut v = values.to_vec();
    v.sort_unstable();
    match v.len() {
        0 => f64::NAN,
        n if n % 2 == 1 => v[n / 2] as f64,
        n => 0.5 * (v[n / 2 - 1] + v[n / 2]) as f64,
    }
}

pub fn compare_modes(scenario_id: &str, spec: &FieldSpec, seeds: &[u64], cfg: &RunConfig) -> Result<ComparisonReport, HarnessError> {
    if seeds.len() < 2 {
        return Err(HarnessError::Usage("a comparison needs at least two seeds".into()));
    }
    let jobs: Vec<Job> = seeds
        .iter()
        .flat_map(|&seed| Mode::BOTH.map(|mode| Job { seed, mode, cfg: cfg.clone() }))
        .collect();
    let results = run_jobs_with(scenario_id, spec, &jobs, EpisodeOptions::default(), |r| {
        Ok((r.header.field_hash.clone(), summarize(&r)?))
    })?;
    report_from_summaries(scenario_id, results)
}

/// Builds the paired report from `(field_hash, summary)` results laid out as
/// `[PL, PL+EKF]` per seed.
pub fn report_from_summaries(
    scenario_id: &str,
    results: Vec<(String, MetricsSummary)>,
) -> Result<ComparisonReport, HarnessError> {
    let mut pl = Vec::new();
    let mut ekf = Vec::new();
    let mut pairs = Vec::new();
    let mut it = results.into_iter();
    while let Some((hash_a, sa)) = it.next() {
        let Some((hash_b, sb)) = it.next() else {
            return Err(HarnessError::Usage("results must come in mode pairs".into()));
        };
        if hash_a != hash_b {
            return Err(HarnessError::Usage(format!("seed {} ran on different fields across modes", sa.seed)));
        }
        pairs.push(PairedRow {
            seed: sa.seed,
            field_hash: hash_a,
            pl_relevant: sa.relevant_interventions,
            ekf_relevant: sb.relevant_interventions,
        });
        pl.push(sa);
        ekf.push(sb);
    }
    let pl_counts: Vec<usize> = pairs.iter().map(|p| p.pl_relevant).collect();
    let ekf_counts: Vec<usize> = pairs.iter().map(|p| p.ekf_relevant).collect();
    Ok(ComparisonReport {
        scenario_id: scenario_id.to_string(),
        pl,
        ekf,
        pl_median_relevant: median(&pl_counts),
        ekf_median_relevant: median(&ekf_counts),
        pairs,
    })
}

impl ComparisonReport {
    pub fn to_csv(&self) -> String {
        let mut out = format!("{CSV_HEADER}\n");
        for s in self.pl.iter().chain(&self.ekf) {
            out.push_str(&s.csv_row());
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub rate_hz: f64,
    pub mode: Mode,
    pub seeds: Vec<u64>,
    pub relevant: Vec<usize>,
    pub total_relevant: usize,
    pub median_relevant: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub scenario_id: String,
    pub rows: Vec<SweepRow>,
    pub summaries: Vec<MetricsSummary>,
}

impl SweepReport {
    pub fn row(&self, rate_hz: f64, mode: Mode) -> Option<&SweepRow> {
        self.rows.iter().find(|r| r.rate_hz == rate_hz && r.mode == mode)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("scenario,rate_hz,mode,total_relevant,median_relevant\n");
        for r in &self.rows {
            out.push_str(&format!("{},{},{},{},{}\n", self.scenario_id, r.rate_hz, r.mode, r.total_relevant, r.median_relevant));
        }
        out
    }
}

/// Runs every `(rate, mode)` combination over the same seeds.
pub fn sweep(
    scenario_id: &str,
    spec: &FieldSpec,
    rates: &[f64],
    modes: &[Mode],
    seeds: &[u64],
    cfg: &RunConfig,
) -> Result<SweepReport, HarnessError> {
    let combos: Vec<(f64, Mode)> = rates.iter().flat_map(|&r| modes.iter().map(move |&m| (r, m))).collect();
    let jobs: Vec<Job> = combos
        .iter()
        .flat_map(|&(rate, mode)| seeds.iter().map(move |&seed| Job { seed, mode, cfg: cfg.with_rate(rate) }))
        .collect();
    let summaries = run_jobs_with(scenario_id, spec, &jobs, EpisodeOptions::default(), |r| Ok(summarize(&r)?))?;
    let rows = combos
        .iter()
        .zip(summaries.chunks(seeds.len()))
        .map(|(&(rate_hz, mode), chunk)| {
            let relevant: Vec<usize> = chunk.iter().map(|s| s.relevant_interventions).collect();
            SweepRow {
                rate_hz,
                mode,
                seeds: seeds.to_vec(),
                total_relevant: relevant.iter().sum(),
                median_relevant: median(&relevant),
                relevant,
            }
        })
        .collect();
    Ok(SweepReport { scenario_id: scenario_id.to_string(), rows, summaries })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn median_examples() {
        assert_eq!(median(&[3, 1, 2]), 2.0);
        assert_eq!(median(&[4, 1, 2, 3]), 2.5);
        assert!(median(&[]).is_nan());
    }
}

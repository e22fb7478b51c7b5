//! Log replay: recompute perception, filter, control and events from the
//! logged sensor data and poses.

use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use rowfollow_core::geometry::DEFAULT_MAX_RANGE;
use rowfollow_sim::{build_field, detect_intervention, ground_truth, EventHistory, InterventionEvent, InterventionKind};

use crate::config::Mode;
use crate::navigator::Navigator;
use crate::record::{RecordError, RunHeader, RunRecord, TickRecord, Totals};
use crate::HarnessError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ReplayWarning {
    ModeMismatch { logged: Mode, requested: Mode },
}

impl std::fmt::Display for ReplayWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ReplayWarning::ModeMismatch { logged, requested } => {
                write!(f, "log was recorded in {logged} mode, recomputing in {requested} mode")
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct Replay {
    pub record: RunRecord,
    pub warnings: Vec<ReplayWarning>,
}

pub fn replay_file(path: &Path, mode: Option<Mode>) -> Result<Replay, HarnessError> {
    let file = File::open(path).map_err(RecordError::Io)?;
    let logged = RunRecord::read_jsonl(BufReader::new(file))?;
    replay(&logged, mode)
}

/// Recomputes `logged` under `mode` (the logged mode when `None`).
pub fn replay(logged: &RunRecord, mode: Option<Mode>) -> Result<Replay, HarnessError> {
    let h = &logged.header;
    let mode = mode.unwrap_or(h.mode);
    let mut warnings = Vec::new();
    if mode != h.mode {
        let w = ReplayWarning::ModeMismatch { logged: h.mode, requested: mode };
        log::warn!("{w}");
        warnings.push(w);
    }
    let field = build_field(&h.field)?;
    let dt = 1.0 / h.config.tick_hz;
    let mut nav = Navigator::new(&h.config, mode);
    let mut history = EventHistory::default();
    let mut ticks = Vec::with_capacity(logged.ticks.len());
    let mut events = Vec::new();
    let mut distance = 0.0;

    for (i, tick) in logged.ticks.iter().enumerate() {
        let scan = match (&tick.scan, tick.scanned) {
            (Some(line), _) => Some(line.to_scan(DEFAULT_MAX_RANGE)),
            (None, true) => {
                // header is line 1, tick i is line i + 2
                return Err(RecordError::Schema { line: i + 2, reason: "log was written without scans".into() }.into());
            }
            (None, false) => None,
        };
        let out = nav.tick(&tick.input, scan.as_ref())?;
        let truth = ground_truth(&field, &tick.pose);
        history.record(&truth);
        let event = detect_intervention(&field, &tick.pose, &history)
            .map(|kind| InterventionEvent { kind, at_arc_m: tick.pose.arc_progress, at_time: tick.t });
        match event {
            Some(e) => {
                events.push(e);
                if e.kind != InterventionKind::EndOfLane {
                    nav.reset();
                }
            }
            None => distance += out.command.v_x_cmd.abs() * dt,
        }
        ticks.push(TickRecord {
            t: tick.t,
            pose: tick.pose,
            truth,
            input: tick.input,
            scan: tick.scan.clone(),
            scanned: tick.scanned,
            obs: out.obs,
            est: out.est,
            update: out.update,
            phi_ref: out.phi_ref,
            command: out.command,
            event,
        });
    }
    // the cap is a property of the loop, not of any tick
    events.extend(logged.events.iter().filter(|e| e.kind == InterventionKind::TimeCap));

    let duration_s = ticks.last().map_or(0.0, |t| t.t);
    let header = RunHeader { mode, ..h.clone() };
    Ok(Replay { record: RunRecord { header, ticks, totals: Totals { distance_m: distance, duration_s }, events }, warnings })
}

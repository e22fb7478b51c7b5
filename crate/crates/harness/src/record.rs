//! Episode records and their JSON Lines log format.
//!
//! Line 1 is the header, then one line per tick, then a footer with totals
//! and the event list. Every line carries a `type` tag; the header carries
//! `schema_version`.

use std::io::{BufRead, Write};

use rowfollow_core::scan_log::ScanLine;
use rowfollow_core::{Command, ControlInput, EkfEstimate, RowObservation, UpdateStatus};
use rowfollow_sim::{FieldSpec, GroundTruth, InterventionEvent, RobotPose};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::{Mode, RunConfig};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum RecordError {
    #[error("line {line}: {source}")]
    Parse { line: usize, source: serde_json::Error },
    #[error("line {line}: {reason}")]
    Schema { line: usize, reason: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunHeader {
    pub schema_version: u32,
    pub scenario_id: String,
    pub mode: Mode,
    pub seed: u64,
    pub config: RunConfig,
    pub field: FieldSpec,
    pub field_hash: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TickRecord {
    pub t: f64,
    pub pose: RobotPose,
    pub truth: GroundTruth,
    /// Odometry and gyro reading fed to the navigator.
    pub input: ControlInput<f64>,
    /// Raw sweep, kept when the episode logs scans.
    pub scan: Option<ScanLine>,
    /// Whether a sweep was taken this tick, even if not kept.
    pub scanned: bool,
    pub obs: Option<RowObservation<f64>>,
    pub est: Option<EkfEstimate<f64>>,
    pub update: Option<UpdateStatus>,
    pub phi_ref: f64,
    pub command: Command<f64>,
    pub event: Option<InterventionEvent>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Totals {
    /// Path length driven autonomously; operator resets are not counted.
    pub distance_m: f64,
    pub duration_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub header: RunHeader,
    pub ticks: Vec<TickRecord>,
    pub totals: Totals,
    pub events: Vec<InterventionEvent>,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
enum LogLine {
    Header(Box<RunHeader>),
    Tick(Box<TickRecord>),
    Footer { totals: Totals, events: Vec<InterventionEvent> },
}

#[derive(Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
enum LogLineRef<'a> {
    Header(&'a RunHeader),
    Tick(&'a TickRecord),
    Footer { totals: &'a Totals, events: &'a [InterventionEvent] },
}

fn line<W: Write>(out: &mut W, value: &LogLineRef<'_>) -> std::io::Result<()> {
    serde_json::to_writer(&mut *out, value)?;
    out.write_all(b"\n")
}

impl RunRecord {
    pub fn write_jsonl<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        line(out, &LogLineRef::Header(&self.header))?;
        for t in &self.ticks {
            line(out, &LogLineRef::Tick(t))?;
        }
        line(out, &LogLineRef::Footer { totals: &self.totals, events: &self.events })
    }

    pub fn to_jsonl(&self) -> Vec<u8> {
        let mut buf = Vec::new();
        self.write_jsonl(&mut buf).expect("writing to memory");
        buf
    }

    pub fn read_jsonl<R: BufRead>(input: R) -> Result<RunRecord, RecordError> {
        let mut header = None;
        let mut ticks = Vec::new();
        let mut footer = None;
        let mut last = 0;
        for (i, text) in input.lines().enumerate() {
            let n = i + 1;
            last = n;
            let text = text?;
            if text.trim().is_empty() {
                continue;
            }
            let schema = |reason: &str| RecordError::Schema { line: n, reason: reason.to_string() };
            if footer.is_some() {
                return Err(schema("content after footer"));
            }
            let parsed: LogLine = serde_json::from_str(&text).map_err(|source| RecordError::Parse { line: n, source })?;
            match parsed {
                LogLine::Header(h) => {
                    if header.is_some() || n != 1 {
                        return Err(schema("header must be the first line"));
                    }
                    if h.schema_version != SCHEMA_VERSION {
                        return Err(schema(&format!("unsupported schema_version {}", h.schema_version)));
                    }
                    header = Some(*h);
                }
                LogLine::Tick(t) => {
                    if header.is_none() {
                        return Err(schema("tick before header"));
                    }
                    if ticks.last().is_some_and(|p: &TickRecord| t.t <= p.t) {
                        return Err(schema("tick timestamps must increase"));
                    }
                    ticks.push(*t);
                }
                LogLine::Footer { totals, events } => footer = Some((totals, events)),
            }
        }
        let header = header.ok_or(RecordError::Schema { line: 1, reason: "missing header".into() })?;
        let (totals, events) =
            footer.ok_or(RecordError::Schema { line: last + 1, reason: "missing footer".into() })?;
        Ok(RunRecord { header, ticks, totals, events })
    }
}

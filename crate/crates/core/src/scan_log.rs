//! JSON Lines scan log: one `{"t", "rate_hz", "ranges"}` object per line.
//!
//! No-return beams are written as the sentinel `max_range + 1`, keeping every
//! line 1081 values wide. Floats are written in shortest round-trip form, so a
//! write/read cycle is bit exact.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{LaserScan, ScanError};

#[derive(Debug, Error)]
pub enum ScanLogError {
    #[error("line {line}: {source}")]
    Parse { line: usize, source: serde_json::Error },
    #[error("line {line}: {source}")]
    Invalid { line: usize, source: ScanError },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanLine {
    pub t: f64,
    pub rate_hz: f64,
    pub ranges: Vec<f64>,
}

impl ScanLine {
    /// No-return beams (non-finite or beyond range) become the sentinel.
    pub fn from_scan(scan: &LaserScan<f64>) -> Self {
        let sentinel = scan.no_return();
        Self {
            t: scan.timestamp,
            rate_hz: scan.rate_hz,
            ranges: scan.ranges.iter().map(|&r| if scan.is_return(r) { r } else { sentinel }).collect(),
        }
    }

    pub fn to_scan(&self, max_range: f64) -> LaserScan<f64> {
        LaserScan::with_max_range(self.t, self.rate_hz, self.ranges.clone(), max_range)
    }
}

pub fn write_line<W: Write>(out: &mut W, scan: &LaserScan<f64>) -> std::io::Result<()> {
    serde_json::to_writer(&mut *out, &ScanLine::from_scan(scan))?;
    out.write_all(b"\n")
}

pub fn write_scans<W: Write>(out: &mut W, scans: &[LaserScan<f64>]) -> std::io::Result<()> {
    scans.iter().try_for_each(|s| write_line(out, s))
}

/// Reads and validates every scan; errors name the 1-based line.
pub fn read_scans<R: BufRead>(input: R, max_range: f64) -> Result<Vec<LaserScan<f64>>, ScanLogError> {
    let mut scans = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed: ScanLine =
            serde_json::from_str(&line).map_err(|source| ScanLogError::Parse { line: line_no, source })?;
        let scan = parsed.to_scan(max_range);
        scan.validate().map_err(|source| ScanLogError::Invalid { line: line_no, source })?;
        scans.push(scan);
    }
    Ok(scans)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::DEFAULT_BEAM_COUNT;
    use proptest::prelude::*;

    #[test]
    fn truncated_line_reports_line_number() {
        let mut buf = Vec::new();
        let scan = LaserScan::new(0.0, 40.0, vec![1.0; DEFAULT_BEAM_COUNT]);
        write_scans(&mut buf, &[scan.clone(), scan]).unwrap();
        buf.truncate(buf.len() - 20);
        match read_scans(buf.as_slice(), 10.0) {
            Err(ScanLogError::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn wrong_width_is_rejected() {
        let text = "{\"t\":0.0,\"rate_hz\":40.0,\"ranges\":[1.0,2.0]}\n";
        assert!(matches!(read_scans(text.as_bytes(), 10.0), Err(ScanLogError::Invalid { line: 1, .. })));
    }

    #[test]
    fn infinite_ranges_are_written_as_sentinel() {
        let mut ranges = vec![1.0; DEFAULT_BEAM_COUNT];
        ranges[7] = f64::INFINITY;
        let line = ScanLine::from_scan(&LaserScan::new(0.0, 40.0, ranges));
        assert_eq!(line.ranges[7], 11.0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn round_trip_is_bit_exact(t in 0.0..1e4f64, ranges in prop::collection::vec(1e-3..10.0f64, DEFAULT_BEAM_COUNT)) {
            let scan = LaserScan::new(t, 40.0, ranges);
            let mut buf = Vec::new();
            write_line(&mut buf, &scan).unwrap();
            let back = read_scans(buf.as_slice(), 10.0).unwrap();
            prop_assert_eq!(back.len(), 1);
            prop_assert_eq!(back[0].timestamp.to_bits(), t.to_bits());
            for (a, b) in back[0].ranges.iter().zip(&scan.ranges) {
                prop_assert_eq!(a.to_bits(), b.to_bits());
            }
        }
    }
}

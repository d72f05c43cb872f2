//! Offline RSSI traces: CSV with header `slot,mini_slot,theta,rssi`.
//!
//! `slot` is the pair slot `k >= 2`, `mini_slot` runs `1..=N`, `theta` is the
//! training phase in radians and `rssi` the fed-back value. Every slot must
//! carry the same `N` mini-slots with the same phases.

use std::collections::BTreeMap;
use std::io::Write;

use thiserror::Error;

use crate::codebook::PhaseSet;
use crate::feedback::TrainingTable;

pub const TRACE_HEADER: [&str; 4] = ["slot", "mini_slot", "theta", "rssi"];

/// Phases of the same mini-slot in different slots must agree to this.
const THETA_AGREEMENT: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TraceError {
    #[error("trace is empty")]
    Empty,
    #[error("bad header: expected `slot,mini_slot,theta,rssi`, found `{0}`")]
    BadHeader(String),
    #[error("trace has a header but no records")]
    NoRecords,
    #[error("line {line}: {reason}")]
    Malformed { line: u64, reason: String },
    #[error("line {line}: duplicate record for slot {slot}, mini-slot {mini_slot}")]
    Duplicate {
        line: u64,
        slot: usize,
        mini_slot: usize,
    },
    #[error("slot {slot} is missing mini-slot {mini_slot}")]
    MissingMiniSlot { slot: usize, mini_slot: usize },
    #[error("pair slot {0} is missing")]
    MissingSlot(usize),
    #[error("line {line}: theta {found} for mini-slot {mini_slot} disagrees with {expected} in an earlier slot")]
    ThetaMismatch {
        line: u64,
        mini_slot: usize,
        found: f64,
        expected: f64,
    },
    #[error("csv: {0}")]
    Csv(String),
}

struct Row {
    line: u64,
    theta: f64,
    rssi: f64,
}

fn field<T: std::str::FromStr>(
    rec: &csv::StringRecord,
    i: usize,
    line: u64,
) -> Result<T, TraceError> {
    let raw = rec.get(i).ok_or_else(|| TraceError::Malformed {
        line,
        reason: format!("expected 4 fields, found {}", rec.len()),
    })?;
    raw.trim().parse().map_err(|_| TraceError::Malformed {
        line,
        reason: format!("cannot parse {} from `{raw}`", TRACE_HEADER[i]),
    })
}

/// Parses a trace into a training table.
pub fn parse_trace(text: &str) -> Result<TrainingTable, TraceError> {
    if text.trim().is_empty() {
        return Err(TraceError::Empty);
    }
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header = rdr
        .headers()
        .map_err(|e| TraceError::Csv(e.to_string()))?
        .clone();
    if header.len() != 4 || header.iter().zip(TRACE_HEADER).any(|(a, b)| a != b) {
        return Err(TraceError::BadHeader(
            header.iter().collect::<Vec<_>>().join(","),
        ));
    }

    let mut slots: BTreeMap<usize, BTreeMap<usize, Row>> = BTreeMap::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| match e.position() {
            Some(p) => TraceError::Malformed {
                line: p.line(),
                reason: e.to_string(),
            },
            None => TraceError::Csv(e.to_string()),
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != 4 {
            return Err(TraceError::Malformed {
                line,
                reason: format!("expected 4 fields, found {}", rec.len()),
            });
        }
        let slot: usize = field(&rec, 0, line)?;
        let mini_slot: usize = field(&rec, 1, line)?;
        let theta: f64 = field(&rec, 2, line)?;
        let rssi: f64 = field(&rec, 3, line)?;
        if slot < 2 {
            return Err(TraceError::Malformed {
                line,
                reason: format!("slot must be >= 2, got {slot}"),
            });
        }
        if mini_slot < 1 {
            return Err(TraceError::Malformed {
                line,
                reason: "mini_slot must be >= 1".into(),
            });
        }
        if !theta.is_finite() || !rssi.is_finite() {
            return Err(TraceError::Malformed {
                line,
                reason: "non-finite value".into(),
            });
        }
        let row = Row { line, theta, rssi };
        if slots
            .entry(slot)
            .or_default()
            .insert(mini_slot, row)
            .is_some()
        {
            return Err(TraceError::Duplicate {
                line,
                slot,
                mini_slot,
            });
        }
    }
    if slots.is_empty() {
        return Err(TraceError::NoRecords);
    }

    let last_slot = *slots.keys().next_back().expect("non-empty");
    if let Some(k) = (2..=last_slot).find(|k| !slots.contains_key(k)) {
        return Err(TraceError::MissingSlot(k));
    }
    let n = slots
        .values()
        .filter_map(|m| m.keys().next_back())
        .copied()
        .max()
        .expect("non-empty");
    for (&slot, minis) in &slots {
        if let Some(m) = (1..=n).find(|m| !minis.contains_key(m)) {
            return Err(TraceError::MissingMiniSlot { slot, mini_slot: m });
        }
    }

    let first = &slots[&2];
    let thetas: Vec<f64> = first.values().map(|r| r.theta).collect();
    for minis in slots.values() {
        for (&m, row) in minis {
            let expected = thetas[m - 1];
            if (row.theta - expected).abs() > THETA_AGREEMENT {
                return Err(TraceError::ThetaMismatch {
                    line: row.line,
                    mini_slot: m,
                    found: row.theta,
                    expected,
                });
            }
        }
    }
    let rows = slots
        .values()
        .map(|m| m.values().map(|r| r.rssi).collect())
        .collect();
    let theta = PhaseSet::new(thetas).map_err(|e| TraceError::Csv(e.to_string()))?;
    TrainingTable::new(theta, rows).map_err(|e| TraceError::Csv(e.to_string()))
}

/// Writes a table in trace format with round-trip precision.
pub fn write_trace<W: Write>(table: &TrainingTable, out: W) -> std::io::Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(TRACE_HEADER)?;
    let thetas = table.theta().thetas();
    for r in table.records() {
        w.write_record([
            r.slot.to_string(),
            r.mini_slot.to_string(),
            format!("{:e}", thetas[r.mini_slot - 1]),
            format!("{:e}", r.value),
        ])?;
    }
    w.flush()
}

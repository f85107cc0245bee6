//! Per-tick world snapshots and their JSON Lines encoding.
//!
//! Each line is `{"t":..,"drones":[{"id":..,"x":..,"y":..,"z":..,"mode":".."}]}`
//! with every float written in exponent form with 17 significant digits,
//! which round-trips exactly and keeps the output byte-stable.

use std::io::{BufRead, Write};

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::geometry::Point3;
use crate::planner::{DroneState, Mode};

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct DroneSnapshot {
    pub id: u32,
    #[serde(flatten)]
    pub position: Point3,
    pub mode: Mode,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct TickRecord {
    pub t: f64,
    pub drones: Vec<DroneSnapshot>,
}

impl TickRecord {
    /// Snapshot sorted by drone id.
    pub fn capture(t: f64, states: &[DroneState]) -> Self {
        let mut drones: Vec<DroneSnapshot> =
            states.iter().map(|s| DroneSnapshot { id: s.id, position: s.position, mode: s.mode }).collect();
        drones.sort_by_key(|d| d.id);
        Self { t, drones }
    }

    pub fn to_json_line(&self) -> String {
        let mut line = format!("{{\"t\":{},\"drones\":[", num(self.t));
        for (k, d) in self.drones.iter().enumerate() {
            if k > 0 {
                line.push(',');
            }
            line.push_str(&format!(
                "{{\"id\":{},\"x\":{},\"y\":{},\"z\":{},\"mode\":\"{}\"}}",
                d.id,
                num(d.position.x),
                num(d.position.y),
                num(d.position.z),
                d.mode.as_str()
            ));
        }
        line.push_str("]}");
        line
    }
}

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_jsonl<W: Write>(mut w: W, trace: &[TickRecord]) -> Result<()> {
    for record in trace {
        writeln!(w, "{}", record.to_json_line())?;
    }
    w.flush()?;
    Ok(())
}

pub fn to_jsonl_string(trace: &[TickRecord]) -> String {
    let mut out = String::new();
    for record in trace {
        out.push_str(&record.to_json_line());
        out.push('\n');
    }
    out
}

/// Parse a JSON Lines trace; blank lines are skipped, errors carry the
/// 1-based line number.
pub fn read_jsonl<R: BufRead>(r: R) -> Result<Vec<TickRecord>> {
    let mut trace = Vec::new();
    for (k, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: TickRecord =
            serde_json::from_str(&line).map_err(|e| Error::Parse { line: k + 1, message: e.to_string() })?;
        trace.push(record);
    }
    Ok(trace)
}

//! Run traces and their serialized forms.
//!
//! A [`Trace`] is the complete record of one run: the scenario, the seed,
//! every event, per-tick summary metrics, and per-agent snapshots at the
//! configured stride. Traces are immutable once a run completes and safe to
//! hand across threads.
//!
//! Two serializations are provided (see `docs/trace-format.md`):
//! * a newline-delimited CSV, one record per tick, with fields
//!   `tick,event,args[,id:x:y:level ...]` — byte-identical across platforms
//!   for equal `(scenario, seed)`;
//! * a JSON document carrying the full trace for tooling.

use crate::engine::{AgentId, Event};
use crate::metrics::TickMetrics;
use crate::protocol::Value;
use crate::scenario::Scenario;
use serde::{Deserialize, Serialize};
use std::io::{self, Write};

/// One agent's state inside a snapshot: id, intrinsic value, estimate, and
/// the protocol's auxiliary variable (`kappa` or `age`). Serialized as a
/// 4-tuple to keep the JSON form compact.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AgentRecord {
    pub id: AgentId,
    pub x: Value,
    pub y: Value,
    pub level: u64,
}

impl Serialize for AgentRecord {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        (self.id, self.x, self.y, self.level).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for AgentRecord {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let (id, x, y, level) = Deserialize::deserialize(deserializer)?;
        Ok(AgentRecord { id, x, y, level })
    }
}

/// How a run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RunOutcome {
    /// The full horizon was simulated.
    Completed,
    /// No event was constructible at `at_tick`; the trace stops there.
    Drained { at_tick: u64 },
}

/// The complete record of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub seed: u64,
    pub scenario: Scenario,
    pub outcome: RunOutcome,
    /// `(t, event)` pairs: the event at index `t` transformed the state at
    /// tick `t` into the state at tick `t + 1`.
    pub events: Vec<(u64, Event)>,
    /// One entry per reached tick, index = tick (so `metrics[0]` describes
    /// the initial population).
    pub metrics: Vec<TickMetrics>,
    /// `(tick, records)` pairs, ascending; tick 0 and the final tick are
    /// always present, plus every multiple of the snapshot stride.
    pub snapshots: Vec<(u64, Vec<AgentRecord>)>,
}

impl Trace {
    /// The last tick that has a state (equals the horizon unless drained).
    pub fn end_tick(&self) -> u64 {
        (self.metrics.len() as u64).saturating_sub(1)
    }

    /// Snapshot at an exact tick, if one was recorded.
    pub fn snapshot_at(&self, tick: u64) -> Option<&[AgentRecord]> {
        self.snapshots
            .binary_search_by_key(&tick, |(t, _)| *t)
            .ok()
            .map(|i| self.snapshots[i].1.as_slice())
    }

    /// Whether every reached tick has a snapshot.
    pub fn has_full_snapshots(&self) -> bool {
        self.snapshots.len() as u64 == self.end_tick() + 1
    }

    /// Writes the newline-delimited CSV form.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(
            w,
            "# maxgossip trace v1 scenario={} protocol={} seed={} horizon={} stride={}",
            self.scenario.name,
            self.scenario.protocol,
            self.seed,
            self.scenario.horizon,
            self.scenario.snapshot_stride
        )?;
        let mut snap_iter = self.snapshots.iter().peekable();
        for tick in 0..=self.end_tick() {
            if tick == 0 {
                write!(w, "0,init,")?;
            } else {
                let (_, event) = self.events[tick as usize - 1];
                match event {
                    Event::Arrival { id, x } => write!(w, "{tick},arrival,{id}|{x}")?,
                    Event::Departure { leaver, informed } => {
                        write!(w, "{tick},departure,{leaver}|")?;
                        if let Some(m) = informed {
                            write!(w, "{m}")?;
                        }
                    }
                    Event::Gossip { i, j } => write!(w, "{tick},gossip,{i}|{j}")?,
                }
            }
            if snap_iter.peek().map(|(t, _)| *t) == Some(tick) {
                let (_, records) = snap_iter.next().unwrap();
                for r in records {
                    write!(w, ",{}:{}:{}:{}", r.id, r.x, r.y, r.level)?;
                }
            }
            writeln!(w)?;
        }
        if let RunOutcome::Drained { at_tick } = self.outcome {
            writeln!(w, "{at_tick},drained,")?;
        }
        Ok(())
    }

    /// CSV form as a string.
    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to a Vec");
        String::from_utf8(buf).expect("trace CSV is UTF-8")
    }

    /// Compact JSON form.
    pub fn to_json_string(&self) -> String {
        serde_json::to_string(self).expect("trace serializes to JSON")
    }

    /// Parses the JSON form back into a trace.
    pub fn from_json_str(text: &str) -> Result<Trace, serde_json::Error> {
        serde_json::from_str(text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::run;
    use crate::scenario;

    #[test]
    fn csv_lines_cover_every_tick_plus_header() {
        let s = scenario::fig1a();
        let trace = run(&s, 7).unwrap();
        let csv = trace.to_csv_string();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len() as u64, trace.end_tick() + 2);
        assert!(lines[0].starts_with("# maxgossip trace v1 scenario=fig1a"));
        assert!(lines[1].starts_with("0,init,,0:102:102:0,"));
        // The scripted departure shows up on the line for tick 201.
        assert!(lines[201 + 1].starts_with("201,departure,9|"));
    }

    #[test]
    fn json_roundtrip_preserves_the_trace() {
        let s = scenario::fig1b();
        let mut small = s.clone();
        small.horizon = 300;
        let trace = run(&small, 11).unwrap();
        let back = Trace::from_json_str(&trace.to_json_string()).unwrap();
        assert_eq!(back, trace);
    }

    #[test]
    fn sparse_snapshots_keep_first_and_last_tick() {
        let mut s = scenario::fig1a();
        s.snapshot_stride = 700;
        s.name = "sparse".into();
        let trace = run(&s, 1).unwrap();
        assert!(!trace.has_full_snapshots());
        let ticks: Vec<u64> = trace.snapshots.iter().map(|(t, _)| *t).collect();
        assert_eq!(ticks, vec![0, 700, 1400, 2000]);
        assert!(trace.snapshot_at(0).is_some());
        assert!(trace.snapshot_at(2000).is_some());
        assert!(trace.snapshot_at(123).is_none());
    }
}

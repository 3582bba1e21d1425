//! Independent invariant checkers, computed from definitions over snapshots.
//!
//! Nothing here calls into the protocol transition functions: population
//! membership is replayed from event arguments alone ([`GhostLedger`]), and
//! every check re-derives its condition from the recorded states. A bug
//! shared between the engine and a checker therefore cannot certify itself.
//!
//! The checks:
//! * **valid-estimate property** ([`check_valid_estimates`]) — counter protocol: every
//!   agent carrying the maximal counter `K(t)` must hold the intrinsic value
//!   of a present agent that also carries `K(t)`;
//! * **lower bound** ([`check_lower_bound`]) — `y >= x`, both protocols;
//! * **provenance** ([`check_provenance_trace`]) — every estimate equals some
//!   present or departed agent's intrinsic value;
//! * **outdated-value tracking** ([`track_outdated`]) — for each departed
//!   value no present agent owns, the holder set `D(t)` and minimal age
//!   `tau(t)` per tick, through extinction.

use crate::engine::{AgentId, Event};
use crate::protocol::Value;
use crate::scenario::Protocol;
use crate::trace::{AgentRecord, Trace};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("not applicable: {0}")]
    NotApplicable(String),
    #[error("trace does not carry full per-tick snapshots (snapshot_stride > 1)")]
    MissingSnapshots,
}

/// A machine-readable counterexample: where, who, and the states involved.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub check: String,
    pub tick: u64,
    pub agents: Vec<AgentId>,
    pub states: Vec<AgentRecord>,
    pub message: String,
}

/// Outcome of one checker over a world or a whole trace.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail { violations: Vec<Violation> },
}

impl Verdict {
    pub fn is_pass(&self) -> bool {
        matches!(self, Verdict::Pass)
    }

    pub fn violations(&self) -> &[Violation] {
        match self {
            Verdict::Pass => &[],
            Verdict::Fail { violations } => violations,
        }
    }

    fn from_violations(violations: Vec<Violation>) -> Verdict {
        if violations.is_empty() {
            Verdict::Pass
        } else {
            Verdict::Fail { violations }
        }
    }
}

/// Valid-estimate property for one counter-protocol snapshot: agents at the
/// maximal counter `K(t)` hold the intrinsic value of some present agent at
/// `K(t)`.
pub fn check_valid_estimates(
    protocol: Protocol,
    tick: u64,
    records: &[AgentRecord],
) -> Result<Verdict, OracleError> {
    if protocol != Protocol::Timeout {
        let mut violations = Vec::new();
        if let Some(k) = records.iter().map(|r| r.level).max() {
            let x_at_k: Vec<Value> = records
                .iter()
                .filter(|r| r.level == k)
                .map(|r| r.x)
                .collect();
            for r in records.iter().filter(|r| r.level == k) {
                if !x_at_k.contains(&r.y) {
                    violations.push(Violation {
                        check: "valid_estimates".into(),
                        tick,
                        agents: vec![r.id],
                        states: vec![*r],
                        message: format!(
                            "agent {} at max counter {k} holds {} which is no max-counter agent's value",
                            r.id, r.y
                        ),
                    });
                }
            }
        }
        Ok(Verdict::from_violations(violations))
    } else {
        Err(OracleError::NotApplicable(
            "the valid-estimate property is defined for the counter protocol".into(),
        ))
    }
}

/// `y >= x` for every agent in a snapshot. Holds for both protocols.
pub fn check_lower_bound(tick: u64, records: &[AgentRecord]) -> Verdict {
    let violations = records
        .iter()
        .filter(|r| r.y < r.x)
        .map(|r| Violation {
            check: "lower_bound".into(),
            tick,
            agents: vec![r.id],
            states: vec![*r],
            message: format!(
                "agent {} has estimate {} below its own value {}",
                r.id, r.y, r.x
            ),
        })
        .collect();
    Verdict::from_violations(violations)
}

/// [`check_valid_estimates`] at every stored snapshot of a trace.
pub fn check_valid_estimates_trace(trace: &Trace) -> Result<Verdict, OracleError> {
    let mut violations = Vec::new();
    for (tick, records) in &trace.snapshots {
        match check_valid_estimates(trace.scenario.protocol, *tick, records)? {
            Verdict::Pass => {}
            Verdict::Fail { violations: v } => violations.extend(v),
        }
    }
    Ok(Verdict::from_violations(violations))
}

/// [`check_lower_bound`] at every stored snapshot of a trace.
pub fn check_lower_bound_trace(trace: &Trace) -> Verdict {
    let mut violations = Vec::new();
    for (tick, records) in &trace.snapshots {
        violations.extend(check_lower_bound(*tick, records).violations().to_vec());
    }
    Verdict::from_violations(violations)
}

/// Where an estimate's value can come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    /// Equals a present agent's intrinsic value.
    Present,
    /// Equals a departed agent's intrinsic value only.
    Departed,
    /// Matches nothing — impossible for a correct engine, and itself checked.
    Neither,
}

/// Population membership replayed from event arguments alone: which intrinsic
/// values are present, and which have departed so far. Protocol state is
/// deliberately not consulted.
#[derive(Debug, Clone)]
pub struct GhostLedger {
    present: BTreeMap<AgentId, Value>,
    departed: Vec<Value>,
}

impl GhostLedger {
    pub fn new(initial: &[AgentRecord]) -> GhostLedger {
        GhostLedger {
            present: initial.iter().map(|r| (r.id, r.x)).collect(),
            departed: Vec::new(),
        }
    }

    pub fn apply(&mut self, event: &Event) {
        match *event {
            Event::Arrival { id, x } => {
                self.present.insert(id, x);
            }
            Event::Departure { leaver, .. } => {
                if let Some(x) = self.present.remove(&leaver) {
                    self.departed.push(x);
                }
            }
            Event::Gossip { .. } => {}
        }
    }

    pub fn is_present_value(&self, v: Value) -> bool {
        self.present.values().any(|&x| x == v)
    }

    pub fn departed_values(&self) -> &[Value] {
        &self.departed
    }

    pub fn classify(&self, y: Value) -> Provenance {
        if self.is_present_value(y) {
            Provenance::Present
        } else if self.departed.contains(&y) {
            Provenance::Departed
        } else {
            Provenance::Neither
        }
    }
}

/// Every estimate in every stored snapshot must match a present or departed
/// agent's intrinsic value — estimates are only ever created at
/// initialization, so a value from nowhere is a bug.
pub fn check_provenance_trace(trace: &Trace) -> Verdict {
    let Some(initial) = trace.snapshot_at(0) else {
        return Verdict::Pass;
    };
    let mut ledger = GhostLedger::new(initial);
    let mut violations = Vec::new();
    let mut snaps = trace.snapshots.iter().peekable();
    for tick in 0..=trace.end_tick() {
        if tick > 0 {
            ledger.apply(&trace.events[tick as usize - 1].1);
        }
        if snaps.peek().map(|(t, _)| *t) != Some(tick) {
            continue;
        }
        let (_, records) = snaps.next().unwrap();
        for r in records {
            if ledger.classify(r.y) == Provenance::Neither {
                violations.push(Violation {
                    check: "provenance".into(),
                    tick,
                    agents: vec![r.id],
                    states: vec![*r],
                    message: format!(
                        "agent {} holds {} which matches no present or departed value",
                        r.id, r.y
                    ),
                });
            }
        }
    }
    Verdict::from_violations(violations)
}

/// `D(t)` and `tau(t)` at one tick for one outdated value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutdatedSample {
    pub tick: u64,
    /// Number of present agents holding the value as their estimate.
    pub d_size: u64,
    /// Minimal age among the holders (timeout protocol, `d_size > 0` only).
    pub tau: Option<u64>,
}

/// The life of one outdated value: per-tick holder counts from the first
/// tick the value was outdated until the end of the trace.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutdatedTrack {
    pub value: Value,
    /// First tick at which the value was outdated (no present agent owns it).
    pub first_outdated_tick: u64,
    /// Samples at every tick where the value is outdated, ascending.
    pub samples: Vec<OutdatedSample>,
    /// First sampled tick from which `D(t)` stays empty through the end.
    pub extinct_tick: Option<u64>,
}

impl OutdatedTrack {
    /// `tau` never decreases across consecutive ticks while `D` is non-empty.
    pub fn tau_monotone_while_nonempty(&self) -> bool {
        self.samples.windows(2).all(|w| {
            let (a, b) = (&w[0], &w[1]);
            if b.tick != a.tick + 1 || a.d_size == 0 || b.d_size == 0 {
                return true;
            }
            match (a.tau, b.tau) {
                (Some(x), Some(y)) => y >= x,
                _ => true,
            }
        })
    }

    /// `tau <= effective threshold` whenever `D` is non-empty.
    pub fn tau_bounded(&self, threshold: &crate::protocol::Threshold) -> bool {
        self.samples.iter().all(|s| match s.tau {
            Some(tau) if s.d_size > 0 => tau <= threshold.effective(s.tick),
            _ => true,
        })
    }
}

/// Report over all outdated values of a trace.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct OutdatedReport {
    pub tracks: Vec<OutdatedTrack>,
}

impl OutdatedReport {
    pub fn all_extinct(&self) -> bool {
        self.tracks.iter().all(|t| t.extinct_tick.is_some())
    }
}

/// Tracks every departed value through the ticks where it is outdated
/// (equal to no present agent's intrinsic value). Departed values that are
/// always duplicated by a present agent never become outdated and are
/// excluded. Requires full snapshots.
pub fn track_outdated(trace: &Trace) -> Result<OutdatedReport, OracleError> {
    if !trace.has_full_snapshots() {
        return Err(OracleError::MissingSnapshots);
    }
    let Some(initial) = trace.snapshot_at(0) else {
        return Ok(OutdatedReport::default());
    };
    let timeout = trace.scenario.protocol == Protocol::Timeout;
    let mut ledger = GhostLedger::new(initial);
    let mut tracks: Vec<OutdatedTrack> = Vec::new();
    for tick in 0..=trace.end_tick() {
        if tick > 0 {
            ledger.apply(&trace.events[tick as usize - 1].1);
        }
        let records = trace.snapshot_at(tick).expect("full snapshots");
        // One candidate per distinct departed value.
        for z in ledger.departed_values() {
            if ledger.is_present_value(*z) {
                continue; // not outdated at this tick
            }
            let holders: Vec<&AgentRecord> = records.iter().filter(|r| r.y == *z).collect();
            let sample = OutdatedSample {
                tick,
                d_size: holders.len() as u64,
                tau: if timeout {
                    holders.iter().map(|r| r.level).min()
                } else {
                    None
                },
            };
            match tracks.iter_mut().find(|t| t.value == *z) {
                Some(track) => {
                    if track.samples.last().map(|s| s.tick) != Some(tick) {
                        track.samples.push(sample);
                    }
                }
                None => tracks.push(OutdatedTrack {
                    value: *z,
                    first_outdated_tick: tick,
                    samples: vec![sample],
                    extinct_tick: None,
                }),
            }
        }
    }
    for track in &mut tracks {
        let last_nonempty = track
            .samples
            .iter()
            .rev()
            .find(|s| s.d_size > 0)
            .map(|s| s.tick);
        track.extinct_tick = match last_nonempty {
            None => track.samples.first().map(|s| s.tick),
            Some(t) => track.samples.iter().map(|s| s.tick).find(|&tick| tick > t),
        };
    }
    Ok(OutdatedReport { tracks })
}

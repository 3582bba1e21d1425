//! Per-trace analytics and the closed-form convergence bounds.
//!
//! Convergence here is the suffix condition: a run has settled at tick `t`
//! when every present agent's estimate equals the population maximum at every
//! tick from `t` through the end of the trace. First-hit reconvergence (the
//! quantity the timeout protocol's spurious resets can undo) is exposed
//! separately as [`first_correct_tick`].

use crate::engine::AgentId;
use crate::protocol::Value;
use crate::scenario::Protocol;
use crate::trace::{AgentRecord, Trace};
use serde::{Deserialize, Serialize};
use std::io::{self, Write};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MetricsError {
    #[error("not applicable: {0}")]
    NotApplicable(String),
    #[error("trace does not carry full per-tick snapshots (snapshot_stride > 1)")]
    MissingSnapshots,
    #[error("domain error: {0}")]
    Domain(String),
}

/// Summary of one tick's population.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TickMetrics {
    pub tick: u64,
    pub population: u64,
    /// Maximum intrinsic value over present agents; `None` when empty.
    pub current_max: Option<Value>,
    /// Number of agents whose estimate equals `current_max`.
    pub num_correct: u64,
    /// Largest counter value over present agents (counter protocol only).
    pub max_kappa: Option<u64>,
    pub min_y: Option<Value>,
    pub max_y: Option<Value>,
}

impl TickMetrics {
    pub fn from_records(tick: u64, protocol: Protocol, records: &[AgentRecord]) -> Self {
        let current_max = records.iter().map(|r| r.x).max();
        let num_correct = match current_max {
            Some(m) => records.iter().filter(|r| r.y == m).count() as u64,
            None => 0,
        };
        let max_kappa = match protocol {
            Protocol::Counter => records.iter().map(|r| r.level).max(),
            Protocol::Timeout => None,
        };
        TickMetrics {
            tick,
            population: records.len() as u64,
            current_max,
            num_correct,
            max_kappa,
            min_y: records.iter().map(|r| r.y).min(),
            max_y: records.iter().map(|r| r.y).max(),
        }
    }

    /// True when the population is non-empty and every estimate equals the
    /// current maximum.
    pub fn all_correct(&self) -> bool {
        self.population > 0 && self.num_correct == self.population
    }
}

/// Result of the suffix-condition convergence test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub converged: bool,
    /// Least tick `t >= reference_tick` such that every tick in `[t, end]`
    /// is all-correct.
    pub settle_tick: Option<u64>,
    /// `settle_tick - reference_tick`.
    pub steps_from_event: Option<u64>,
}

/// Suffix-condition convergence: all-correct from `settle_tick` through the
/// end of the trace. A first-hit consensus later broken (e.g. by a spurious
/// reset) does not count.
pub fn convergence_time(trace: &Trace, reference_tick: u64) -> ConvergenceReport {
    let end = trace.end_tick();
    let mut settle = None;
    if reference_tick <= end {
        for t in (reference_tick..=end).rev() {
            if trace.metrics[t as usize].all_correct() {
                settle = Some(t);
            } else {
                break;
            }
        }
    }
    ConvergenceReport {
        converged: settle.is_some(),
        settle_tick: settle,
        steps_from_event: settle.map(|t| t - reference_tick),
    }
}

/// First tick at or after `reference_tick` where every present agent's
/// estimate equals the population maximum. Unlike [`convergence_time`] the
/// condition need not hold afterwards.
pub fn first_correct_tick(trace: &Trace, reference_tick: u64) -> Option<u64> {
    trace
        .metrics
        .iter()
        .skip(reference_tick as usize)
        .find(|m| m.all_correct())
        .map(|m| m.tick)
}

/// Threshold resets that discarded an estimate which still matched a present
/// agent's intrinsic value. Returns `(tick, agent)` pairs, where `tick` is
/// the tick of the gossip event during which the reset fired.
///
/// Detection is re-derived from snapshots and events alone: a reset fired for
/// a gossip participant holding foreign information (`y != x`) whose
/// pre-event age equalled the effective threshold.
pub fn spurious_resets(trace: &Trace) -> Result<Vec<(u64, AgentId)>, MetricsError> {
    if trace.scenario.protocol != Protocol::Timeout {
        return Err(MetricsError::NotApplicable(
            "spurious resets only exist under the timeout protocol".into(),
        ));
    }
    if !trace.has_full_snapshots() {
        return Err(MetricsError::MissingSnapshots);
    }
    let threshold = trace
        .scenario
        .threshold
        .expect("timeout scenarios carry a threshold");
    let mut out = Vec::new();
    for &(tick, event) in &trace.events {
        let crate::engine::Event::Gossip { i, j } = event else {
            continue;
        };
        let pre = trace
            .snapshot_at(tick)
            .expect("full snapshots checked above");
        let t_star = threshold.effective(tick);
        for id in [i, j] {
            let Some(rec) = pre.iter().find(|r| r.id == id) else {
                continue;
            };
            if rec.y != rec.x && rec.level == t_star {
                let still_valid = pre.iter().any(|other| other.x == rec.y);
                if still_valid {
                    out.push((tick, id));
                }
            }
        }
    }
    Ok(out)
}

/// The n-th harmonic number, `sum_{k=1..n} 1/k`.
pub fn harmonic(n: u64) -> Result<f64, MetricsError> {
    if n == 0 {
        return Err(MetricsError::Domain("harmonic(0) is undefined".into()));
    }
    // Summed smallest-first to keep floating point error down.
    Ok((1..=n).rev().map(|k| 1.0 / k as f64).sum())
}

fn check_phases(phases: u32) -> Result<f64, MetricsError> {
    match phases {
        1 | 2 => Ok(phases as f64),
        other => Err(MetricsError::Domain(format!(
            "phases must be 1 or 2, got {other}"
        ))),
    }
}

/// Upper bound on the expected number of gossip ticks for one (or, composed,
/// two) classical max-gossip phases over a static population of `n_bar`:
/// `phases * (n_bar - 1) * h_{n_bar - 1}`.
pub fn expected_convergence_bound(n_bar: u64, phases: u32) -> Result<f64, MetricsError> {
    if n_bar < 2 {
        return Err(MetricsError::Domain(format!(
            "population bound needs n_bar >= 2, got {n_bar}"
        )));
    }
    let phases = check_phases(phases)?;
    Ok(phases * (n_bar - 1) as f64 * harmonic(n_bar - 1)?)
}

/// Bound that holds with probability `1 - epsilon` on the same quantity:
/// `phases * (n-1) h_{n-1} * (1 + ln(n/eps) * (1 + sqrt(1 + 1/ln(n/eps))))`,
/// with the natural logarithm.
pub fn high_prob_bound(n_bar: u64, epsilon: f64, phases: u32) -> Result<f64, MetricsError> {
    if n_bar < 2 {
        return Err(MetricsError::Domain(format!(
            "population bound needs n_bar >= 2, got {n_bar}"
        )));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(MetricsError::Domain(format!(
            "epsilon must lie in (0, 1), got {epsilon}"
        )));
    }
    let ratio = n_bar as f64 / epsilon;
    if ratio <= 1.0 {
        return Err(MetricsError::Domain(format!(
            "n_bar/epsilon = {ratio} must exceed 1"
        )));
    }
    let phases = check_phases(phases)?;
    let log = ratio.ln();
    let base = (n_bar - 1) as f64 * harmonic(n_bar - 1)?;
    Ok(phases * base * (1.0 + log * (1.0 + (1.0 + 1.0 / log).sqrt())))
}

/// Per-tick metrics CSV: `tick,max,num_correct,k,min_y,max_y`, empty fields
/// where a quantity is undefined (empty world, or `k` under timeout).
pub fn write_metrics_csv<W: Write>(trace: &Trace, mut w: W) -> io::Result<()> {
    writeln!(w, "tick,max,num_correct,k,min_y,max_y")?;
    fn opt<T: std::fmt::Display>(v: Option<T>) -> String {
        v.map(|x| x.to_string()).unwrap_or_default()
    }
    for m in &trace.metrics {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            m.tick,
            opt(m.current_max),
            m.num_correct,
            opt(m.max_kappa),
            opt(m.min_y),
            opt(m.max_y)
        )?;
    }
    Ok(())
}

/// Metrics CSV as a string.
pub fn metrics_csv_string(trace: &Trace) -> String {
    let mut buf = Vec::new();
    write_metrics_csv(trace, &mut buf).expect("writing to a Vec");
    String::from_utf8(buf).expect("metrics CSV is UTF-8")
}

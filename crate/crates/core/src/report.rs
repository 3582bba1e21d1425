//! Per-run summary: convergence figures, oracle verdicts, spurious-reset
//! counts, and the closed-form bounds, bundled into one JSON document.

use crate::metrics::{self, ConvergenceReport, MetricsError};
use crate::oracle::{self, OracleError, Verdict, Violation};
use crate::scenario::{ChurnModel, Scenario};
use crate::trace::{RunOutcome, Trace};
use serde::{Deserialize, Serialize};

/// Condensed verdict for the summary document; full counterexamples travel
/// separately (see [`RunReport::violations`]).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum VerdictSummary {
    Pass,
    Fail {
        violations: usize,
    },
    NotApplicable,
    /// The trace lacks the snapshots the check needs (stride > 1).
    Skipped,
}

impl VerdictSummary {
    fn from_verdict(v: &Verdict) -> VerdictSummary {
        match v {
            Verdict::Pass => VerdictSummary::Pass,
            Verdict::Fail { violations } => VerdictSummary::Fail {
                violations: violations.len(),
            },
        }
    }

    pub fn is_failure(&self) -> bool {
        matches!(self, VerdictSummary::Fail { .. })
    }
}

/// Closed-form bounds evaluated for the run's final population size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundsReport {
    pub n_bar: u64,
    pub expected_one_phase: f64,
    pub expected_two_phase: f64,
    pub high_prob_epsilon: f64,
    pub high_prob_one_phase: f64,
    pub high_prob_two_phase: f64,
}

impl BoundsReport {
    /// Bounds for a static population of `n_bar` agents at the default
    /// epsilon of 0.05. `None` when `n_bar < 2`.
    pub fn for_population(n_bar: u64) -> Option<BoundsReport> {
        let epsilon = 0.05;
        Some(BoundsReport {
            n_bar,
            expected_one_phase: metrics::expected_convergence_bound(n_bar, 1).ok()?,
            expected_two_phase: metrics::expected_convergence_bound(n_bar, 2).ok()?,
            high_prob_epsilon: epsilon,
            high_prob_one_phase: metrics::high_prob_bound(n_bar, epsilon, 1).ok()?,
            high_prob_two_phase: metrics::high_prob_bound(n_bar, epsilon, 2).ok()?,
        })
    }
}

/// Outdated-value verdicts condensed for the summary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutdatedSummary {
    pub values_tracked: usize,
    pub all_extinct: bool,
    pub tau_monotone: bool,
    pub tau_bounded: bool,
}

/// Oracle section of the summary.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleSummary {
    pub valid_estimates: VerdictSummary,
    pub lower_bound: VerdictSummary,
    pub provenance: VerdictSummary,
    pub outdated: Option<OutdatedSummary>,
}

/// The run-summary document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub tool_version: String,
    pub seed: u64,
    pub scenario: Scenario,
    pub outcome: RunOutcome,
    pub end_tick: u64,
    /// Tick reconvergence is measured from: the last scripted departure, the
    /// stochastic churn stop, or 0.
    pub reference_tick: u64,
    pub convergence: ConvergenceReport,
    /// First all-correct tick after the reference event (from tick 0 when
    /// there is no reference event).
    pub first_correct_tick: Option<u64>,
    /// Timeout protocol with full snapshots only.
    pub spurious_reset_count: Option<u64>,
    pub bounds: Option<BoundsReport>,
    pub oracle: OracleSummary,
}

/// A built summary plus the full counterexample records behind any failures.
#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub summary: RunSummary,
    pub violations: Vec<Violation>,
}

impl RunReport {
    /// True when every applicable oracle verdict passed.
    pub fn oracle_ok(&self) -> bool {
        let o = &self.summary.oracle;
        let outdated_ok = o.outdated.is_none_or(|s| s.tau_monotone && s.tau_bounded);
        !o.valid_estimates.is_failure()
            && !o.lower_bound.is_failure()
            && !o.provenance.is_failure()
            && outdated_ok
    }
}

fn default_reference_tick(scenario: &Scenario) -> u64 {
    match &scenario.churn {
        ChurnModel::Scripted { .. } => scenario.churn.last_departure_tick().unwrap_or(0),
        ChurnModel::Stochastic { stop_tick, .. } => stop_tick.unwrap_or(0),
    }
}

/// Runs every analysis over a finished trace.
pub fn build_report(trace: &Trace) -> RunReport {
    let reference_tick = default_reference_tick(&trace.scenario);
    let mut violations = Vec::new();

    let valid_estimates = match oracle::check_valid_estimates_trace(trace) {
        Ok(v) => {
            violations.extend(v.violations().to_vec());
            VerdictSummary::from_verdict(&v)
        }
        Err(OracleError::NotApplicable(_)) => VerdictSummary::NotApplicable,
        Err(OracleError::MissingSnapshots) => VerdictSummary::Skipped,
    };
    let lower_bound = {
        let v = oracle::check_lower_bound_trace(trace);
        violations.extend(v.violations().to_vec());
        VerdictSummary::from_verdict(&v)
    };
    let provenance = {
        let v = oracle::check_provenance_trace(trace);
        violations.extend(v.violations().to_vec());
        VerdictSummary::from_verdict(&v)
    };
    let outdated = match oracle::track_outdated(trace) {
        Ok(report) => {
            let tau_monotone = report
                .tracks
                .iter()
                .all(|t| t.tau_monotone_while_nonempty());
            let tau_bounded = match trace.scenario.threshold {
                Some(th) => report.tracks.iter().all(|t| t.tau_bounded(&th)),
                None => true,
            };
            Some(OutdatedSummary {
                values_tracked: report.tracks.len(),
                all_extinct: report.all_extinct(),
                tau_monotone,
                tau_bounded,
            })
        }
        Err(_) => None,
    };

    let spurious_reset_count = match metrics::spurious_resets(trace) {
        Ok(resets) => Some(resets.len() as u64),
        Err(MetricsError::NotApplicable(_)) | Err(MetricsError::MissingSnapshots) => None,
        Err(MetricsError::Domain(_)) => None,
    };

    let final_population = trace.metrics.last().map(|m| m.population).unwrap_or(0);

    let summary = RunSummary {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        seed: trace.seed,
        scenario: trace.scenario.clone(),
        outcome: trace.outcome,
        end_tick: trace.end_tick(),
        reference_tick,
        convergence: metrics::convergence_time(trace, reference_tick),
        first_correct_tick: metrics::first_correct_tick(
            trace,
            if reference_tick == 0 {
                0
            } else {
                reference_tick + 1
            },
        ),
        spurious_reset_count,
        bounds: BoundsReport::for_population(final_population),
        oracle: OracleSummary {
            valid_estimates,
            lower_bound,
            provenance,
            outdated,
        },
    };
    RunReport {
        summary,
        violations,
    }
}

/// Summary JSON (pretty-printed, deterministic field order).
pub fn summary_json(summary: &RunSummary) -> String {
    serde_json::to_string_pretty(summary).expect("summary serializes to JSON")
}

/// Counterexample JSON for failed verdicts.
pub fn violations_json(violations: &[Violation]) -> String {
    serde_json::to_string_pretty(violations).expect("violations serialize to JSON")
}

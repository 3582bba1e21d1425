//! Deterministic simulator and protocol library for gossip-based
//! max-consensus in open multi-agent systems — populations where agents join
//! and leave while the computation runs.
//!
//! The crate provides:
//!
//! * [`protocol`] — the pure state-transition rules of both protocols: the
//!   counter variant (departures are announced to one peer) and the timeout
//!   variant (departures are silent and stale information ages out);
//! * [`engine`] — a seeded one-event-per-tick loop over a complete
//!   interaction graph, with byte-for-byte replayable traces;
//! * [`scenario`] — declarative churn scenarios (TOML/JSON) and the built-in
//!   experiment set;
//! * [`metrics`] — convergence detection, spurious-reset counting, and the
//!   harmonic-number convergence bounds;
//! * [`oracle`] — invariant checkers computed from definitions over
//!   snapshots, independent of the protocol code they audit;
//! * [`report`] — per-run summary documents gluing the above together.

pub mod engine;
pub mod metrics;
pub mod oracle;
pub mod protocol;
pub mod report;
pub mod scenario;
pub mod trace;

pub use engine::{run, Agent, AgentId, AgentState, EngineError, Event, World};
pub use metrics::{ConvergenceReport, TickMetrics};
pub use protocol::{CounterAgent, Threshold, TimeoutAgent, Value};
pub use scenario::{parse_scenario, ChurnModel, Protocol, Scenario, ScenarioError};
pub use trace::{AgentRecord, RunOutcome, Trace};

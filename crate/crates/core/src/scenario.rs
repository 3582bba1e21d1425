//! Declarative churn scenarios: who is present initially, which events are
//! scripted or drawn stochastically, and for how long a run lasts.
//!
//! Scenarios are parsed from TOML (or an equivalent JSON document) and fully
//! validated before a run starts; see `docs/scenario-format.md` for the
//! schema. Parsed scenarios are immutable and freely shareable.

use crate::protocol::{Threshold, Value};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Which protocol a scenario runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Protocol {
    Counter,
    Timeout,
}

impl std::fmt::Display for Protocol {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Protocol::Counter => write!(f, "counter"),
            Protocol::Timeout => write!(f, "timeout"),
        }
    }
}

impl std::str::FromStr for Protocol {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "counter" => Ok(Protocol::Counter),
            "timeout" => Ok(Protocol::Timeout),
            other => Err(format!("unknown protocol {other:?} (counter|timeout)")),
        }
    }
}

/// The population present at tick 0.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialPopulation {
    /// Exact intrinsic values, assigned to agent ids 0..n in order.
    Explicit { values: Vec<Value> },
    /// `count` values drawn uniformly from `[lo, hi]` at run start (seeded).
    /// With `distinct`, values are drawn without replacement.
    Random {
        count: usize,
        lo: i64,
        hi: i64,
        distinct: bool,
    },
}

impl InitialPopulation {
    pub fn count(&self) -> usize {
        match self {
            InitialPopulation::Explicit { values } => values.len(),
            InitialPopulation::Random { count, .. } => *count,
        }
    }
}

/// Who a scripted departure removes: the string `"max"` or an agent id.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DepartTarget {
    /// The current holder of the maximum intrinsic value (lowest id on ties),
    /// resolved at event time.
    MaxHolder,
    /// A specific agent id.
    Agent(u64),
}

impl Serialize for DepartTarget {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            DepartTarget::MaxHolder => serializer.serialize_str("max"),
            DepartTarget::Agent(id) => serializer.serialize_u64(*id),
        }
    }
}

impl<'de> Deserialize<'de> for DepartTarget {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct TargetVisitor;
        impl serde::de::Visitor<'_> for TargetVisitor {
            type Value = DepartTarget;
            fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
                write!(f, "\"max\" or a non-negative agent id")
            }
            fn visit_str<E: serde::de::Error>(self, s: &str) -> Result<DepartTarget, E> {
                match s {
                    "max" => Ok(DepartTarget::MaxHolder),
                    other => Err(E::custom(format!("unknown depart target {other:?}"))),
                }
            }
            fn visit_u64<E: serde::de::Error>(self, v: u64) -> Result<DepartTarget, E> {
                Ok(DepartTarget::Agent(v))
            }
            fn visit_i64<E: serde::de::Error>(self, v: i64) -> Result<DepartTarget, E> {
                u64::try_from(v)
                    .map(DepartTarget::Agent)
                    .map_err(|_| E::custom("agent id must be non-negative"))
            }
        }
        deserializer.deserialize_any(TargetVisitor)
    }
}

/// A scripted arrival or departure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "action", rename_all = "snake_case")]
pub enum ScriptedAction {
    Arrive { value: Value },
    Depart { target: DepartTarget },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScriptedEvent {
    pub tick: u64,
    #[serde(flatten)]
    pub action: ScriptedAction,
}

/// How churn is generated. Ticks not claimed by churn are gossip.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum ChurnModel {
    /// Exactly the listed events at their listed ticks (sorted, unique);
    /// every other tick is a gossip interaction.
    Scripted {
        #[serde(default)]
        events: Vec<ScriptedEvent>,
    },
    /// Independent per-tick draws: arrival with `p_arrival`, departure with
    /// `p_departure`, gossip otherwise. After `stop_tick` only gossip occurs.
    Stochastic {
        p_arrival: f64,
        p_departure: f64,
        stop_tick: Option<u64>,
        value_range: (i64, i64),
    },
}

impl ChurnModel {
    /// Convenience: no churn at all, every tick is gossip.
    pub fn none() -> Self {
        ChurnModel::Scripted { events: Vec::new() }
    }

    /// Tick of the last scripted departure, if any (used as the default
    /// reference point for reconvergence measurements).
    pub fn last_departure_tick(&self) -> Option<u64> {
        match self {
            ChurnModel::Scripted { events } => events
                .iter()
                .filter(|e| matches!(e.action, ScriptedAction::Depart { .. }))
                .map(|e| e.tick)
                .max(),
            ChurnModel::Stochastic { .. } => None,
        }
    }

    /// First tick from which no arrival or departure can occur.
    pub fn churn_stop_tick(&self) -> Option<u64> {
        match self {
            ChurnModel::Scripted { events } => {
                Some(events.iter().map(|e| e.tick + 1).max().unwrap_or(0))
            }
            ChurnModel::Stochastic { stop_tick, .. } => *stop_tick,
        }
    }
}

/// A complete, validated run description.
///
/// Plain fields come before the table-valued ones so the TOML rendering of a
/// scenario is valid as written.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub protocol: Protocol,
    /// Number of ticks to simulate.
    pub horizon: u64,
    /// Full per-agent snapshots are recorded every `snapshot_stride` ticks
    /// (tick 0 and the final tick are always recorded).
    #[serde(default = "default_stride")]
    pub snapshot_stride: u64,
    pub initial: InitialPopulation,
    /// Required for the timeout protocol, forbidden for the counter protocol.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold: Option<Threshold>,
    pub churn: ChurnModel,
}

fn default_stride() -> u64 {
    1
}

impl Scenario {
    /// Checks every structural invariant; returns the first violation with a
    /// config-relative field path.
    pub fn validate(&self) -> Result<(), ScenarioError> {
        let err = |path: &str, message: String| {
            Err(ScenarioError::Invalid {
                path: path.to_string(),
                message,
            })
        };
        if self.horizon == 0 {
            return err("horizon", "must be >= 1".into());
        }
        if self.snapshot_stride == 0 {
            return err("snapshot_stride", "must be >= 1".into());
        }
        match (self.protocol, &self.threshold) {
            (Protocol::Timeout, None) => {
                return err("threshold", "required for the timeout protocol".into())
            }
            (Protocol::Counter, Some(_)) => {
                return err("threshold", "not allowed for the counter protocol".into())
            }
            _ => {}
        }
        if let Some(t) = &self.threshold {
            if t.base() == 0 {
                return err("threshold.base", "must be >= 1".into());
            }
            if let crate::protocol::ThresholdPolicy::Linear { den, .. } = t.policy() {
                if den == 0 {
                    return err("threshold.policy.den", "must be >= 1".into());
                }
            }
        }
        match &self.initial {
            InitialPopulation::Explicit { .. } => {}
            InitialPopulation::Random {
                count,
                lo,
                hi,
                distinct,
            } => {
                if lo > hi {
                    return err("initial.range", format!("empty range [{lo}, {hi}]"));
                }
                let range_size = (*hi as i128 - *lo as i128 + 1) as u128;
                if *distinct && (*count as u128) > range_size {
                    return err(
                        "initial.count",
                        format!("{count} distinct values cannot fit in [{lo}, {hi}]"),
                    );
                }
            }
        }
        match &self.churn {
            ChurnModel::Scripted { events } => {
                let mut seen = std::collections::BTreeSet::new();
                for (idx, ev) in events.iter().enumerate() {
                    if ev.tick >= self.horizon {
                        return err(
                            &format!("churn.events[{idx}].tick"),
                            format!("scripted tick {} is past horizon {}", ev.tick, self.horizon),
                        );
                    }
                    if !seen.insert(ev.tick) {
                        return err(
                            &format!("churn.events[{idx}].tick"),
                            format!("duplicate scripted tick {}", ev.tick),
                        );
                    }
                }
            }
            ChurnModel::Stochastic {
                p_arrival,
                p_departure,
                value_range: (lo, hi),
                ..
            } => {
                for (path, p) in [
                    ("churn.p_arrival", p_arrival),
                    ("churn.p_departure", p_departure),
                ] {
                    if !(0.0..=1.0).contains(p) {
                        return err(path, format!("probability {p} outside [0, 1]"));
                    }
                }
                if p_arrival + p_departure > 1.0 {
                    return err(
                        "churn.p_departure",
                        format!(
                            "p_arrival + p_departure = {} exceeds 1",
                            p_arrival + p_departure
                        ),
                    );
                }
                if lo > hi {
                    return err("churn.value_range", format!("empty range [{lo}, {hi}]"));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("scenario parse error: {0}")]
    Parse(String),
    #[error("invalid scenario at `{path}`: {message}")]
    Invalid { path: String, message: String },
}

/// Parses a scenario document. Documents starting with `{` are treated as
/// JSON, everything else as TOML. The result is fully validated.
pub fn parse_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    let scenario: Scenario = if text.trim_start().starts_with('{') {
        serde_json::from_str(text).map_err(|e| ScenarioError::Parse(e.to_string()))?
    } else {
        toml::from_str(text).map_err(|e| ScenarioError::Parse(e.to_string()))?
    };
    scenario.validate()?;
    Ok(scenario)
}

/// Renders a scenario back to its TOML form. `parse_scenario` of the output
/// yields an equal scenario.
pub fn to_toml_string(scenario: &Scenario) -> String {
    toml::to_string(scenario).expect("scenario serializes to TOML")
}

/// Renders a scenario to the JSON form of the config grammar.
pub fn to_json_string(scenario: &Scenario) -> String {
    serde_json::to_string_pretty(scenario).expect("scenario serializes to JSON")
}

/// The 25-agent reference population used by the built-in `fig1*` scenarios:
/// random-looking values in [0, 1000] with maximum 936 (agent 9) and
/// runner-up 815 (agent 13).
pub const FIG1_VALUES: [i64; 25] = [
    102, 455, 733, 241, 58, 390, 566, 677, 14, 936, 804, 329, 188, 815, 472, 640, 91, 273, 757, 35,
    519, 611, 143, 698, 366,
];

/// Maximum of [`FIG1_VALUES`]; departs at tick 200 in the `fig1*` scenarios.
pub const FIG1_MAX: i64 = 936;
/// Runner-up of [`FIG1_VALUES`]; the target the `fig1*` runs reconverge to.
pub const FIG1_SECOND: i64 = 815;

/// Threshold rule used by the `table1-*` scenarios: `ceil(1.1 * n)`.
pub fn table1_threshold(n: usize) -> u64 {
    (11 * n as u64).div_ceil(10)
}

fn fig1_initial() -> InitialPopulation {
    InitialPopulation::Explicit {
        values: FIG1_VALUES.iter().copied().map(Value).collect(),
    }
}

fn depart_max_at(tick: u64) -> ChurnModel {
    ChurnModel::Scripted {
        events: vec![ScriptedEvent {
            tick,
            action: ScriptedAction::Depart {
                target: DepartTarget::MaxHolder,
            },
        }],
    }
}

/// 25 agents, counter protocol, max-holder departs at tick 200.
pub fn fig1a() -> Scenario {
    Scenario {
        name: "fig1a".into(),
        protocol: Protocol::Counter,
        initial: fig1_initial(),
        churn: depart_max_at(200),
        threshold: None,
        horizon: 2000,
        snapshot_stride: 1,
    }
}

/// Same population and departure as `fig1a`, timeout protocol with T* = 40.
pub fn fig1b() -> Scenario {
    Scenario {
        name: "fig1b".into(),
        protocol: Protocol::Timeout,
        initial: fig1_initial(),
        churn: depart_max_at(200),
        threshold: Some(Threshold::fixed(40)),
        horizon: 5000,
        snapshot_stride: 1,
    }
}

/// Same population and departure as `fig1a`, timeout protocol with T* = 200.
pub fn fig1c() -> Scenario {
    Scenario {
        name: "fig1c".into(),
        protocol: Protocol::Timeout,
        initial: fig1_initial(),
        churn: depart_max_at(200),
        threshold: Some(Threshold::fixed(200)),
        horizon: 8000,
        snapshot_stride: 1,
    }
}

/// Tick at which the `table1-*` scenarios remove the max-holder: late enough
/// for the initial consensus to have settled at every supported size.
pub fn table1_departure_tick(n: usize) -> u64 {
    (20 * n as u64).max(200)
}

fn table1_horizon(n: usize) -> u64 {
    // Post-departure window sized after the timeout protocol, which is by far
    // the slower of the two to reconverge.
    table1_departure_tick(n) + 4000 + 2 * (n as u64) * (n as u64)
}

/// Size-N comparison scenarios: n distinct values in [0, 1000], zero churn
/// until the max-holder departs, then reconvergence is measured. Returns the
/// (counter, timeout) pair; the timeout variant uses T* = ceil(1.1 * n).
pub fn table1(n: usize) -> (Scenario, Scenario) {
    let initial = InitialPopulation::Random {
        count: n,
        lo: 0,
        hi: 1000,
        distinct: true,
    };
    let horizon = table1_horizon(n);
    let counter = Scenario {
        name: format!("table1-{n}-counter"),
        protocol: Protocol::Counter,
        initial: initial.clone(),
        churn: depart_max_at(table1_departure_tick(n)),
        threshold: None,
        horizon,
        snapshot_stride: horizon,
    };
    let timeout = Scenario {
        name: format!("table1-{n}-timeout"),
        protocol: Protocol::Timeout,
        initial,
        churn: depart_max_at(table1_departure_tick(n)),
        threshold: Some(Threshold::fixed(table1_threshold(n))),
        horizon,
        snapshot_stride: horizon,
    };
    (counter, timeout)
}

/// All built-in scenarios, in listing order.
pub fn builtin_scenarios() -> Vec<Scenario> {
    let mut out = vec![fig1a(), fig1b(), fig1c()];
    for n in [10, 20, 30, 50, 100] {
        let (c, t) = table1(n);
        out.push(c);
        out.push(t);
    }
    out
}

/// Looks a built-in scenario up by name.
pub fn builtin(name: &str) -> Option<Scenario> {
    builtin_scenarios().into_iter().find(|s| s.name == name)
}

//! Pure state-transition rules for the two max-consensus protocols.
//!
//! Everything here is a total function of its arguments: no randomness, no
//! clocks, no shared state. The [engine](crate::engine) decides who interacts
//! with whom and feeds the returned states back into the population, so every
//! rule can be unit-tested by hand-tracing.
//!
//! Two protocols are implemented:
//!
//! * **Counter** — departing agents announce their exit to one peer. Each
//!   agent carries an information-level counter `kappa`; gossip gives strict
//!   priority to higher counters, which is what lets estimates inherited from
//!   departed agents be discarded.
//! * **Timeout** — departures are silent. Each agent tracks the age of the
//!   information behind its estimate and resets to its own intrinsic value
//!   once that age reaches a threshold.
//!
//! Estimates are exact 64-bit integers rather than floats: both protocols
//! branch on value *equality* (`y == x`, `y_i == y_j`), which must be exact
//! for replay to be deterministic across platforms.

use serde::{Deserialize, Serialize};

/// An agent's intrinsic value, fixed for its lifetime at the moment it joins.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default,
)]
#[serde(transparent)]
pub struct Value(pub i64);

impl std::fmt::Display for Value {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.0.fmt(f)
    }
}

impl From<i64> for Value {
    fn from(v: i64) -> Self {
        Value(v)
    }
}

/// Agent state under the counter protocol.
///
/// Invariants maintained by the transition functions below (given valid
/// inputs): `y >= x` always, and `kappa` never decreases for a given agent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CounterAgent {
    /// Intrinsic value, immutable.
    pub x: Value,
    /// Current estimate of the population maximum.
    pub y: Value,
    /// Information level: how up to date this agent is about departures.
    pub kappa: u64,
}

impl CounterAgent {
    /// State of a freshly joined (or initial) agent: `y = x`, `kappa = 0`.
    pub fn new(x: Value) -> Self {
        CounterAgent { x, y: x, kappa: 0 }
    }
}

/// Agent state under the timeout protocol.
///
/// `age` counts the agent's own interactions since the information behind its
/// estimate originated; it is pinned to 0 while the estimate is the agent's
/// own value. Post-transition states satisfy `y >= x` and `age <= t_star`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimeoutAgent {
    /// Intrinsic value, immutable.
    pub x: Value,
    /// Current estimate of the population maximum.
    pub y: Value,
    /// Age of the information behind `y`, in own-interaction counts.
    pub age: u64,
}

impl TimeoutAgent {
    /// State of a freshly joined (or initial) agent: `y = x`, `age = 0`.
    pub fn new(x: Value) -> Self {
        TimeoutAgent { x, y: x, age: 0 }
    }
}

/// Reaction of the informed agent `m` when a leaver announces its departure
/// together with its counter value.
///
/// If the leaver was at most as informed as `m`, it cannot have influenced
/// `m`'s estimate and the message is ignored. Otherwise `m` falls back to its
/// own (certainly valid) value and jumps its counter above everyone the
/// leaver could have influenced.
pub fn departure_update(m: CounterAgent, leaver_kappa: u64) -> CounterAgent {
    if leaver_kappa < m.kappa {
        m
    } else {
        CounterAgent {
            x: m.x,
            y: m.x,
            kappa: leaver_kappa + 1,
        }
    }
}

/// Pairwise exchange under the counter protocol.
///
/// Equal counters exchange estimates freely; across a counter gap only the
/// lower agent's *intrinsic* value may contribute, and the lower agent is
/// pulled up to the higher counter. Both returned states always share the
/// same estimate, and both counters equal `max(kappa_i, kappa_j)`.
pub fn counter_gossip(i: CounterAgent, j: CounterAgent) -> (CounterAgent, CounterAgent) {
    use std::cmp::Ordering;
    match i.kappa.cmp(&j.kappa) {
        Ordering::Equal => {
            let y = i.y.max(j.y);
            (CounterAgent { y, ..i }, CounterAgent { y, ..j })
        }
        Ordering::Greater => {
            // j's estimate may be tainted by a departure i already knows
            // about; only j's own value is allowed to contribute.
            let y = i.y.max(j.x);
            (
                CounterAgent { y, ..i },
                CounterAgent {
                    y,
                    kappa: i.kappa,
                    ..j
                },
            )
        }
        Ordering::Less => {
            let y = i.x.max(j.y);
            (
                CounterAgent {
                    y,
                    kappa: j.kappa,
                    ..i
                },
                CounterAgent { y, ..j },
            )
        }
    }
}

/// One timer step for a timeout-protocol agent.
///
/// An agent sitting on its own value has nothing to distrust, so its age
/// stays 0; otherwise the information gets one interaction older. The
/// threshold test reads the *pre-update* age, so an agent whose age has
/// reached `t_star` discards its estimate on its next interaction.
pub fn update_timer(s: TimeoutAgent, t_star: u64) -> TimeoutAgent {
    let reached = s.age == t_star;
    let mut next = if s.y == s.x {
        TimeoutAgent { age: 0, ..s }
    } else {
        TimeoutAgent {
            age: s.age + 1,
            ..s
        }
    };
    if reached {
        next.y = next.x;
        next.age = 0;
    }
    next
}

/// Pairwise exchange under the timeout protocol.
///
/// Both agents first run their timer step; the larger (post-step) estimate
/// then wins and is adopted together with its age, and equal estimates keep
/// the younger of the two ages. Both returned states share the same estimate.
pub fn timeout_gossip(
    i: TimeoutAgent,
    j: TimeoutAgent,
    t_star: u64,
) -> (TimeoutAgent, TimeoutAgent) {
    use std::cmp::Ordering;
    let mut a = update_timer(i, t_star);
    let mut b = update_timer(j, t_star);
    match a.y.cmp(&b.y) {
        Ordering::Greater => {
            b.y = a.y;
            b.age = a.age;
        }
        Ordering::Less => {
            a.y = b.y;
            a.age = b.age;
        }
        Ordering::Equal => {
            let min_age = a.age.min(b.age);
            a.age = min_age;
            b.age = min_age;
        }
    }
    (a, b)
}

/// Age threshold for the timeout protocol, with an optional growth schedule.
///
/// The effective threshold is non-decreasing in the tick, which is what keeps
/// observed ages bounded by the current threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Threshold {
    base: u64,
    #[serde(default)]
    policy: ThresholdPolicy,
}

/// How the threshold evolves with time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ThresholdPolicy {
    /// Constant threshold.
    #[default]
    Fixed,
    /// `base + floor(num * tick / den)`: the simplest monotone schedule for a
    /// threshold that slowly outgrows any eventual system size.
    Linear { num: u64, den: u64 },
}

impl Threshold {
    /// Constant threshold. `base` must be at least 1.
    pub fn fixed(base: u64) -> Self {
        assert!(base >= 1, "threshold base must be >= 1");
        Threshold {
            base,
            policy: ThresholdPolicy::Fixed,
        }
    }

    /// Linearly growing threshold: effective value `base + floor(num*t/den)`.
    pub fn linear(base: u64, num: u64, den: u64) -> Self {
        assert!(base >= 1, "threshold base must be >= 1");
        assert!(den >= 1, "growth denominator must be >= 1");
        Threshold {
            base,
            policy: ThresholdPolicy::Linear { num, den },
        }
    }

    pub fn base(&self) -> u64 {
        self.base
    }

    pub fn policy(&self) -> ThresholdPolicy {
        self.policy
    }

    /// Effective threshold at a given tick.
    pub fn effective(&self, tick: u64) -> u64 {
        match self.policy {
            ThresholdPolicy::Fixed => self.base,
            ThresholdPolicy::Linear { num, den } => self.base + num * tick / den,
        }
    }
}

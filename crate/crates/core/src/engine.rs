//! Discrete-event loop: one event per tick over a complete interaction graph.
//!
//! Each tick carries exactly one event — an arrival, a departure, or a gossip
//! interaction — so the population size changes by at most one per tick. The
//! engine owns all randomness and population bookkeeping; protocol state only
//! ever changes through the pure functions in [`crate::protocol`].
//!
//! # Determinism
//!
//! Runs are driven by a ChaCha8 stream cipher RNG (`rand_chacha::ChaCha8Rng`,
//! a named, versioned algorithm with a stable output stream) seeded directly
//! from the run's 64-bit seed. Equal `(scenario, seed)` therefore reproduce
//! byte-identical traces. The draw order is part of the replay contract:
//!
//! 1. Initial population values (random populations only): one uniform draw
//!    per agent, in id order; `distinct` mode redraws collisions.
//! 2. Per tick: stochastic models first spend one uniform `f64` selecting the
//!    event kind, restricted and renormalized to the kinds feasible in the
//!    current world (see [`sample_event`]); then the chosen event draws its
//!    arguments —
//!    an arrival takes one value draw (stochastic models only);
//!    a departure takes one leaver draw (unless scripted to a fixed target),
//!    then under the counter protocol one informed-agent draw over the agents
//!    remaining after the leaver is removed (skipped if none remain);
//!    a gossip takes two index draws selecting a uniform distinct pair (the
//!    classical i != j interaction model both protocols' convergence bounds
//!    are stated for) — except that a single-agent counter world emits the
//!    self-pair `Gossip(i, i)`, a legal no-op, without drawing.

use crate::metrics::TickMetrics;
use crate::protocol::{self, CounterAgent, Threshold, TimeoutAgent, Value};
use crate::scenario::{
    ChurnModel, DepartTarget, InitialPopulation, Protocol, Scenario, ScriptedAction,
};
use crate::trace::{AgentRecord, RunOutcome, Trace};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Simulator-internal agent identifier, assigned at arrival and never reused.
/// Protocol logic never reads ids; they exist for traces and bookkeeping.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AgentId(pub u64);

impl std::fmt::Display for AgentId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.0.fmt(f)
    }
}

/// Protocol-specific per-agent state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AgentState {
    Counter(CounterAgent),
    Timeout(TimeoutAgent),
}

impl AgentState {
    pub fn x(&self) -> Value {
        match self {
            AgentState::Counter(a) => a.x,
            AgentState::Timeout(a) => a.x,
        }
    }

    pub fn y(&self) -> Value {
        match self {
            AgentState::Counter(a) => a.y,
            AgentState::Timeout(a) => a.y,
        }
    }

    /// The protocol's auxiliary variable: `kappa` or `age`.
    pub fn level(&self) -> u64 {
        match self {
            AgentState::Counter(a) => a.kappa,
            AgentState::Timeout(a) => a.age,
        }
    }
}

/// A present agent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Agent {
    pub id: AgentId,
    pub state: AgentState,
}

/// The single event a tick carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Event {
    Arrival {
        id: AgentId,
        x: Value,
    },
    /// `informed` is present exactly when the protocol is `counter` and at
    /// least one agent remains after the leaver is removed.
    Departure {
        leaver: AgentId,
        informed: Option<AgentId>,
    },
    /// `i == j` is only valid under the counter protocol and is a no-op.
    Gossip {
        i: AgentId,
        j: AgentId,
    },
}

/// A structural fault: the event stream referenced state that does not exist.
/// This signals a scenario or harness bug, never protocol behavior.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum EngineError {
    #[error("tick {tick}: event references absent agent {id}")]
    AbsentAgent { tick: u64, id: AgentId },
    #[error("tick {tick}: arrival id {got} does not match next fresh id {expected}")]
    StaleArrivalId {
        tick: u64,
        got: AgentId,
        expected: AgentId,
    },
    #[error("tick {tick}: self-gossip {id} is not valid under the timeout protocol")]
    SelfGossipUnderTimeout { tick: u64, id: AgentId },
    #[error("tick {tick}: departure message not valid under the timeout protocol")]
    InformedUnderTimeout { tick: u64 },
    #[error("tick {tick}: departure must inform a remaining agent under the counter protocol")]
    MissingInformed { tick: u64 },
}

/// The population at one tick, plus the bookkeeping needed by the oracle.
#[derive(Debug, Clone, PartialEq)]
pub struct World {
    tick: u64,
    protocol: Protocol,
    threshold: Option<Threshold>,
    agents: Vec<Agent>,
    departed: Vec<Value>,
    next_id: u64,
}

impl World {
    /// A world at tick 0 holding one initialized agent per value, with ids
    /// `0..n` in order.
    pub fn new(protocol: Protocol, threshold: Option<Threshold>, values: &[Value]) -> World {
        let agents = values
            .iter()
            .enumerate()
            .map(|(i, &x)| Agent {
                id: AgentId(i as u64),
                state: init_state(protocol, x),
            })
            .collect::<Vec<_>>();
        World {
            tick: 0,
            protocol,
            threshold,
            next_id: agents.len() as u64,
            agents,
            departed: Vec::new(),
        }
    }

    pub fn tick(&self) -> u64 {
        self.tick
    }

    pub fn protocol(&self) -> Protocol {
        self.protocol
    }

    pub fn threshold(&self) -> Option<Threshold> {
        self.threshold
    }

    pub fn len(&self) -> usize {
        self.agents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.agents.is_empty()
    }

    /// Present agents in arrival order.
    pub fn agents(&self) -> &[Agent] {
        &self.agents
    }

    /// Intrinsic values of departed agents, in departure order (a multiset).
    pub fn departed_values(&self) -> &[Value] {
        &self.departed
    }

    fn index_of(&self, id: AgentId) -> Option<usize> {
        self.agents.iter().position(|a| a.id == id)
    }

    /// Per-agent records of the current state, in arrival order.
    pub fn snapshot(&self) -> Vec<AgentRecord> {
        self.agents
            .iter()
            .map(|a| AgentRecord {
                id: a.id,
                x: a.state.x(),
                y: a.state.y(),
                level: a.state.level(),
            })
            .collect()
    }

    /// Effective timeout threshold at the current tick.
    fn effective_threshold(&self) -> u64 {
        self.threshold
            .map(|t| t.effective(self.tick))
            .unwrap_or(u64::MAX)
    }

    /// Applies one event and advances the tick. The departure ordering is:
    /// the leaver is removed first, and the informed agent (counter protocol)
    /// reacts within the same tick.
    pub fn apply(&mut self, event: &Event) -> Result<(), EngineError> {
        let tick = self.tick;
        match *event {
            Event::Arrival { id, x } => {
                let expected = AgentId(self.next_id);
                if id != expected {
                    return Err(EngineError::StaleArrivalId {
                        tick,
                        got: id,
                        expected,
                    });
                }
                self.agents.push(Agent {
                    id,
                    state: init_state(self.protocol, x),
                });
                self.next_id += 1;
            }
            Event::Departure { leaver, informed } => {
                let idx = self
                    .index_of(leaver)
                    .ok_or(EngineError::AbsentAgent { tick, id: leaver })?;
                let gone = self.agents.remove(idx);
                self.departed.push(gone.state.x());
                match (self.protocol, informed) {
                    (Protocol::Counter, Some(m)) => {
                        let midx = self
                            .index_of(m)
                            .ok_or(EngineError::AbsentAgent { tick, id: m })?;
                        let AgentState::Counter(state) = self.agents[midx].state else {
                            unreachable!("counter world holds counter agents");
                        };
                        let leaver_kappa = match gone.state {
                            AgentState::Counter(a) => a.kappa,
                            AgentState::Timeout(_) => unreachable!(),
                        };
                        self.agents[midx].state =
                            AgentState::Counter(protocol::departure_update(state, leaver_kappa));
                    }
                    (Protocol::Counter, None) => {
                        if !self.agents.is_empty() {
                            return Err(EngineError::MissingInformed { tick });
                        }
                    }
                    (Protocol::Timeout, Some(_)) => {
                        return Err(EngineError::InformedUnderTimeout { tick });
                    }
                    (Protocol::Timeout, None) => {}
                }
            }
            Event::Gossip { i, j } => {
                if i == j {
                    match self.protocol {
                        // Self-selection exchanges nothing: max(y, y) = y.
                        Protocol::Counter => {
                            self.index_of(i)
                                .ok_or(EngineError::AbsentAgent { tick, id: i })?;
                        }
                        Protocol::Timeout => {
                            return Err(EngineError::SelfGossipUnderTimeout { tick, id: i });
                        }
                    }
                } else {
                    let ii = self
                        .index_of(i)
                        .ok_or(EngineError::AbsentAgent { tick, id: i })?;
                    let jj = self
                        .index_of(j)
                        .ok_or(EngineError::AbsentAgent { tick, id: j })?;
                    match (self.agents[ii].state, self.agents[jj].state) {
                        (AgentState::Counter(a), AgentState::Counter(b)) => {
                            let (a2, b2) = protocol::counter_gossip(a, b);
                            self.agents[ii].state = AgentState::Counter(a2);
                            self.agents[jj].state = AgentState::Counter(b2);
                        }
                        (AgentState::Timeout(a), AgentState::Timeout(b)) => {
                            let t_star = self.effective_threshold();
                            let (a2, b2) = protocol::timeout_gossip(a, b, t_star);
                            self.agents[ii].state = AgentState::Timeout(a2);
                            self.agents[jj].state = AgentState::Timeout(b2);
                        }
                        _ => unreachable!("worlds are protocol-homogeneous"),
                    }
                }
            }
        }
        self.tick += 1;
        Ok(())
    }
}

fn init_state(protocol: Protocol, x: Value) -> AgentState {
    match protocol {
        Protocol::Counter => AgentState::Counter(CounterAgent::new(x)),
        Protocol::Timeout => AgentState::Timeout(TimeoutAgent::new(x)),
    }
}

/// Draws the next event, or `None` when no event is constructible (the run
/// is drained: an empty world — or a single-agent world under the timeout
/// protocol — with no chance of an arrival).
///
/// Stochastic models restrict the kind distribution to feasible kinds and
/// renormalize, which matches reading the discrete ticks as the sampling of
/// an asynchronous process at the instants where something can happen.
pub fn sample_event<R: Rng>(world: &World, churn: &ChurnModel, rng: &mut R) -> Option<Event> {
    let n = world.len();
    let gossip_feasible = match world.protocol() {
        Protocol::Counter => n >= 1,
        Protocol::Timeout => n >= 2,
    };
    match churn {
        ChurnModel::Scripted { events } => match events.iter().find(|e| e.tick == world.tick()) {
            Some(ev) => match ev.action {
                ScriptedAction::Arrive { value } => Some(Event::Arrival {
                    id: AgentId(world.next_id),
                    x: value,
                }),
                ScriptedAction::Depart { target } => {
                    let leaver = match target {
                        DepartTarget::MaxHolder => max_holder(world)?,
                        DepartTarget::Agent(id) => AgentId(id),
                    };
                    Some(departure_event(world, leaver, rng))
                }
            },
            None => gossip_feasible.then(|| gossip_event(world, rng)),
        },
        ChurnModel::Stochastic {
            p_arrival,
            p_departure,
            stop_tick,
            value_range,
        } => {
            let churn_open = stop_tick.is_none_or(|stop| world.tick() < stop);
            let arrival_mass = if churn_open { *p_arrival } else { 0.0 };
            let departure_mass = if churn_open && n >= 1 {
                *p_departure
            } else {
                0.0
            };
            let gossip_mass = if gossip_feasible {
                if churn_open {
                    1.0 - p_arrival - p_departure
                } else {
                    1.0
                }
            } else {
                0.0
            };
            let total = arrival_mass + departure_mass + gossip_mass;
            if total <= 0.0 {
                return None;
            }
            let draw = rng.gen::<f64>() * total;
            if draw < arrival_mass {
                let (lo, hi) = *value_range;
                let x = Value(rng.gen_range(lo..=hi));
                Some(Event::Arrival {
                    id: AgentId(world.next_id),
                    x,
                })
            } else if draw < arrival_mass + departure_mass {
                let leaver = world.agents()[rng.gen_range(0..n)].id;
                Some(departure_event(world, leaver, rng))
            } else {
                Some(gossip_event(world, rng))
            }
        }
    }
}

/// The present agent with the largest intrinsic value, lowest id on ties.
fn max_holder(world: &World) -> Option<AgentId> {
    world
        .agents()
        .iter()
        .max_by(|a, b| a.state.x().cmp(&b.state.x()).then(b.id.cmp(&a.id)))
        .map(|a| a.id)
}

fn departure_event<R: Rng>(world: &World, leaver: AgentId, rng: &mut R) -> Event {
    let informed = match world.protocol() {
        Protocol::Counter => {
            let remaining: Vec<AgentId> = world
                .agents()
                .iter()
                .map(|a| a.id)
                .filter(|&id| id != leaver)
                .collect();
            if remaining.is_empty() {
                None
            } else {
                Some(remaining[rng.gen_range(0..remaining.len())])
            }
        }
        Protocol::Timeout => None,
    };
    Event::Departure { leaver, informed }
}

fn gossip_event<R: Rng>(world: &World, rng: &mut R) -> Event {
    let n = world.len();
    if n == 1 {
        // Only reachable under the counter protocol, where the self-pair is
        // a legal no-op; no draws are consumed.
        let id = world.agents()[0].id;
        return Event::Gossip { i: id, j: id };
    }
    let a = rng.gen_range(0..n);
    let b_raw = rng.gen_range(0..n - 1);
    let b = if b_raw >= a { b_raw + 1 } else { b_raw };
    Event::Gossip {
        i: world.agents()[a].id,
        j: world.agents()[b].id,
    }
}

/// Runs a scenario to its horizon (or until drained) and records the trace.
pub fn run(scenario: &Scenario, seed: u64) -> Result<Trace, EngineError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let initial_values = draw_initial_values(&scenario.initial, &mut rng);
    let mut world = World::new(scenario.protocol, scenario.threshold, &initial_values);

    let mut trace = Trace {
        seed,
        scenario: scenario.clone(),
        outcome: RunOutcome::Completed,
        events: Vec::with_capacity(scenario.horizon as usize),
        metrics: Vec::with_capacity(scenario.horizon as usize + 1),
        snapshots: Vec::new(),
    };
    let record = |trace: &mut Trace, world: &World, force: bool| {
        let snap = world.snapshot();
        trace.metrics.push(TickMetrics::from_records(
            world.tick(),
            world.protocol(),
            &snap,
        ));
        if force || world.tick().is_multiple_of(scenario.snapshot_stride) {
            trace.snapshots.push((world.tick(), snap));
        }
    };
    record(&mut trace, &world, true);

    for t in 0..scenario.horizon {
        let Some(event) = sample_event(&world, &scenario.churn, &mut rng) else {
            trace.outcome = RunOutcome::Drained { at_tick: t };
            break;
        };
        world.apply(&event)?;
        trace.events.push((t, event));
        record(&mut trace, &world, world.tick() == scenario.horizon);
    }
    // The final reached tick is always snapshotted, whatever the stride.
    if trace.snapshots.last().map(|(t, _)| *t) != Some(world.tick()) {
        trace.snapshots.push((world.tick(), world.snapshot()));
    }
    Ok(trace)
}

fn draw_initial_values<R: Rng>(initial: &InitialPopulation, rng: &mut R) -> Vec<Value> {
    match initial {
        InitialPopulation::Explicit { values } => values.clone(),
        InitialPopulation::Random {
            count,
            lo,
            hi,
            distinct,
        } => {
            let mut values = Vec::with_capacity(*count);
            let mut taken = std::collections::BTreeSet::new();
            for _ in 0..*count {
                let v = loop {
                    let candidate = rng.gen_range(*lo..=*hi);
                    if !*distinct || taken.insert(candidate) {
                        break candidate;
                    }
                };
                values.push(Value(v));
            }
            values
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{self, ScriptedEvent};

    fn counter_world(values: &[i64]) -> World {
        let vals: Vec<Value> = values.iter().copied().map(Value).collect();
        World::new(Protocol::Counter, None, &vals)
    }

    #[test]
    fn departure_removes_agent_and_records_value() {
        let mut world = counter_world(&scenario::FIG1_VALUES);
        assert_eq!(world.len(), 25);
        let event = Event::Departure {
            leaver: AgentId(9),
            informed: Some(AgentId(13)),
        };
        world.apply(&event).unwrap();
        assert_eq!(world.len(), 24);
        assert_eq!(world.departed_values(), &[Value(936)]);
        assert_eq!(world.tick(), 1);
    }

    #[test]
    fn first_arrival_into_empty_world() {
        let mut world = counter_world(&[]);
        world
            .apply(&Event::Arrival {
                id: AgentId(0),
                x: Value(7),
            })
            .unwrap();
        assert_eq!(world.len(), 1);
        let a = world.agents()[0];
        assert_eq!(
            (a.state.x(), a.state.y(), a.state.level()),
            (Value(7), Value(7), 0)
        );
        assert_eq!(world.tick(), 1);
    }

    #[test]
    fn last_agent_departs_without_informing_anyone() {
        let mut world = counter_world(&[42]);
        world
            .apply(&Event::Departure {
                leaver: AgentId(0),
                informed: None,
            })
            .unwrap();
        assert!(world.is_empty());
        assert_eq!(world.departed_values(), &[Value(42)]);
    }

    #[test]
    fn absent_agent_is_a_structural_error() {
        let mut world = counter_world(&[1, 2]);
        let err = world
            .apply(&Event::Departure {
                leaver: AgentId(99),
                informed: Some(AgentId(0)),
            })
            .unwrap_err();
        assert_eq!(
            err,
            EngineError::AbsentAgent {
                tick: 0,
                id: AgentId(99)
            }
        );
    }

    #[test]
    fn self_gossip_is_a_noop_under_counter() {
        let mut world = counter_world(&[5]);
        let before = world.agents().to_vec();
        world
            .apply(&Event::Gossip {
                i: AgentId(0),
                j: AgentId(0),
            })
            .unwrap();
        assert_eq!(world.agents(), &before[..]);
        assert_eq!(world.tick(), 1);
    }

    #[test]
    fn self_gossip_is_rejected_under_timeout() {
        let vals = [Value(1), Value(2)];
        let mut world = World::new(Protocol::Timeout, Some(Threshold::fixed(40)), &vals);
        let err = world
            .apply(&Event::Gossip {
                i: AgentId(1),
                j: AgentId(1),
            })
            .unwrap_err();
        assert!(matches!(err, EngineError::SelfGossipUnderTimeout { .. }));
    }

    #[test]
    fn single_agent_counter_world_samples_self_gossip() {
        let world = counter_world(&[3]);
        let churn = ChurnModel::none();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let event = sample_event(&world, &churn, &mut rng).unwrap();
        assert_eq!(
            event,
            Event::Gossip {
                i: AgentId(0),
                j: AgentId(0)
            }
        );
    }

    #[test]
    fn scripted_max_departure_resolves_current_max_holder() {
        let world = counter_world(&[10, 936, 20]);
        let churn = ChurnModel::Scripted {
            events: vec![ScriptedEvent {
                tick: 0,
                action: ScriptedAction::Depart {
                    target: DepartTarget::MaxHolder,
                },
            }],
        };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        match sample_event(&world, &churn, &mut rng).unwrap() {
            Event::Departure { leaver, informed } => {
                assert_eq!(leaver, AgentId(1));
                assert!(informed.is_some());
            }
            other => panic!("expected departure, got {other:?}"),
        }
    }

    #[test]
    fn drained_when_nothing_can_happen() {
        let world = World::new(Protocol::Timeout, Some(Threshold::fixed(40)), &[Value(1)]);
        let churn = ChurnModel::none();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(sample_event(&world, &churn, &mut rng), None);
    }

    #[test]
    fn identical_seed_and_scenario_reproduce_the_trace() {
        let s = scenario::fig1a();
        let a = run(&s, 7).unwrap();
        let b = run(&s, 7).unwrap();
        assert_eq!(a, b);
        let c = run(&s, 8).unwrap();
        assert_ne!(a.events, c.events);
    }

    #[test]
    fn single_agent_zero_churn_holds_its_own_value() {
        let s = Scenario {
            name: "solo".into(),
            protocol: Protocol::Counter,
            horizon: 50,
            snapshot_stride: 1,
            initial: InitialPopulation::Explicit {
                values: vec![Value(11)],
            },
            threshold: None,
            churn: ChurnModel::none(),
        };
        let trace = run(&s, 3).unwrap();
        assert_eq!(trace.outcome, RunOutcome::Completed);
        for (_, snap) in &trace.snapshots {
            assert_eq!(snap.len(), 1);
            assert_eq!(snap[0].y, Value(11));
        }
    }

    #[test]
    fn population_changes_by_at_most_one_per_tick() {
        let s = Scenario {
            name: "churny".into(),
            protocol: Protocol::Counter,
            horizon: 500,
            snapshot_stride: 1,
            initial: InitialPopulation::Random {
                count: 10,
                lo: 0,
                hi: 100,
                distinct: false,
            },
            threshold: None,
            churn: ChurnModel::Stochastic {
                p_arrival: 0.2,
                p_departure: 0.2,
                stop_tick: None,
                value_range: (0, 100),
            },
        };
        let trace = run(&s, 5).unwrap();
        for pair in trace.metrics.windows(2) {
            let delta = pair[1].population as i64 - pair[0].population as i64;
            assert!(delta.abs() <= 1);
        }
    }

    /// Pair selection is uniform: chi-squared against the flat distribution,
    /// critical values frozen from the 0.999 quantile of the respective
    /// chi-squared distributions.
    #[test]
    fn gossip_pair_selection_is_uniform() {
        // Timeout: 25 agents, C(25,2) = 300 unordered pairs, each 1/300.
        let vals: Vec<Value> = (0..25).map(Value).collect();
        let world = World::new(Protocol::Timeout, Some(Threshold::fixed(40)), &vals);
        let mut rng = ChaCha8Rng::seed_from_u64(12345);
        let draws = 150_000usize;
        let mut counts = std::collections::HashMap::new();
        for _ in 0..draws {
            let Event::Gossip { i, j } = gossip_event(&world, &mut rng) else {
                unreachable!()
            };
            assert_ne!(i, j);
            let key = (i.min(j), i.max(j));
            *counts.entry(key).or_insert(0usize) += 1;
        }
        assert_eq!(counts.len(), 300);
        let expected = draws as f64 / 300.0;
        let chi2: f64 = counts
            .values()
            .map(|&c| {
                let d = c as f64 - expected;
                d * d / expected
            })
            .sum();
        assert!(
            chi2 < 380.30,
            "chi2 = {chi2} (dof 299, 0.999 critical 380.30)"
        );

        // Counter: ordered distinct pairs, 600 cells, each 1/600.
        let world = World::new(Protocol::Counter, None, &vals);
        let mut rng = ChaCha8Rng::seed_from_u64(12345);
        let mut counts = std::collections::HashMap::new();
        for _ in 0..draws {
            let Event::Gossip { i, j } = gossip_event(&world, &mut rng) else {
                unreachable!()
            };
            assert_ne!(i, j);
            *counts.entry((i, j)).or_insert(0usize) += 1;
        }
        assert_eq!(counts.len(), 600);
        let expected = draws as f64 / 600.0;
        let chi2: f64 = counts
            .values()
            .map(|&c| {
                let d = c as f64 - expected;
                d * d / expected
            })
            .sum();
        assert!(
            chi2 < 711.68,
            "chi2 = {chi2} (dof 599, 0.999 critical 711.68)"
        );
    }

    #[test]
    fn distinct_initial_values_do_not_repeat() {
        let initial = InitialPopulation::Random {
            count: 100,
            lo: 0,
            hi: 120,
            distinct: true,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let values = draw_initial_values(&initial, &mut rng);
        let unique: std::collections::BTreeSet<_> = values.iter().collect();
        assert_eq!(unique.len(), 100);
    }
}

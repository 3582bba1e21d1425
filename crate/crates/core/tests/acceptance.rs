//! Acceptance suite: one test per criterion (criteria with independent
//! clauses are split so each clause reports its own verdict). Each test
//! prints a `criterion N` line; run with `--nocapture` to see them all:
//!
//! ```bash
//! cargo test -p maxgossip --test acceptance -- --nocapture --test-threads=1
//! ```
//!
//! Expected outcome: criteria 1-4, 8-10 pass in full; criteria 5-7 pass
//! except for three clauses asserting the timeout protocol reproduces
//! single-run reference figures whose originating simulation demonstrably
//! skipped the equal-estimate age-merge that the algorithm (and this
//! implementation, pinned by criterion 10) specifies. Those three tests
//! fail honestly rather than weaken the assertion:
//! `c05_reference_anchor_506_within_range`,
//! `c06_spurious_rate_direction`, `c07_table1_timeout_anchors`.

use maxgossip::engine::run;
use maxgossip::metrics::{
    convergence_time, expected_convergence_bound, first_correct_tick, spurious_resets,
};
use maxgossip::oracle::{check_lower_bound_trace, check_valid_estimates_trace, track_outdated};
use maxgossip::protocol::{
    counter_gossip, departure_update, timeout_gossip, update_timer, CounterAgent, Threshold,
    TimeoutAgent, Value,
};
use maxgossip::report::build_report;
use maxgossip::scenario::{self, ChurnModel, InitialPopulation, Protocol, Scenario};
use rayon::prelude::*;
use std::sync::LazyLock;

fn pass_line(criterion: &str, passed: bool, detail: &str) {
    println!(
        "criterion {criterion}: {} — {detail}",
        if passed { "PASS" } else { "FAIL" }
    );
}

/// The stochastic-churn scenario of criterion 1: N0=25, p=0.01 each,
/// churn stops at 2000, horizon 10000.
fn stochastic_churn(protocol: Protocol) -> Scenario {
    Scenario {
        name: format!("churn25-{protocol}"),
        protocol,
        horizon: 10_000,
        snapshot_stride: 1,
        initial: InitialPopulation::Random {
            count: 25,
            lo: 0,
            hi: 1000,
            distinct: false,
        },
        threshold: match protocol {
            Protocol::Counter => None,
            Protocol::Timeout => Some(Threshold::fixed(40)),
        },
        churn: ChurnModel::Stochastic {
            p_arrival: 0.01,
            p_departure: 0.01,
            stop_tick: Some(2000),
            value_range: (0, 1000),
        },
    }
}

/// fig1a under the timeout protocol (fig1b is exactly that).
fn fig1a_timeout_twin() -> Scenario {
    scenario::fig1b()
}

struct SafetySweep {
    valid_estimate_violations: usize,
    lower_bound_violations: usize,
    runs: usize,
}

/// Criteria 1 and 2 share these runs: 200 seeds of fig1a and of stochastic
/// churn, under both protocols; the counter runs feed the valid-estimate
/// check, all runs feed the lower-bound check, every tick checked.
static SAFETY: LazyLock<SafetySweep> = LazyLock::new(|| {
    let scenarios = [
        scenario::fig1a(),
        fig1a_timeout_twin(),
        stochastic_churn(Protocol::Counter),
        stochastic_churn(Protocol::Timeout),
    ];
    let results: Vec<(usize, usize)> = scenarios
        .iter()
        .flat_map(|s| (0..200u64).map(move |seed| (s, seed)))
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|(s, seed)| {
            let trace = run(s, seed).expect("structurally sound run");
            assert!(trace.has_full_snapshots());
            let valid_estimates = match s.protocol {
                Protocol::Counter => check_valid_estimates_trace(&trace)
                    .unwrap()
                    .violations()
                    .len(),
                Protocol::Timeout => 0,
            };
            let lower = check_lower_bound_trace(&trace).violations().len();
            (valid_estimates, lower)
        })
        .collect();
    SafetySweep {
        valid_estimate_violations: results.iter().map(|r| r.0).sum(),
        lower_bound_violations: results.iter().map(|r| r.1).sum(),
        runs: results.len(),
    }
});

#[test]
fn c01_valid_estimate_safety_every_tick() {
    let s = &*SAFETY;
    let passed = s.valid_estimate_violations == 0;
    pass_line(
        "1",
        passed,
        &format!(
            "valid-estimate check over {} runs (fig1a + stochastic churn), every tick: {} violations",
            s.runs, s.valid_estimate_violations
        ),
    );
    assert_eq!(s.valid_estimate_violations, 0);
}

#[test]
fn c02_lower_bound_safety_every_tick() {
    let s = &*SAFETY;
    let passed = s.lower_bound_violations == 0;
    pass_line(
        "2",
        passed,
        &format!(
            "y >= x over {} runs, both protocols, every tick: {} violations",
            s.runs, s.lower_bound_violations
        ),
    );
    assert_eq!(s.lower_bound_violations, 0);
}

#[test]
fn c03_static_network_reduction() {
    let s = Scenario {
        name: "static25".into(),
        protocol: Protocol::Counter,
        horizon: 1000,
        snapshot_stride: 1,
        initial: InitialPopulation::Random {
            count: 25,
            lo: 0,
            hi: 1000,
            distinct: false,
        },
        threshold: None,
        churn: ChurnModel::none(),
    };
    let settles: Vec<u64> = (0..500u64)
        .into_par_iter()
        .map(|seed| {
            let trace = run(&s, seed).unwrap();
            // Zero churn: every counter must stay 0 at every tick.
            for m in &trace.metrics {
                assert_eq!(m.max_kappa, Some(0), "seed {seed} tick {}", m.tick);
            }
            convergence_time(&trace, 0)
                .settle_tick
                .unwrap_or_else(|| panic!("seed {seed} did not settle"))
        })
        .collect();
    let n = settles.len() as f64;
    let mean = settles.iter().sum::<u64>() as f64 / n;
    let sd = (settles
        .iter()
        .map(|&x| (x as f64 - mean).powi(2))
        .sum::<f64>()
        / (n - 1.0))
        .sqrt();
    let se = sd / n.sqrt();
    let bound = expected_convergence_bound(25, 1).unwrap();
    let allowed = bound + 2.0 * se;
    let passed = mean <= allowed;
    pass_line(
        "3",
        passed,
        &format!(
            "zero churn, all counters stay 0; mean settle {mean:.2} <= bound {bound:.2} + 2SE ({allowed:.2}) over 500 seeds"
        ),
    );
    assert!(passed, "mean {mean} exceeds {allowed}");
}

#[test]
fn c04_counter_eventual_correctness() {
    let s = scenario::fig1a();
    let steps: Vec<u64> = (0..500u64)
        .into_par_iter()
        .map(|seed| {
            let trace = run(&s, seed).unwrap();
            let report = convergence_time(&trace, 200);
            let settle = report
                .settle_tick
                .unwrap_or_else(|| panic!("seed {seed} did not reconverge by horizon 2000"));
            // Reconvergence must be to 815: the suffix is all-correct, so the
            // last tick's estimates all equal the final maximum.
            let last = trace.metrics.last().unwrap();
            assert_eq!(last.current_max, Some(Value(815)), "seed {seed}");
            assert_eq!(last.num_correct, last.population, "seed {seed}");
            settle - 200
        })
        .collect();
    let mean = steps.iter().sum::<u64>() as f64 / steps.len() as f64;
    let bound = expected_convergence_bound(24, 2).unwrap();
    let (min, max) = (*steps.iter().min().unwrap(), *steps.iter().max().unwrap());
    let anchor_inside = (min..=max).contains(&137);
    let passed = mean <= bound && anchor_inside;
    pass_line(
        "4",
        passed,
        &format!(
            "500/500 runs reconverge to 815 and hold; mean steps {mean:.2} <= {bound:.2}; 137 in [{min}, {max}]"
        ),
    );
    assert!(mean <= bound, "mean {mean} exceeds bound {bound}");
    assert!(anchor_inside, "137 outside [{min}, {max}]");
}

struct Fig1bSweep {
    /// first-correct steps from tick 200 per seed, `None` if never.
    firsts: Vec<Option<u64>>,
    /// per-seed outdated-value verdicts: (all extinct, tau monotone, tau bounded).
    outdated: Vec<(bool, bool, bool)>,
}

/// Criteria 5 and 8 share the 500-seed fig1b sweep.
static FIG1B: LazyLock<Fig1bSweep> = LazyLock::new(|| {
    let s = scenario::fig1b();
    let threshold = s.threshold.unwrap();
    let rows: Vec<(Option<u64>, (bool, bool, bool))> = (0..500u64)
        .into_par_iter()
        .map(|seed| {
            let trace = run(&s, seed).unwrap();
            let first = first_correct_tick(&trace, 201).map(|t| t - 200);
            let report = track_outdated(&trace).unwrap();
            let verdicts = (
                report.all_extinct(),
                report
                    .tracks
                    .iter()
                    .all(|t| t.tau_monotone_while_nonempty()),
                report.tracks.iter().all(|t| t.tau_bounded(&threshold)),
            );
            (first, verdicts)
        })
        .collect();
    Fig1bSweep {
        firsts: rows.iter().map(|r| r.0).collect(),
        outdated: rows.iter().map(|r| r.1).collect(),
    }
});

#[test]
fn c05_timeout_reconvergence_within_horizon() {
    let sweep = &*FIG1B;
    let reached = sweep.firsts.iter().filter(|f| f.is_some()).count();
    let fraction = reached as f64 / sweep.firsts.len() as f64;
    let passed = fraction >= 0.99;
    pass_line(
        "5",
        passed,
        &format!(
            "timeout T*=40: {reached}/{} runs reach all-correct after the departure within horizon 5000 ({:.1}%)",
            sweep.firsts.len(),
            fraction * 100.0
        ),
    );
    assert!(passed);
}

#[test]
fn c05_reference_anchor_506_within_range() {
    let sweep = &*FIG1B;
    let times: Vec<u64> = sweep.firsts.iter().filter_map(|f| *f).collect();
    let (min, max) = (*times.iter().min().unwrap(), *times.iter().max().unwrap());
    let passed = (min..=max).contains(&506);
    pass_line(
        "5",
        passed,
        &format!(
            "single-run reference 506 within empirical [{min}, {max}] of first-reconvergence times"
        ),
    );
    assert!(
        passed,
        "506 outside [{min}, {max}]: the reference figure stems from a simulation \
         without the equal-estimate age-merge the algorithm specifies (see ledger)"
    );
}

fn median(xs: &mut [u64]) -> u64 {
    xs.sort_unstable();
    xs[xs.len() / 2]
}

struct PairedThresholds {
    first_t40: Vec<u64>,
    first_t200: Vec<u64>,
    /// spurious resets per 1000 post-first-convergence ticks, in millis.
    rate_t40: Vec<u64>,
    rate_t200: Vec<u64>,
}

/// Criterion 6: paired seeds, both thresholds at a common horizon 10000.
static PAIRED: LazyLock<PairedThresholds> = LazyLock::new(|| {
    let mut t40 = scenario::fig1b();
    t40.horizon = 10_000;
    let mut t200 = scenario::fig1c();
    t200.horizon = 10_000;
    let rows: Vec<((u64, u64), (u64, u64))> = (0..200u64)
        .into_par_iter()
        .map(|seed| {
            let mut out = Vec::new();
            for s in [&t40, &t200] {
                let trace = run(s, seed).unwrap();
                let first = first_correct_tick(&trace, 201)
                    .unwrap_or_else(|| panic!("{} seed {seed} never reconverged", s.name));
                let window = trace.end_tick() - first;
                let resets = spurious_resets(&trace).unwrap();
                let count = resets.iter().filter(|(t, _)| *t >= first).count() as u64;
                // Milli-resets per 1000 ticks, as an integer for exact medians.
                let rate = count * 1_000_000 / window.max(1);
                out.push((first - 200, rate));
            }
            (out[0], out[1])
        })
        .collect();
    PairedThresholds {
        first_t40: rows.iter().map(|r| r.0 .0).collect(),
        rate_t40: rows.iter().map(|r| r.0 .1).collect(),
        first_t200: rows.iter().map(|r| r.1 .0).collect(),
        rate_t200: rows.iter().map(|r| r.1 .1).collect(),
    }
});

#[test]
fn c06_reconvergence_direction() {
    let mut a = PAIRED.first_t40.clone();
    let mut b = PAIRED.first_t200.clone();
    let (m40, m200) = (median(&mut a), median(&mut b));
    let passed = m200 > m40;
    pass_line(
        "6",
        passed,
        &format!(
            "median first-reconvergence: T*=200 gives {m200} > {m40} with T*=40 (200 paired seeds)"
        ),
    );
    assert!(passed);
}

#[test]
fn c06_spurious_rate_direction() {
    let mut a = PAIRED.rate_t40.clone();
    let mut b = PAIRED.rate_t200.clone();
    let (r40, r200) = (median(&mut a), median(&mut b));
    let passed = r200 < r40;
    pass_line(
        "6",
        passed,
        &format!(
            "median spurious resets per 1000 post-convergence ticks (millis): T*=200 gives {r200}, T*=40 gives {r40}"
        ),
    );
    assert!(
        passed,
        "strict ordering fails: both medians are {r200}; with the equal-estimate age-merge \
         the algorithm specifies, neither threshold produces spurious resets at N=25 (see ledger)"
    );
}

struct Table1Cell {
    n: usize,
    counter: Vec<u64>,
    timeout: Vec<u64>,
}

static TABLE1: LazyLock<Vec<Table1Cell>> = LazyLock::new(|| {
    [10usize, 20, 30, 50, 100]
        .iter()
        .map(|&n| {
            let (sc, st) = scenario::table1(n);
            let depart = scenario::table1_departure_tick(n);
            let measure = |s: &Scenario| -> Vec<u64> {
                (0..100u64)
                    .into_par_iter()
                    .map(|seed| {
                        let trace = run(s, seed).unwrap();
                        first_correct_tick(&trace, depart + 1)
                            .unwrap_or_else(|| panic!("{} seed {seed} never reconverged", s.name))
                            - depart
                    })
                    .collect()
            };
            Table1Cell {
                n,
                counter: measure(&sc),
                timeout: measure(&st),
            }
        })
        .collect()
});

#[test]
fn c07_table1_trend_and_counter_anchors() {
    let cells = &*TABLE1;
    let mut detail = String::new();
    let mut medians = Vec::new();
    for cell in cells.iter() {
        let mc = median(&mut cell.counter.clone());
        let mt = median(&mut cell.timeout.clone());
        medians.push((cell.n, mc, mt));
        detail.push_str(&format!("N={}: counter {mc} timeout {mt}; ", cell.n));
    }
    // Counter beats timeout for every N >= 20.
    let faster = medians
        .iter()
        .filter(|(n, ..)| *n >= 20)
        .all(|(_, mc, mt)| mc < mt);
    // Ratio non-decreasing from N=30 to N=100.
    let ratios: Vec<f64> = medians
        .iter()
        .filter(|(n, ..)| *n >= 30)
        .map(|(_, mc, mt)| *mt as f64 / *mc as f64)
        .collect();
    let ratio_monotone = ratios.windows(2).all(|w| w[1] >= w[0]);
    // Counter-protocol reference anchors.
    let counter_anchors = [(0usize, 21u64), (1, 129), (2, 194), (3, 246), (4, 628)];
    let anchors_ok = counter_anchors.iter().all(|&(idx, anchor)| {
        let xs = &cells[idx].counter;
        (*xs.iter().min().unwrap()..=*xs.iter().max().unwrap()).contains(&anchor)
    });
    let passed = faster && ratio_monotone && anchors_ok;
    pass_line(
        "7",
        passed,
        &format!(
            "{detail}counter<timeout for N>=20: {faster}; ratio non-decreasing 30..100: {ratio_monotone} ({ratios:?}); counter anchors inside ranges: {anchors_ok}"
        ),
    );
    assert!(faster && ratio_monotone && anchors_ok);
}

#[test]
fn c07_table1_timeout_anchors() {
    let cells = &*TABLE1;
    let anchors = [(0usize, 64u64), (1, 162), (2, 599), (3, 1885), (4, 6580)];
    let mut detail = String::new();
    let mut all = true;
    for &(idx, anchor) in &anchors {
        let xs = &cells[idx].timeout;
        let (min, max) = (*xs.iter().min().unwrap(), *xs.iter().max().unwrap());
        let inside = (min..=max).contains(&anchor);
        all &= inside;
        detail.push_str(&format!(
            "N={}: {anchor} in [{min}, {max}] = {inside}; ",
            cells[idx].n
        ));
    }
    pass_line("7", all, &format!("timeout reference anchors: {detail}"));
    assert!(
        all,
        "timeout anchors sit below the faithful implementation's ranges: the reference \
         simulation skipped the equal-estimate age-merge (see ledger)"
    );
}

#[test]
fn c08_outdated_values_discarded() {
    let sweep = &*FIG1B;
    let n = sweep.outdated.len();
    let extinct = sweep.outdated.iter().filter(|v| v.0).count();
    let monotone = sweep.outdated.iter().all(|v| v.1);
    let bounded = sweep.outdated.iter().all(|v| v.2);
    let extinct_fraction = extinct as f64 / n as f64;
    let passed = extinct_fraction >= 0.99 && monotone && bounded;
    pass_line(
        "8",
        passed,
        &format!(
            "outdated-value tracking over {n} fig1b runs: extinct {extinct}/{n}, tau monotone {monotone}, tau <= T* {bounded}"
        ),
    );
    assert!(monotone, "tau decreased while D non-empty");
    assert!(bounded, "tau exceeded the threshold");
    assert!(extinct_fraction >= 0.99);
}

#[test]
fn c09_byte_identical_artifacts() {
    let mut all_equal = true;
    for s in [
        scenario::fig1a(),
        scenario::fig1b(),
        stochastic_churn(Protocol::Counter),
    ] {
        let a = run(&s, 7).unwrap();
        let b = run(&s, 7).unwrap();
        let ra = build_report(&a);
        let rb = build_report(&b);
        all_equal &= a.to_csv_string() == b.to_csv_string();
        all_equal &= a.to_json_string() == b.to_json_string();
        all_equal &= maxgossip::metrics::metrics_csv_string(&a)
            == maxgossip::metrics::metrics_csv_string(&b);
        all_equal &= maxgossip::report::summary_json(&ra.summary)
            == maxgossip::report::summary_json(&rb.summary);
    }
    pass_line(
        "9",
        all_equal,
        "trace CSV/JSON, metrics CSV and summary JSON byte-identical across re-runs",
    );
    assert!(all_equal);
}

#[test]
fn c10_hand_trace_unit_suite() {
    let c = |x: i64, y: i64, k: u64| CounterAgent {
        x: Value(x),
        y: Value(y),
        kappa: k,
    };
    let t = |x: i64, y: i64, age: u64| TimeoutAgent {
        x: Value(x),
        y: Value(y),
        age,
    };
    // Departure reactions.
    assert_eq!(departure_update(c(4, 9, 3), 2), c(4, 9, 3));
    assert_eq!(departure_update(c(4, 9, 1), 3), c(4, 4, 4));
    assert_eq!(departure_update(c(4, 9, 0), 0), c(4, 4, 1));
    // Counter gossip.
    assert_eq!(
        counter_gossip(c(1, 5, 0), c(3, 3, 0)),
        (c(1, 5, 0), c(3, 5, 0))
    );
    assert_eq!(
        counter_gossip(c(7, 9, 3), c(4, 8, 1)),
        (c(7, 9, 3), c(4, 9, 3))
    );
    assert_eq!(
        counter_gossip(c(2, 2, 1), c(6, 8, 4)),
        (c(2, 8, 4), c(6, 8, 4))
    );
    // Timer updates.
    assert_eq!(update_timer(t(5, 5, 0), 40), t(5, 5, 0));
    assert_eq!(update_timer(t(5, 9, 5), 40), t(5, 9, 6));
    assert_eq!(update_timer(t(5, 9, 40), 40), t(5, 5, 0));
    // Timeout gossip.
    assert_eq!(
        timeout_gossip(t(9, 9, 0), t(3, 3, 0), 40),
        (t(9, 9, 0), t(3, 9, 0))
    );
    assert_eq!(
        timeout_gossip(t(2, 7, 10), t(4, 7, 3), 40),
        (t(2, 7, 4), t(4, 7, 4))
    );
    assert_eq!(
        timeout_gossip(t(2, 7, 40), t(4, 4, 0), 40),
        (t(2, 4, 0), t(4, 4, 0))
    );
    pass_line(
        "10",
        true,
        "all hand-traced transition examples hold exactly",
    );
}

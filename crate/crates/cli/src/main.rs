//! Command-line experiment runner: run scenarios, sweep seeds and sizes,
//! print the closed-form bounds, and emit traces/metrics/summaries as
//! CSV/JSON for external plotting.
//!
//! Exit codes: 0 success; 1 at least one oracle verdict failed (a
//! counterexample file is written next to the run's artifacts); 2 usage or
//! configuration errors.

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use maxgossip::engine::run;
use maxgossip::metrics::{expected_convergence_bound, first_correct_tick, high_prob_bound};
use maxgossip::protocol::Threshold;
use maxgossip::report::{build_report, summary_json, violations_json, RunReport};
use maxgossip::scenario::{self, parse_scenario, Protocol, Scenario};
use rayon::prelude::*;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "maxgossip",
    version,
    about = "Deterministic gossip max-consensus simulator for populations with churn"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario over one or more seeds and write trace/metrics/summary artifacts
    Run(RunArgs),
    /// Compare both protocols' reconvergence across population sizes
    Compare(CompareArgs),
    /// Print the closed-form convergence bounds for a population size
    Bounds(BoundsArgs),
    /// List the built-in scenarios
    Scenarios,
    /// Parse and validate a scenario file without running it
    Validate {
        /// Path to a TOML or JSON scenario document
        #[arg(long)]
        scenario: String,
    },
}

#[derive(Args)]
struct RunArgs {
    /// Built-in scenario name (see `scenarios`) or path to a TOML/JSON file
    #[arg(long)]
    scenario: String,
    /// Override the scenario's protocol (counter|timeout)
    #[arg(long)]
    algorithm: Option<String>,
    /// Single seed (default 0)
    #[arg(long, conflicts_with = "seeds")]
    seed: Option<u64>,
    /// Inclusive seed range A..B, expanded to independent runs
    #[arg(long)]
    seeds: Option<String>,
    /// Override the horizon (ticks)
    #[arg(long)]
    horizon: Option<u64>,
    /// Override the timeout threshold base
    #[arg(long)]
    threshold: Option<u64>,
    /// Linear threshold growth per tick, as a rational NUM/DEN
    #[arg(long)]
    threshold_growth: Option<String>,
    /// Output directory for artifacts
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Override the snapshot stride
    #[arg(long)]
    stride: Option<u64>,
    /// Comma-separated artifact formats: csv, json
    #[arg(long, default_value = "csv,json")]
    format: String,
}

#[derive(Args)]
struct CompareArgs {
    /// Comma-separated population sizes
    #[arg(long, default_value = "10,20,30,50,100")]
    sizes: String,
    /// Inclusive seed range A..B
    #[arg(long, default_value = "0..99")]
    seeds: String,
    /// Optional output directory for compare.csv
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BoundsArgs {
    /// Population size after churn stops
    #[arg(long)]
    n: u64,
    /// Failure probability for the high-probability bound
    #[arg(long, default_value_t = 0.05)]
    epsilon: f64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Compare(args) => cmd_compare(args),
        Command::Bounds(args) => cmd_bounds(args),
        Command::Scenarios => cmd_scenarios(),
        Command::Validate { scenario } => cmd_validate(&scenario),
    };
    match result {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}

fn load_scenario(name_or_path: &str) -> Result<Scenario> {
    if let Some(s) = scenario::builtin(name_or_path) {
        return Ok(s);
    }
    let path = Path::new(name_or_path);
    if path.exists() {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading scenario file {}", path.display()))?;
        return Ok(parse_scenario(&text)?);
    }
    bail!(
        "{name_or_path:?} is neither a built-in scenario nor an existing file (try `maxgossip scenarios`)"
    );
}

fn parse_seed_range(text: &str) -> Result<(u64, u64)> {
    let (a, b) = text
        .split_once("..")
        .ok_or_else(|| anyhow!("seed range must look like A..B, got {text:?}"))?;
    let lo: u64 = a.trim().parse().context("seed range start")?;
    let hi: u64 = b.trim().parse().context("seed range end")?;
    if lo > hi {
        bail!("empty seed range {text:?}");
    }
    Ok((lo, hi))
}

fn parse_growth(text: &str) -> Result<(u64, u64)> {
    let (n, d) = text
        .split_once('/')
        .ok_or_else(|| anyhow!("threshold growth must look like NUM/DEN, got {text:?}"))?;
    let num: u64 = n.trim().parse().context("growth numerator")?;
    let den: u64 = d.trim().parse().context("growth denominator")?;
    if den == 0 {
        bail!("growth denominator must be >= 1");
    }
    Ok((num, den))
}

fn apply_overrides(mut s: Scenario, args: &RunArgs) -> Result<Scenario> {
    if let Some(alg) = &args.algorithm {
        let protocol: Protocol = alg.parse().map_err(|e: String| anyhow!(e))?;
        if protocol != s.protocol {
            s.protocol = protocol;
            match protocol {
                Protocol::Counter => s.threshold = None,
                Protocol::Timeout => {
                    if s.threshold.is_none() && args.threshold.is_none() {
                        bail!("switching to the timeout protocol needs --threshold");
                    }
                }
            }
        }
    }
    if let Some(h) = args.horizon {
        s.horizon = h;
    }
    if let Some(stride) = args.stride {
        s.snapshot_stride = stride;
    }
    if let Some(base) = args.threshold {
        s.threshold = Some(Threshold::fixed(base));
    }
    if let Some(growth) = &args.threshold_growth {
        let (num, den) = parse_growth(growth)?;
        let base = s
            .threshold
            .ok_or_else(|| anyhow!("--threshold-growth needs a threshold (timeout protocol)"))?
            .base();
        s.threshold = Some(Threshold::linear(base, num, den));
    }
    s.validate()?;
    Ok(s)
}

struct SeedOutcome {
    oracle_ok: bool,
    line: String,
}

fn cmd_run(args: RunArgs) -> Result<ExitCode> {
    let scenario = apply_overrides(load_scenario(&args.scenario)?, &args)?;
    let seeds: Vec<u64> = match (&args.seed, &args.seeds) {
        (Some(s), None) => vec![*s],
        (None, Some(range)) => {
            let (lo, hi) = parse_seed_range(range)?;
            (lo..=hi).collect()
        }
        (None, None) => vec![0],
        (Some(_), Some(_)) => unreachable!("clap conflicts_with"),
    };
    let formats: Vec<&str> = args.format.split(',').map(str::trim).collect();
    for f in &formats {
        if !["csv", "json"].contains(f) {
            bail!("unknown format {f:?} (csv|json)");
        }
    }
    std::fs::create_dir_all(&args.out)
        .with_context(|| format!("creating output directory {}", args.out.display()))?;

    let outcomes: Vec<Result<SeedOutcome>> = seeds
        .par_iter()
        .map(|&seed| run_one(&scenario, seed, &args.out, &formats))
        .collect();

    let mut any_failure = false;
    for outcome in outcomes {
        let outcome = outcome?;
        println!("{}", outcome.line);
        any_failure |= !outcome.oracle_ok;
    }
    if any_failure {
        eprintln!("oracle violations found; see the counterexample files listed above");
        return Ok(ExitCode::from(1));
    }
    Ok(ExitCode::SUCCESS)
}

fn run_one(scenario: &Scenario, seed: u64, out: &Path, formats: &[&str]) -> Result<SeedOutcome> {
    let trace = run(scenario, seed)?;
    let report: RunReport = build_report(&trace);
    let stem = format!("{}-seed{seed}", scenario.name);

    if formats.contains(&"csv") {
        std::fs::write(out.join(format!("{stem}.trace.csv")), trace.to_csv_string())?;
        std::fs::write(
            out.join(format!("{stem}.metrics.csv")),
            maxgossip::metrics::metrics_csv_string(&trace),
        )?;
    }
    if formats.contains(&"json") {
        std::fs::write(
            out.join(format!("{stem}.trace.json")),
            trace.to_json_string(),
        )?;
    }
    std::fs::write(
        out.join(format!("{stem}.summary.json")),
        summary_json(&report.summary),
    )?;

    let oracle_ok = report.oracle_ok();
    let mut line = format!(
        "seed {seed}: end_tick={} settle={} first_correct={} spurious={} oracle={}",
        report.summary.end_tick,
        opt(report.summary.convergence.settle_tick),
        opt(report.summary.first_correct_tick),
        opt(report.summary.spurious_reset_count),
        if oracle_ok { "pass" } else { "FAIL" }
    );
    if !oracle_ok {
        let path = out.join(format!("{stem}.counterexample.json"));
        std::fs::write(&path, violations_json(&report.violations))?;
        write!(line, " counterexample={}", path.display())?;
    }
    Ok(SeedOutcome { oracle_ok, line })
}

fn opt<T: std::fmt::Display>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_else(|| "-".into())
}

fn cmd_compare(args: CompareArgs) -> Result<ExitCode> {
    let sizes: Vec<usize> = args
        .sizes
        .split(',')
        .map(|s| s.trim().parse().context("population size"))
        .collect::<Result<_>>()?;
    for &n in &sizes {
        if n < 2 {
            bail!("population sizes must be >= 2, got {n}");
        }
    }
    let (lo, hi) = parse_seed_range(&args.seeds)?;
    let seeds: Vec<u64> = (lo..=hi).collect();

    println!(
        "{:>5} {:>9} {:>9} {:>9} {:>9} {:>7} {:>7} {:>13} {:>13}",
        "N",
        "ctr med",
        "ctr mean",
        "tmo med",
        "tmo mean",
        "T*",
        "ratio",
        "E-bound(2ph)",
        "hp-bound(2ph)"
    );
    let mut csv = String::from(
        "n,counter_median,counter_mean,counter_min,counter_max,timeout_median,timeout_mean,timeout_min,timeout_max,t_star,expected_bound_two_phase,high_prob_bound_two_phase\n",
    );
    for &n in &sizes {
        let (sc, st) = scenario::table1(n);
        let depart = scenario::table1_departure_tick(n);
        let measure = |s: &Scenario| -> Result<Vec<u64>> {
            seeds
                .par_iter()
                .map(|&seed| {
                    let trace = run(s, seed)?;
                    // A run that never reconverges within its horizon counts
                    // as the horizon itself (conservative).
                    Ok(first_correct_tick(&trace, depart + 1)
                        .map(|t| t - depart)
                        .unwrap_or(s.horizon - depart))
                })
                .collect()
        };
        let counter = Stats::of(&measure(&sc)?);
        let timeout = Stats::of(&measure(&st)?);
        let t_star = scenario::table1_threshold(n);
        let n_after = (n - 1) as u64;
        let e_bound = expected_convergence_bound(n_after, 2).map_err(|e| anyhow!("{e}"))?;
        let hp_bound = high_prob_bound(n_after, 0.05, 2).map_err(|e| anyhow!("{e}"))?;
        println!(
            "{n:>5} {:>9} {:>9.1} {:>9} {:>9.1} {t_star:>7} {:>7.2} {e_bound:>13.1} {hp_bound:>13.1}",
            counter.median,
            counter.mean,
            timeout.median,
            timeout.mean,
            timeout.median as f64 / counter.median as f64,
        );
        writeln!(
            csv,
            "{n},{},{:.2},{},{},{},{:.2},{},{},{t_star},{e_bound:.3},{hp_bound:.3}",
            counter.median,
            counter.mean,
            counter.min,
            counter.max,
            timeout.median,
            timeout.mean,
            timeout.min,
            timeout.max
        )?;
    }
    if let Some(out) = &args.out {
        std::fs::create_dir_all(out)?;
        let path = out.join("compare.csv");
        std::fs::write(&path, csv)?;
        println!("wrote {}", path.display());
    }
    Ok(ExitCode::SUCCESS)
}

struct Stats {
    median: u64,
    mean: f64,
    min: u64,
    max: u64,
}

impl Stats {
    fn of(xs: &[u64]) -> Stats {
        let mut sorted = xs.to_vec();
        sorted.sort_unstable();
        Stats {
            median: sorted[sorted.len() / 2],
            mean: sorted.iter().sum::<u64>() as f64 / sorted.len() as f64,
            min: sorted[0],
            max: sorted[sorted.len() - 1],
        }
    }
}

fn cmd_bounds(args: BoundsArgs) -> Result<ExitCode> {
    let one = expected_convergence_bound(args.n, 1).map_err(|e| anyhow!("{e}"))?;
    let two = expected_convergence_bound(args.n, 2).map_err(|e| anyhow!("{e}"))?;
    let hp1 = high_prob_bound(args.n, args.epsilon, 1).map_err(|e| anyhow!("{e}"))?;
    let hp2 = high_prob_bound(args.n, args.epsilon, 2).map_err(|e| anyhow!("{e}"))?;
    println!("population n = {}, epsilon = {}", args.n, args.epsilon);
    println!("expected ticks, one phase:   {one:.4}");
    println!("expected ticks, two phases:  {two:.4}");
    println!("with prob 1-eps, one phase:  {hp1:.4}");
    println!("with prob 1-eps, two phases: {hp2:.4}");
    Ok(ExitCode::SUCCESS)
}

fn cmd_scenarios() -> Result<ExitCode> {
    println!(
        "{:<22} {:>8} {:>6} {:>8} {:>6} {:>7}",
        "name", "protocol", "n0", "horizon", "T*", "stride"
    );
    for s in scenario::builtin_scenarios() {
        println!(
            "{:<22} {:>8} {:>6} {:>8} {:>6} {:>7}",
            s.name,
            s.protocol.to_string(),
            s.initial.count(),
            s.horizon,
            s.threshold
                .map(|t| t.base().to_string())
                .unwrap_or_else(|| "-".into()),
            s.snapshot_stride
        );
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_validate(path: &str) -> Result<ExitCode> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading scenario file {path}"))?;
    let s = parse_scenario(&text)?;
    println!(
        "ok: {} ({}, {} initial agents, horizon {})",
        s.name,
        s.protocol,
        s.initial.count(),
        s.horizon
    );
    Ok(ExitCode::SUCCESS)
}

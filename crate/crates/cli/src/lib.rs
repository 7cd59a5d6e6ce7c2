//! Command-line harness: topology growth runs, scaling sweeps, use-case
//! scenarios and manifest replay.
//!
//! Exit codes: 0 on success, 2 for invalid arguments, 1 for runtime errors.

pub mod output;
pub mod scenario;

use std::ffi::OsString;
use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use oscl_core::bfs::PathRule;
use oscl_core::topo::{
    predicted_degree, run_topology_experiment, scaling_check_combos, scaling_check_within, ExperimentConfig,
    PairBudget, ScalingFit,
};
use oscl_core::trace::{MsgType, Role};

use output::{Manifest, RunConfig, SweepConfig};
use scenario::{run_scenario, ScenarioConfig, ScenarioOutcome, ScenarioTopology};

/// Environment variable overriding `sweep --time-budget`.
pub const BUDGET_ENV: &str = "OSCL_SIM_BUDGET_SECS";

/// Argument problems found after parsing; reported with exit code 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

#[derive(Debug, Parser)]
#[command(name = "oscl-sim", version, about = "Overlay service layer simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Grow one overlay under the D-hop rule.
    Topology(TopologyArgs),
    /// Saturated degree over a grid of N and D.
    Sweep(SweepArgs),
    /// Replay a use case with or without the overlay.
    Scenario(ScenarioArgs),
    /// Re-run whatever a manifest describes.
    Replay(ReplayArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Comparison {
    AtMostD,
    StrictlyLessD,
}

impl From<Comparison> for PathRule {
    fn from(c: Comparison) -> Self {
        match c {
            Comparison::AtMostD => PathRule::AtMostD,
            Comparison::StrictlyLessD => PathRule::StrictlyLessD,
        }
    }
}

#[derive(Debug, clap::Args)]
pub struct TopologyArgs {
    /// Node count (at least 2).
    #[arg(long)]
    pub n: u32,
    /// Hop budget D.
    #[arg(long)]
    pub d: u32,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Pairs to draw; defaults to ceil(50 N ln N).
    #[arg(long)]
    pub pairs: Option<u64>,
    /// Sample the average degree every this many pairs; defaults to N.
    #[arg(long)]
    pub stride: Option<u64>,
    /// Saturation window in pairs; defaults to 10 N.
    #[arg(long)]
    pub window: Option<u64>,
    #[arg(long, value_enum, default_value_t = Comparison::AtMostD)]
    pub comparison: Comparison,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, clap::Args)]
pub struct SweepArgs {
    /// Comma-separated node counts.
    #[arg(long, value_delimiter = ',', required = true)]
    pub n: Vec<u32>,
    /// Comma-separated hop budgets.
    #[arg(long, value_delimiter = ',', required = true)]
    pub d: Vec<u32>,
    /// Seeds per (N, D).
    #[arg(long, default_value_t = 3)]
    pub seeds: u64,
    #[arg(long, default_value_t = 1)]
    pub seed_base: u64,
    /// c in ceil(c N ln N) pairs per run.
    #[arg(long, default_value_t = 50.0)]
    pub pairs_factor: f64,
    /// Wall-clock budget in seconds; combinations projected to overrun it are skipped.
    #[arg(long, default_value_t = 300.0)]
    pub time_budget: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Switch {
    On,
    Off,
}

#[derive(Debug, clap::Args)]
pub struct ScenarioArgs {
    /// usecase1 or usecase2; with --topology-file any label.
    pub name: String,
    #[arg(long, value_enum)]
    pub oscl: Switch,
    /// Content instances appended by the meter.
    #[arg(long, default_value_t = 5)]
    pub appends: u32,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Overlay discovery scope and path budget.
    #[arg(long, default_value_t = 3)]
    pub max_hops: u32,
    /// Topology in key=value lines, replacing the built-in one.
    #[arg(long)]
    pub topology_file: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, clap::Args)]
pub struct ReplayArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// Defaults to a `replay` directory next to the manifest.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.is::<UsageError>() => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

pub fn execute(command: Command) -> Result<()> {
    match command {
        Command::Topology(args) => topology(args),
        Command::Sweep(args) => sweep(args),
        Command::Scenario(args) => scenario_cmd(args),
        Command::Replay(args) => replay(args),
    }
}

fn manifest(command: &str, config: RunConfig, seeds: Vec<u64>, started: Instant) -> Manifest {
    Manifest {
        command: command.to_string(),
        config,
        seeds,
        version: env!("CARGO_PKG_VERSION").to_string(),
        outputs: Vec::new(),
        duration_ms: started.elapsed().as_millis() as u64,
    }
}

fn topology(args: TopologyArgs) -> Result<()> {
    if args.n < 2 {
        return Err(usage(format!("--n must be N >= 2, got {}", args.n)));
    }
    if args.d < 1 {
        return Err(usage("--d must be at least 1"));
    }
    let defaults = ExperimentConfig::new(args.n, args.d, args.seed);
    let config = ExperimentConfig {
        pair_count: args.pairs.unwrap_or(defaults.pair_count),
        stride: args.stride.unwrap_or(defaults.stride),
        window: args.window.unwrap_or(defaults.window),
        comparison: args.comparison.into(),
        ..defaults
    };
    config.validate().map_err(|e| usage(e.to_string()))?;
    run_topology(&config, &args.out)
}

fn run_topology(config: &ExperimentConfig, out: &Path) -> Result<()> {
    let started = Instant::now();
    let stats = run_topology_experiment(config)?;
    let predicted = predicted_degree(config.n as f64, config.d)?;
    let tables = [
        ("series.csv", output::topology_series_csv(config, &stats)?),
        ("summary.csv", output::topology_summary_csv(config, &stats, predicted)?),
    ];
    let m = manifest("topology", RunConfig::Topology(config.clone()), vec![config.seed], started);
    output::write_run(out, &tables, m)?;
    println!(
        "N={} D={} seed={}: degree {:.4}, predicted {:.4}, ratio {:.4}, {} edges{}",
        config.n,
        config.d,
        config.seed,
        stats.final_degree,
        predicted,
        stats.final_degree / predicted,
        stats.edge_count,
        if stats.saturated { "" } else { " (not saturated)" }
    );
    Ok(())
}

/// Budget in seconds from the environment, if set.
fn budget_override() -> Result<Option<f64>> {
    match std::env::var(BUDGET_ENV) {
        Ok(v) => v
            .trim()
            .parse::<f64>()
            .map(Some)
            .map_err(|_| usage(format!("{BUDGET_ENV} must be a number of seconds, got {v:?}"))),
        Err(_) => Ok(None),
    }
}

fn sweep(args: SweepArgs) -> Result<()> {
    if args.n.is_empty() || args.d.is_empty() {
        return Err(usage("--n and --d need at least one value each"));
    }
    if let Some(n) = args.n.iter().find(|n| **n < 2) {
        return Err(usage(format!("every --n value must be N >= 2, got {n}")));
    }
    if args.d.contains(&0) {
        return Err(usage("every --d value must be at least 1"));
    }
    if args.seeds == 0 {
        return Err(usage("--seeds must be at least 1"));
    }
    if !(args.pairs_factor > 0.0 && args.pairs_factor.is_finite()) {
        return Err(usage("--pairs-factor must be positive"));
    }
    let secs = budget_override()?.unwrap_or(args.time_budget);
    if !(secs >= 0.0 && secs.is_finite()) {
        return Err(usage("the time budget must be a non-negative number of seconds"));
    }
    let mut ns = args.n.clone();
    ns.sort_unstable();
    ns.dedup();
    let mut ds = args.d.clone();
    ds.sort_unstable();
    ds.dedup();
    let seeds: Vec<u64> = (0..args.seeds).map(|i| args.seed_base + i).collect();
    let budget = PairBudget::NLogN(args.pairs_factor);

    let started = Instant::now();
    let fit = scaling_check_within(&ns, &ds, &seeds, budget, Duration::from_secs_f64(secs))?;
    let config = SweepConfig {
        ns,
        ds,
        budget,
        time_budget_secs: secs,
        completed: fit.rows.iter().map(|r| (r.n, r.d)).collect(),
        skipped: fit.skipped.clone(),
    };
    write_sweep(&fit, config, seeds, started, &args.out)
}

fn write_sweep(fit: &ScalingFit, config: SweepConfig, seeds: Vec<u64>, started: Instant, out: &Path) -> Result<()> {
    let tables = [
        ("summary.csv", output::sweep_summary_csv(fit)?),
        ("fit.csv", output::sweep_fit_csv(fit)?),
    ];
    let m = manifest("sweep", RunConfig::Sweep(config), seeds, started);
    output::write_run(out, &tables, m)?;
    for (n, d) in &fit.skipped {
        eprintln!("warning: skipped N={n} D={d} (time budget)");
    }
    if fit.rows.is_empty() {
        eprintln!("warning: the time budget left no combination to run");
    }
    for d in fit.ds() {
        let spread = fit.spread(d).unwrap_or(f64::NAN);
        let monotone = fit.non_decreasing_in_n(d);
        println!("D={d}: ratio spread {spread:.4}, degree non-decreasing in N: {monotone}");
    }
    Ok(())
}

fn scenario_cmd(args: ScenarioArgs) -> Result<()> {
    let oscl = args.oscl == Switch::On;
    if args.max_hops == 0 {
        return Err(usage("--max-hops must be at least 1"));
    }
    let mut config = match &args.topology_file {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let topology = ScenarioTopology::parse(&text).map_err(|e| usage(format!("{}: {e:#}", path.display())))?;
            ScenarioConfig {
                name: args.name.clone(),
                oscl,
                appends: args.appends,
                seed: args.seed,
                max_hops: args.max_hops,
                topology,
            }
        }
        None => ScenarioConfig::builtin(&args.name, oscl, args.appends).map_err(|e| usage(e.to_string()))?,
    };
    config.seed = args.seed;
    config.max_hops = args.max_hops;
    run_scenario_to(&config, args.out.as_deref())
}

fn run_scenario_to(config: &ScenarioConfig, out: Option<&Path>) -> Result<()> {
    let started = Instant::now();
    let outcome = run_scenario(config)?;
    if let Some(dir) = out {
        let tables = scenario_tables(&outcome)?;
        let m = manifest("scenario", RunConfig::Scenario(config.clone()), vec![config.seed], started);
        output::write_run(dir, &tables, m)?;
    }
    print_scenario(config, &outcome);
    Ok(())
}

/// messages.csv, counters.csv and emissions.csv of a finished scenario.
pub fn scenario_tables(outcome: &ScenarioOutcome) -> Result<Vec<(&'static str, Vec<u8>)>> {
    Ok(vec![
        ("messages.csv", output::messages_csv(&outcome.net)?),
        ("counters.csv", output::counters_csv(&outcome.net)?),
        ("emissions.csv", output::emissions_csv(&outcome.net)?),
    ])
}

fn print_scenario(config: &ScenarioConfig, o: &ScenarioOutcome) {
    let counters = &o.net.trace().counters;
    let relayed = |t| counters.count(o.nscl, t, Role::Relayed);
    let inbox = o.net.system().get(o.consumer).map(|s| s.inbox.len()).unwrap_or(0);
    println!(
        "{} (oscl {}): discovery {:?}, link {}, NSCL relayed notify={} subscribe={} data={}, {} deliveries at {}",
        config.name,
        if config.oscl { "on" } else { "off" },
        o.discovery.method(),
        o.link.map(|l| format!("{l:?}")).unwrap_or_else(|| "-".into()),
        relayed(MsgType::Notify),
        relayed(MsgType::Subscribe),
        relayed(MsgType::Data),
        inbox,
        o.label(o.consumer),
    );
}

fn replay(args: ReplayArgs) -> Result<()> {
    let manifest = output::Manifest::read(&args.manifest).map_err(|e| usage(format!("{e:#}")))?;
    let out = match args.out {
        Some(dir) => dir,
        None => args
            .manifest
            .parent()
            .map(|p| p.join("replay"))
            .unwrap_or_else(|| PathBuf::from("replay")),
    };
    match manifest.config {
        RunConfig::Topology(config) => run_topology(&config, &out),
        RunConfig::Sweep(config) => {
            let started = Instant::now();
            let fit = scaling_check_combos(&config.completed, &manifest.seeds, config.budget)?;
            let fit = ScalingFit {
                skipped: config.skipped.clone(),
                ..fit
            };
            write_sweep(&fit, config, manifest.seeds, started, &out)
        }
        RunConfig::Scenario(config) => run_scenario_to(&config, Some(&out)),
    }
}

//! `relsched`: validate, schedule, simulate and sweep DAG workflows on a VM
//! catalog.
//!
//! Exit codes: 0 success, 2 infeasible instance, 1 any other error.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use relsched_core::bench::{self, ReportRow, SweepAlgorithm, SweepParameter, SweepSpec, WorkflowSource};
use relsched_core::dax::{parse_dax, DaxDefaults};
use relsched_core::dynamic::{run_dynamic, run_monte_carlo, DurationModel, RescheduleMode, SimConfig};
use relsched_core::generate::{layered_workflow, random_platform, CatalogRanges, LayeredSpec};
use relsched_core::oracle::{enumerate_optimal, OracleLimits, OracleStatus};
use relsched_core::schedule::ScheduleDoc;
use relsched_core::scheduler::{bcp_schedule, schedule, DEFAULT_THRESHOLD};
use relsched_core::workflow::parse_workflow;
use relsched_core::{Algorithm, Platform, Schedule, Workflow};

#[derive(Parser)]
#[command(name = "relsched", version, about = "Energy-aware workflow scheduling under deadline and reliability constraints")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check that the fastest placement meets the deadline and reliability.
    Validate(InstanceArgs),
    /// Build a static schedule.
    Schedule(ScheduleArgs),
    /// Execute a schedule with sampled run times and rescheduling.
    Simulate(SimulateArgs),
    /// Sweep one parameter and write a CSV report.
    Sweep(SweepArgs),
    /// Exhaustive minimum-energy search for small workflows.
    Oracle(OracleArgs),
    /// Generate workflows and catalogs, or convert DAX files.
    Gen(GenArgs),
}

#[derive(Args)]
struct InstanceArgs {
    /// Workflow JSON, or a Pegasus DAX (.dax/.xml).
    #[arg(long)]
    workflow: PathBuf,
    /// VM catalog (.json or .toml).
    #[arg(long, env = "RELSCHED_PLATFORM")]
    platform: PathBuf,
    /// Deadline factor: D_w = A_w + df * critical-path time on the fastest VM.
    #[arg(long, conflicts_with = "no_deadline")]
    df: Option<f64>,
    /// Workflow reliability requirement.
    #[arg(long)]
    rw: Option<f64>,
    /// Use a deadline no placement can miss.
    #[arg(long)]
    no_deadline: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum AlgoArg {
    Bcp,
    Lef,
    Ldd,
    Asmfr,
    Oracle,
}

impl From<AlgoArg> for Algorithm {
    fn from(a: AlgoArg) -> Self {
        match a {
            AlgoArg::Bcp => Algorithm::Bcp,
            AlgoArg::Lef => Algorithm::Lef,
            AlgoArg::Ldd => Algorithm::Ldd,
            AlgoArg::Asmfr => Algorithm::Asmfr,
            AlgoArg::Oracle => Algorithm::Oracle,
        }
    }
}

#[derive(Args)]
struct ScheduleArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    #[arg(long, value_enum, default_value = "asmfr")]
    algo: AlgoArg,
    /// Fan-out ratio threshold for ASMFR.
    #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
    th: f64,
    /// Schedule JSON destination.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum RescheduleArg {
    Lef,
    Ldd,
    AsSelected,
    Off,
}

impl From<RescheduleArg> for RescheduleMode {
    fn from(r: RescheduleArg) -> Self {
        match r {
            RescheduleArg::Lef => RescheduleMode::Lef,
            RescheduleArg::Ldd => RescheduleMode::Ldd,
            RescheduleArg::AsSelected => RescheduleMode::AsSelected,
            RescheduleArg::Off => RescheduleMode::Off,
        }
    }
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    /// Algorithm that builds the initial schedule.
    #[arg(long, value_enum, default_value = "asmfr")]
    algo: AlgoArg,
    #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
    th: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of runs, with seeds seed, seed+1, ...
    #[arg(long, default_value_t = 1)]
    runs: u64,
    /// Mean actual/worst-case run-time fraction; 1 runs every task at its worst case.
    #[arg(long, default_value_t = 0.75)]
    fraction: f64,
    /// Run every task at its worst case (same as --fraction 1).
    #[arg(long)]
    worst_case: bool,
    /// Sample transient failures during the runs.
    #[arg(long)]
    failure_injection: bool,
    #[arg(long, value_enum, default_value = "as-selected")]
    reschedule: RescheduleArg,
    /// Monte-Carlo reliability trials of the initial schedule (0 = skip).
    #[arg(long, default_value_t = 0)]
    trials: u64,
    /// Event trace destination (JSON lines, one summary line per run).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Report CSV destination.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// Workflow files; repeat for several. Without any, a layered DAG is
    /// generated per seed.
    #[arg(long)]
    workflow: Vec<PathBuf>,
    #[arg(long, env = "RELSCHED_PLATFORM")]
    platform: PathBuf,
    /// Comma-separated: bcp, lef, ldd, asmfr, oracle, dy.
    #[arg(long, default_value = "bcp,lef,ldd,dy")]
    algo: String,
    /// Swept parameter: df, rw, tasks or th.
    #[arg(long, default_value = "df")]
    param: String,
    /// Comma-separated grid values.
    #[arg(long, conflicts_with = "range")]
    grid: Option<String>,
    /// Grid as from:to:step, inclusive.
    #[arg(long)]
    range: Option<String>,
    /// Seeds per point.
    #[arg(long, default_value_t = 1)]
    seeds: u64,
    /// First seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0)]
    trials: u64,
    #[arg(long, default_value_t = 0.75)]
    fraction: f64,
    /// Deadline factor when not swept.
    #[arg(long, default_value_t = 1.5)]
    df: f64,
    /// Reliability requirement when not swept.
    #[arg(long, default_value_t = 0.95)]
    rw: f64,
    /// ASMFR threshold when not swept.
    #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
    th: f64,
    /// Tasks of generated workflows.
    #[arg(long, default_value_t = 50)]
    tasks: usize,
    #[arg(long, default_value_t = 6)]
    layers: usize,
    #[arg(long, default_value_t = 0.2)]
    edge_prob: f64,
    /// Record wall-clock time per row (makes the CSV non-reproducible).
    #[arg(long)]
    wall_time: bool,
    #[arg(long)]
    out: PathBuf,
    /// Per-point mean/min CSV destination.
    #[arg(long)]
    summary: Option<PathBuf>,
}

#[derive(Args)]
struct OracleArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    #[arg(long, default_value_t = OracleLimits::default().max_tasks)]
    max_tasks: usize,
    /// Search-node budget.
    #[arg(long, default_value_t = OracleLimits::default().node_budget)]
    budget: u64,
    /// Enumerate without bounds.
    #[arg(long)]
    no_prune: bool,
    /// Schedule JSON from `relsched schedule` to compare against.
    #[arg(long)]
    compare: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GenArgs {
    #[command(subcommand)]
    what: GenCommand,
}

#[derive(Subcommand)]
enum GenCommand {
    /// Random layered DAG.
    Workflow {
        #[arg(long, default_value_t = 50)]
        tasks: usize,
        #[arg(long, default_value_t = 6)]
        layers: usize,
        #[arg(long, default_value_t = 0.2)]
        edge_prob: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Catalog used to set the deadline.
        #[arg(long, env = "RELSCHED_PLATFORM")]
        platform: PathBuf,
        #[arg(long, default_value_t = 1.5)]
        df: f64,
        #[arg(long, default_value_t = 0.95)]
        rw: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Random VM catalog.
    Platform {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Sample small catalogs (at most 3 VM types with 2-3 levels).
        #[arg(long)]
        small: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Convert a Pegasus DAX to workflow JSON.
    Dax {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, env = "RELSCHED_PLATFORM")]
        platform: PathBuf,
        #[arg(long, default_value_t = 1.5)]
        df: f64,
        #[arg(long, default_value_t = 0.95)]
        rw: f64,
        /// MI per second of recorded runtime.
        #[arg(long, default_value_t = 1000.0)]
        reference_mips: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Successful runs either accept the instance or reject it as infeasible.
enum Outcome {
    Done,
    Infeasible,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(Outcome::Done) => ExitCode::SUCCESS,
        Ok(Outcome::Infeasible) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(command: Command) -> Result<Outcome> {
    match command {
        Command::Validate(args) => cmd_validate(&args),
        Command::Schedule(args) => cmd_schedule(&args),
        Command::Simulate(args) => cmd_simulate(&args),
        Command::Sweep(args) => cmd_sweep(&args),
        Command::Oracle(args) => cmd_oracle(&args),
        Command::Gen(args) => cmd_gen(args.what),
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn load_platform(path: &Path) -> Result<Platform> {
    Platform::load(path).with_context(|| format!("loading catalog {}", path.display()))
}

fn is_dax(path: &Path) -> bool {
    matches!(path.extension().and_then(|e| e.to_str()), Some("dax" | "xml"))
}

fn stem(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "workflow".into())
}

/// Loads a workflow and applies the constraint overrides.
fn load_workflow(path: &Path, p: &Platform, df: Option<f64>, rw: Option<f64>, no_deadline: bool) -> Result<Workflow> {
    let text = read(path)?;
    let w = if is_dax(path) {
        let defaults = DaxDefaults {
            deadline_factor: df.unwrap_or(DaxDefaults::default().deadline_factor),
            reliability: rw.unwrap_or(DaxDefaults::default().reliability),
            ..DaxDefaults::default()
        };
        parse_dax(&text, &stem(path), &defaults, p)?
    } else {
        let w = parse_workflow(&text).with_context(|| format!("parsing {}", path.display()))?;
        let w = match rw {
            Some(rw) => w.with_constraints(w.deadline, rw)?,
            None => w,
        };
        match df {
            Some(df) => w.with_deadline_factor(df, p)?,
            None => w,
        }
    };
    Ok(if no_deadline { w.with_unbounded_deadline(p)? } else { w })
}

fn load_instance(args: &InstanceArgs) -> Result<(Workflow, Platform)> {
    let p = load_platform(&args.platform)?;
    let w = load_workflow(&args.workflow, &p, args.df, args.rw, args.no_deadline)?;
    Ok((w, p))
}

fn write_output(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn summary_line(s: &Schedule) -> String {
    let mut line = format!(
        "algorithm={} heuristic={} energy={:.6} makespan={:.6} reliability={:.9} feasible={}",
        s.algorithm, s.heuristic, s.total_energy, s.makespan, s.reliability, s.feasible
    );
    if let Some(r) = s.rejection {
        line.push_str(&format!(" ({r})"));
    }
    line
}

fn cmd_validate(args: &InstanceArgs) -> Result<Outcome> {
    let (w, p) = load_instance(args)?;
    let s = bcp_schedule(&w, &p);
    if s.feasible {
        println!(
            "feasible: makespan {:.6} <= window {:.6}, reliability {:.9} >= {}",
            s.makespan,
            w.window(),
            s.reliability,
            w.reliability
        );
        Ok(Outcome::Done)
    } else {
        let reason = s.rejection.map(|r| r.to_string()).unwrap_or_else(|| "infeasible".into());
        println!(
            "{reason}: fastest makespan {:.6}, window {:.6}, best reliability {:.9}, required {}",
            s.makespan,
            w.window(),
            s.reliability,
            w.reliability
        );
        Ok(Outcome::Infeasible)
    }
}

fn cmd_schedule(args: &ScheduleArgs) -> Result<Outcome> {
    let (w, p) = load_instance(&args.instance)?;
    let s = schedule(&w, &p, args.algo.into(), args.th);
    if let Some(out) = &args.out {
        let doc = serde_json::to_string_pretty(&s.to_doc(&w, &p))? + "\n";
        write_output(Some(out), &doc)?;
    }
    println!("{}", summary_line(&s));
    Ok(if s.feasible { Outcome::Done } else { Outcome::Infeasible })
}

fn cmd_simulate(args: &SimulateArgs) -> Result<Outcome> {
    let (w, p) = load_instance(&args.instance)?;
    let s = schedule(&w, &p, args.algo.into(), args.th);
    println!("{}", summary_line(&s));
    if !s.feasible {
        return Ok(Outcome::Infeasible);
    }
    let duration = if args.worst_case || args.fraction == 1.0 {
        DurationModel::WorstCase
    } else {
        DurationModel::Exponential { mean_fraction: args.fraction }
    };

    let mut traces = String::new();
    let mut rows = Vec::new();
    for seed in args.seed..args.seed + args.runs.max(1) {
        let cfg = SimConfig {
            seed,
            duration: duration.clone(),
            failure_injection: args.failure_injection,
            reschedule: args.reschedule.into(),
        };
        let trace = run_dynamic(&w, &p, &s, &cfg)?;
        let mut line = format!(
            "seed={seed} planned_energy={:.6} realized_energy={:.6} static_energy={:.6} makespan={:.6} deadline_met={} reschedules={} accepted={}",
            trace.planned_energy,
            trace.realized_energy,
            trace.static_energy,
            trace.makespan,
            trace.deadline_met,
            trace.reschedules,
            trace.accepted
        );
        if let Some(ok) = trace.success {
            line.push_str(&format!(" success={ok}"));
        }
        println!("{line}");
        traces.push_str(&trace.to_json_lines());
        rows.push(ReportRow {
            workflow: w.name.clone(),
            algorithm: SweepAlgorithm::Dy,
            seed,
            df: w.window() / w.critical_path_time(&p),
            rw: w.reliability,
            tasks: w.len(),
            planned_energy: trace.planned_energy,
            realized_energy: trace.realized_energy,
            makespan: trace.makespan,
            planned_reliability: s.reliability,
            achieved_reliability: None,
            feasible: trace.deadline_met && trace.success != Some(false),
            wall_time_ms: 0,
            point: 0,
            value: 0.0,
        });
    }

    if args.trials > 0 {
        let est = run_monte_carlo(&w, &p, &s, args.trials, args.seed)?;
        println!(
            "monte-carlo trials={} successes={} estimate={:.6} wilson95=[{:.6},{:.6}] sigma={:.6} closed_form={:.6}",
            est.trials, est.successes, est.estimate, est.lower, est.upper, est.sigma, s.reliability
        );
        for row in &mut rows {
            row.achieved_reliability = Some(est.estimate);
        }
    }
    if let Some(out) = &args.out {
        write_output(Some(out), &traces)?;
    }
    if let Some(path) = &args.report {
        bench::write_file(path, |f| bench::write_report(f, &rows))?;
    }
    Ok(Outcome::Done)
}

/// Parses `from:to:step` into an inclusive grid, rounded to 1e-9 so that
/// accumulated steps print cleanly.
fn parse_range(text: &str) -> Result<Vec<f64>> {
    let parts: Vec<f64> = text
        .split(':')
        .map(|s| s.trim().parse::<f64>().with_context(|| format!("bad range value {s:?}")))
        .collect::<Result<_>>()?;
    let [from, to, step] = parts[..] else { bail!("range must be from:to:step, got {text:?}") };
    if !(step > 0.0) || to < from {
        bail!("range {text:?} is empty");
    }
    let n = ((to - from) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| ((from + i as f64 * step) * 1e9).round() / 1e9).collect())
}

fn parse_list<T: std::str::FromStr>(text: &str) -> Result<Vec<T>>
where
    T::Err: std::error::Error + Send + Sync + 'static,
{
    text.split(',').filter(|s| !s.trim().is_empty()).map(|s| Ok(s.trim().parse::<T>()?)).collect()
}

fn cmd_sweep(args: &SweepArgs) -> Result<Outcome> {
    let p = load_platform(&args.platform)?;
    let grid = match (&args.grid, &args.range) {
        (Some(g), _) => parse_list::<f64>(g)?,
        (None, Some(r)) => parse_range(r)?,
        (None, None) => bail!("give the grid with --grid or --range"),
    };
    let workflows = if args.workflow.is_empty() {
        WorkflowSource::Layered(LayeredSpec {
            tasks: args.tasks,
            layers: args.layers,
            edge_prob: args.edge_prob,
            ..LayeredSpec::default()
        })
    } else {
        WorkflowSource::Fixed(
            args.workflow.iter().map(|path| load_workflow(path, &p, None, None, false)).collect::<Result<_>>()?,
        )
    };
    let parameter: SweepParameter = args.param.parse()?;
    let mut spec = SweepSpec::new(workflows, p, parameter, grid);
    spec.algorithms = parse_list(&args.algo)?;
    spec.seeds = (args.seed..args.seed + args.seeds).collect();
    spec.trials = args.trials;
    spec.df = args.df;
    spec.rw = args.rw;
    spec.threshold = args.th;
    spec.mean_fraction = args.fraction;
    spec.wall_time = args.wall_time;
    let rows = bench::sweep_to_files(&spec, &args.out, args.summary.as_deref())?;
    println!("{} rows written to {}", rows.len(), args.out.display());
    Ok(Outcome::Done)
}

fn cmd_oracle(args: &OracleArgs) -> Result<Outcome> {
    let (w, p) = load_instance(&args.instance)?;
    let limits = OracleLimits { max_tasks: args.max_tasks, node_budget: args.budget, prune: !args.no_prune };
    let result = enumerate_optimal(&w, &p, limits);
    let status = serde_json::to_value(result.status)?;
    let doc = json!({
        "workflow": w.name,
        "status": status,
        "optimal_energy": result.optimal_energy,
        "explored": result.explored,
        "replica_policy": result.replica_policy,
        "schedule": result.best.as_ref().map(|(_, s)| s.to_doc(&w, &p)),
    });
    if let Some(out) = &args.out {
        write_output(Some(out), &(serde_json::to_string_pretty(&doc)? + "\n"))?;
    }
    let mut line = format!("status={} explored={}", status.as_str().unwrap_or_default(), result.explored);
    if let Some(e) = result.optimal_energy {
        line.push_str(&format!(" energy={e:.6}"));
    }
    println!("{line}");
    if let Some(path) = &args.compare {
        let other: ScheduleDoc =
            serde_json::from_str(&read(path)?).with_context(|| format!("parsing schedule {}", path.display()))?;
        match result.optimal_energy {
            Some(best) => println!("ratio({})={:.6}", other.heuristic, other.energy / best),
            None => println!("ratio({})=n/a", other.heuristic),
        }
    }
    Ok(if result.status == OracleStatus::Infeasible { Outcome::Infeasible } else { Outcome::Done })
}

fn cmd_gen(what: GenCommand) -> Result<Outcome> {
    match what {
        GenCommand::Workflow { tasks, layers, edge_prob, seed, platform, df, rw, out } => {
            let p = load_platform(&platform)?;
            let shape = LayeredSpec { tasks, layers, edge_prob, ..LayeredSpec::default() };
            let w = layered_workflow(&mut ChaCha8Rng::seed_from_u64(seed), &shape, &format!("layered-n{tasks}-s{seed}"));
            let w = w.with_constraints(w.deadline, rw)?.with_deadline_factor(df, &p)?;
            write_output(out.as_deref(), &(w.to_json() + "\n"))?;
        }
        GenCommand::Platform { seed, small, out } => {
            let ranges = if small { CatalogRanges::small() } else { CatalogRanges::default() };
            let p = random_platform(&mut ChaCha8Rng::seed_from_u64(seed), &ranges);
            write_output(out.as_deref(), &(p.to_json() + "\n"))?;
        }
        GenCommand::Dax { input, platform, df, rw, reference_mips, out } => {
            let p = load_platform(&platform)?;
            let defaults = DaxDefaults { deadline_factor: df, reliability: rw, reference_mips, ..DaxDefaults::default() };
            let w = parse_dax(&read(&input)?, &stem(&input), &defaults, &p)?;
            write_output(out.as_deref(), &(w.to_json() + "\n"))?;
        }
    }
    Ok(Outcome::Done)
}

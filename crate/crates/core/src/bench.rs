//! Parameter sweeps over workflows, algorithms and seeds, written as
//! byte-stable CSV.

use std::collections::BTreeMap;
use std::fmt;
use std::fs::File;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::dynamic::{run_dynamic, run_monte_carlo, DurationModel, SimConfig, SimError, DEFAULT_MEAN_FRACTION};
use crate::generate::{layered_workflow, LayeredSpec};
use crate::platform::Platform;
use crate::schedule::Algorithm;
use crate::scheduler::{schedule, DEFAULT_THRESHOLD};
use crate::workflow::{Workflow, WorkflowError};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("sweep grid is empty")]
    EmptyGrid,
    #[error("sweep has no algorithms")]
    NoAlgorithms,
    #[error("sweep has no seeds")]
    NoSeeds,
    #[error("sweep has no workflows")]
    NoWorkflows,
    #[error("deadline factor {0} must be >= 1")]
    DeadlineFactor(f64),
    #[error("reliability requirement {0} must lie in [0, 1)")]
    Reliability(f64),
    #[error("task-count sweeps need a generated workflow source")]
    TaskCountNeedsGenerator,
    #[error("task count {0} is not a positive integer")]
    TaskCount(f64),
    #[error("unknown algorithm {0:?} (expected bcp, lef, ldd, asmfr, oracle or dy)")]
    UnknownAlgorithm(String),
    #[error("unknown sweep parameter {0:?} (expected df, rw, tasks or th)")]
    UnknownParameter(String),
    #[error(transparent)]
    Workflow(#[from] WorkflowError),
    #[error("{workflow} seed {seed}: {source}")]
    Simulation { workflow: String, seed: u64, source: SimError },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// A static algorithm, or Dy: the ASMFR schedule executed with rescheduling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepAlgorithm {
    Bcp,
    Lef,
    Ldd,
    Asmfr,
    Oracle,
    Dy,
}

impl SweepAlgorithm {
    pub const ALL: [SweepAlgorithm; 6] = [
        SweepAlgorithm::Bcp,
        SweepAlgorithm::Lef,
        SweepAlgorithm::Ldd,
        SweepAlgorithm::Asmfr,
        SweepAlgorithm::Oracle,
        SweepAlgorithm::Dy,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SweepAlgorithm::Bcp => "bcp",
            SweepAlgorithm::Lef => "lef",
            SweepAlgorithm::Ldd => "ldd",
            SweepAlgorithm::Asmfr => "asmfr",
            SweepAlgorithm::Oracle => "oracle",
            SweepAlgorithm::Dy => "dy",
        }
    }

    /// The static algorithm whose schedule the row reports (Dy starts from ASMFR).
    pub fn static_algorithm(self) -> Algorithm {
        match self {
            SweepAlgorithm::Bcp => Algorithm::Bcp,
            SweepAlgorithm::Lef => Algorithm::Lef,
            SweepAlgorithm::Ldd => Algorithm::Ldd,
            SweepAlgorithm::Asmfr | SweepAlgorithm::Dy => Algorithm::Asmfr,
            SweepAlgorithm::Oracle => Algorithm::Oracle,
        }
    }
}

impl fmt::Display for SweepAlgorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepAlgorithm {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|a| a.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| BenchError::UnknownAlgorithm(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SweepParameter {
    DeadlineFactor,
    Reliability,
    TaskCount,
    Threshold,
}

impl SweepParameter {
    pub fn name(self) -> &'static str {
        match self {
            SweepParameter::DeadlineFactor => "df",
            SweepParameter::Reliability => "rw",
            SweepParameter::TaskCount => "tasks",
            SweepParameter::Threshold => "th",
        }
    }
}

impl FromStr for SweepParameter {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "df" => Ok(SweepParameter::DeadlineFactor),
            "rw" => Ok(SweepParameter::Reliability),
            "tasks" | "n" => Ok(SweepParameter::TaskCount),
            "th" => Ok(SweepParameter::Threshold),
            _ => Err(BenchError::UnknownParameter(s.to_string())),
        }
    }
}

#[derive(Debug, Clone)]
pub enum WorkflowSource {
    /// Fixed workflows; their deadline and reliability are replaced by the
    /// sweep's.
    Fixed(Vec<Workflow>),
    /// One random layered DAG per seed.
    Layered(LayeredSpec),
}

#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub workflows: WorkflowSource,
    pub platform: Platform,
    pub algorithms: Vec<SweepAlgorithm>,
    pub parameter: SweepParameter,
    pub grid: Vec<f64>,
    pub seeds: Vec<u64>,
    /// Monte-Carlo trials per static row; 0 leaves achieved reliability empty.
    pub trials: u64,
    /// Values of the parameters not being swept.
    pub df: f64,
    pub rw: f64,
    pub threshold: f64,
    /// Mean run-time fraction for Dy rows.
    pub mean_fraction: f64,
    /// Record wall-clock time per row; off keeps the CSV byte-stable.
    pub wall_time: bool,
}

impl SweepSpec {
    pub fn new(workflows: WorkflowSource, platform: Platform, parameter: SweepParameter, grid: Vec<f64>) -> Self {
        Self {
            workflows,
            platform,
            algorithms: vec![SweepAlgorithm::Bcp, SweepAlgorithm::Lef, SweepAlgorithm::Ldd, SweepAlgorithm::Dy],
            parameter,
            grid,
            seeds: vec![0],
            trials: 0,
            df: 1.5,
            rw: 0.95,
            threshold: DEFAULT_THRESHOLD,
            mean_fraction: DEFAULT_MEAN_FRACTION,
            wall_time: false,
        }
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        if self.grid.is_empty() {
            return Err(BenchError::EmptyGrid);
        }
        if self.algorithms.is_empty() {
            return Err(BenchError::NoAlgorithms);
        }
        if self.seeds.is_empty() {
            return Err(BenchError::NoSeeds);
        }
        if let WorkflowSource::Fixed(ws) = &self.workflows {
            if ws.is_empty() {
                return Err(BenchError::NoWorkflows);
            }
            if self.parameter == SweepParameter::TaskCount {
                return Err(BenchError::TaskCountNeedsGenerator);
            }
        }
        for i in 0..self.grid.len() {
            let point = self.point(i);
            if !(point.df >= 1.0) {
                return Err(BenchError::DeadlineFactor(point.df));
            }
            if !(0.0..1.0).contains(&point.rw) {
                return Err(BenchError::Reliability(point.rw));
            }
            if let Some(n) = point.tasks {
                if n == 0 {
                    return Err(BenchError::TaskCount(self.grid[i]));
                }
            }
        }
        Ok(())
    }

    fn point(&self, i: usize) -> Point {
        let v = self.grid[i];
        let mut point = Point { df: self.df, rw: self.rw, threshold: self.threshold, tasks: None };
        match self.parameter {
            SweepParameter::DeadlineFactor => point.df = v,
            SweepParameter::Reliability => point.rw = v,
            SweepParameter::Threshold => point.threshold = v,
            SweepParameter::TaskCount => {
                point.tasks = Some(if v >= 1.0 && v.fract() == 0.0 { v as usize } else { 0 });
            }
        }
        point
    }
}

#[derive(Debug, Clone, Copy)]
struct Point {
    df: f64,
    rw: f64,
    threshold: f64,
    tasks: Option<usize>,
}

/// One (grid point, workflow, algorithm, seed) result.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub workflow: String,
    pub algorithm: SweepAlgorithm,
    pub seed: u64,
    pub df: f64,
    pub rw: f64,
    pub tasks: usize,
    /// Worst-case energy of the static schedule.
    pub planned_energy: f64,
    /// Equal to the planned energy for static rows.
    pub realized_energy: f64,
    pub makespan: f64,
    pub planned_reliability: f64,
    /// Monte-Carlo estimate; `None` for Dy rows and when no trials run.
    pub achieved_reliability: Option<f64>,
    pub feasible: bool,
    pub wall_time_ms: u64,
    /// Index of the grid point, for ordering and aggregation.
    pub point: usize,
    /// Value of the swept parameter.
    pub value: f64,
}

pub const REPORT_HEADER: [&str; 13] = [
    "workflow",
    "algorithm",
    "seed",
    "df",
    "R_w",
    "N",
    "planned_energy",
    "realized_energy",
    "makespan",
    "planned_reliability",
    "achieved_reliability",
    "feasible",
    "wall_time_ms",
];

fn fixed(x: f64) -> String {
    format!("{x:.6}")
}

impl ReportRow {
    fn record(&self) -> Vec<String> {
        vec![
            self.workflow.clone(),
            self.algorithm.name().to_string(),
            self.seed.to_string(),
            fixed(self.df),
            fixed(self.rw),
            self.tasks.to_string(),
            fixed(self.planned_energy),
            fixed(self.realized_energy),
            fixed(self.makespan),
            fixed(self.planned_reliability),
            self.achieved_reliability.map(fixed).unwrap_or_default(),
            self.feasible.to_string(),
            self.wall_time_ms.to_string(),
        ]
    }
}

/// Mean and minimum over the seeds of one (grid point, workflow, algorithm).
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub parameter: SweepParameter,
    pub value: f64,
    pub workflow: String,
    pub algorithm: SweepAlgorithm,
    pub runs: usize,
    pub feasible_runs: usize,
    pub mean_planned_energy: f64,
    pub min_planned_energy: f64,
    pub mean_realized_energy: f64,
    pub min_realized_energy: f64,
    pub mean_makespan: f64,
}

pub const SUMMARY_HEADER: [&str; 11] = [
    "parameter",
    "value",
    "workflow",
    "algorithm",
    "runs",
    "feasible_runs",
    "mean_planned_energy",
    "min_planned_energy",
    "mean_realized_energy",
    "min_realized_energy",
    "mean_makespan",
];

impl SummaryRow {
    fn record(&self) -> Vec<String> {
        vec![
            self.parameter.name().to_string(),
            fixed(self.value),
            self.workflow.clone(),
            self.algorithm.name().to_string(),
            self.runs.to_string(),
            self.feasible_runs.to_string(),
            fixed(self.mean_planned_energy),
            fixed(self.min_planned_energy),
            fixed(self.mean_realized_energy),
            fixed(self.min_realized_energy),
            fixed(self.mean_makespan),
        ]
    }
}

struct Job {
    point: usize,
    workflow: usize,
    algorithm: usize,
    seed: u64,
}

fn instance(spec: &SweepSpec, point: Point, workflow: usize, seed: u64) -> Result<Workflow, BenchError> {
    let base = match &spec.workflows {
        WorkflowSource::Fixed(ws) => ws[workflow].clone(),
        WorkflowSource::Layered(shape) => {
            let mut shape = shape.clone();
            if let Some(n) = point.tasks {
                shape.tasks = n;
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            layered_workflow(&mut rng, &shape, &format!("layered-n{}", shape.tasks))
        }
    };
    Ok(base.with_constraints(base.deadline, point.rw)?.with_deadline_factor(point.df, &spec.platform)?)
}

/// Schedules one instance with one algorithm and seed.
pub fn run_point(
    w: &Workflow,
    p: &Platform,
    algorithm: SweepAlgorithm,
    threshold: f64,
    seed: u64,
    trials: u64,
    mean_fraction: f64,
) -> Result<ReportRow, SimError> {
    let s = schedule(w, p, algorithm.static_algorithm(), threshold);
    let mut row = ReportRow {
        workflow: w.name.clone(),
        algorithm,
        seed,
        df: (w.deadline - w.arrival) / w.critical_path_time(p),
        rw: w.reliability,
        tasks: w.len(),
        planned_energy: s.total_energy,
        realized_energy: s.total_energy,
        makespan: s.makespan,
        planned_reliability: s.reliability,
        achieved_reliability: None,
        feasible: s.feasible,
        wall_time_ms: 0,
        point: 0,
        value: 0.0,
    };
    if algorithm == SweepAlgorithm::Dy {
        if s.feasible {
            let mut cfg = SimConfig::new(seed);
            cfg.duration = DurationModel::Exponential { mean_fraction };
            let trace = run_dynamic(w, p, &s, &cfg)?;
            row.realized_energy = trace.realized_energy;
            row.makespan = trace.makespan;
            row.feasible = trace.deadline_met;
        }
    } else if trials > 0 && s.feasible {
        row.achieved_reliability = Some(run_monte_carlo(w, p, &s, trials, seed)?.estimate);
    }
    Ok(row)
}

/// Runs every (grid point, workflow, algorithm, seed) combination in
/// parallel and returns the rows in that nested order.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<ReportRow>, BenchError> {
    spec.validate()?;
    let workflows = match &spec.workflows {
        WorkflowSource::Fixed(ws) => ws.len(),
        WorkflowSource::Layered(_) => 1,
    };
    let mut jobs = Vec::new();
    for point in 0..spec.grid.len() {
        for workflow in 0..workflows {
            for algorithm in 0..spec.algorithms.len() {
                for &seed in &spec.seeds {
                    jobs.push(Job { point, workflow, algorithm, seed });
                }
            }
        }
    }
    jobs.par_iter()
        .map(|job| {
            let point = spec.point(job.point);
            let w = instance(spec, point, job.workflow, job.seed)?;
            let started = Instant::now();
            let mut row = run_point(
                &w,
                &spec.platform,
                spec.algorithms[job.algorithm],
                point.threshold,
                job.seed,
                spec.trials,
                spec.mean_fraction,
            )
            .map_err(|source| BenchError::Simulation { workflow: w.name.clone(), seed: job.seed, source })?;
            // report the exact grid value rather than the recomputed ratio
            row.df = point.df;
            row.point = job.point;
            row.value = spec.grid[job.point];
            if spec.wall_time {
                row.wall_time_ms = started.elapsed().as_millis() as u64;
            }
            Ok(row)
        })
        .collect()
}

/// Aggregates rows per (grid point, workflow, algorithm), in row order.
pub fn summarize(parameter: SweepParameter, rows: &[ReportRow]) -> Vec<SummaryRow> {
    let mut groups: BTreeMap<(usize, String, SweepAlgorithm), Vec<&ReportRow>> = BTreeMap::new();
    let mut order = Vec::new();
    for r in rows {
        let key = (r.point, r.workflow.clone(), r.algorithm);
        if !groups.contains_key(&key) {
            order.push(key.clone());
        }
        groups.entry(key).or_default().push(r);
    }
    order
        .into_iter()
        .map(|key| {
            let g = &groups[&key];
            let n = g.len() as f64;
            let mean = |f: fn(&ReportRow) -> f64| g.iter().map(|r| f(r)).sum::<f64>() / n;
            let min = |f: fn(&ReportRow) -> f64| g.iter().map(|r| f(r)).fold(f64::INFINITY, f64::min);
            SummaryRow {
                parameter,
                value: g[0].value,
                workflow: key.1.clone(),
                algorithm: key.2,
                runs: g.len(),
                feasible_runs: g.iter().filter(|r| r.feasible).count(),
                mean_planned_energy: mean(|r| r.planned_energy),
                min_planned_energy: min(|r| r.planned_energy),
                mean_realized_energy: mean(|r| r.realized_energy),
                min_realized_energy: min(|r| r.realized_energy),
                mean_makespan: mean(|r| r.makespan),
            }
        })
        .collect()
}

fn write_records<W: Write>(out: W, header: &[&str], records: impl Iterator<Item = Vec<String>>) -> Result<(), BenchError> {
    let mut writer = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(out);
    writer.write_record(header)?;
    for r in records {
        writer.write_record(&r)?;
    }
    writer.flush()?;
    Ok(())
}

pub fn write_report<W: Write>(out: W, rows: &[ReportRow]) -> Result<(), BenchError> {
    write_records(out, &REPORT_HEADER, rows.iter().map(ReportRow::record))
}

pub fn write_summary<W: Write>(out: W, rows: &[SummaryRow]) -> Result<(), BenchError> {
    write_records(out, &SUMMARY_HEADER, rows.iter().map(SummaryRow::record))
}

/// Creates `path` with `write`, removing the partial file on failure.
pub fn write_file<F>(path: &Path, write: F) -> Result<(), BenchError>
where
    F: FnOnce(&mut File) -> Result<(), BenchError>,
{
    let mut file = File::create(path)?;
    let result = write(&mut file).and_then(|()| Ok(file.sync_all()?));
    if result.is_err() {
        drop(file);
        let _ = std::fs::remove_file(path);
    }
    result
}

/// Runs the sweep and writes the report (and optional summary). Nothing is
/// left behind when any point fails.
pub fn sweep_to_files(spec: &SweepSpec, report: &Path, summary: Option<&Path>) -> Result<Vec<ReportRow>, BenchError> {
    let rows = run_sweep(spec)?;
    write_file(report, |f| write_report(f, &rows))?;
    if let Some(path) = summary {
        let aggregated = summarize(spec.parameter, &rows);
        if let Err(e) = write_file(path, |f| write_summary(f, &aggregated)) {
            let _ = std::fs::remove_file(report);
            return Err(e);
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{two_vm_platform, w1};

    fn df_spec() -> SweepSpec {
        let mut spec = SweepSpec::new(
            WorkflowSource::Fixed(vec![w1()]),
            two_vm_platform(),
            SweepParameter::DeadlineFactor,
            vec![1.1, 1.5, 2.0, 2.5],
        );
        spec.rw = 0.9;
        spec.seeds = vec![1, 2, 3];
        spec
    }

    fn csv_bytes(rows: &[ReportRow]) -> Vec<u8> {
        let mut out = Vec::new();
        write_report(&mut out, rows).unwrap();
        out
    }

    #[test]
    fn rows_in_nested_order() {
        let spec = df_spec();
        let rows = run_sweep(&spec).unwrap();
        assert_eq!(rows.len(), 4 * 4 * 3);
        let keys: Vec<(usize, SweepAlgorithm, u64)> = rows.iter().map(|r| (r.point, r.algorithm, r.seed)).collect();
        let mut sorted = keys.clone();
        sorted.sort_by_key(|&(p, a, s)| (p, spec.algorithms.iter().position(|&x| x == a), s));
        assert_eq!(keys, sorted);
        assert_eq!(rows[0].df, 1.1);
    }

    #[test]
    fn csv_is_byte_stable() {
        let spec = df_spec();
        assert_eq!(csv_bytes(&run_sweep(&spec).unwrap()), csv_bytes(&run_sweep(&spec).unwrap()));
    }

    #[test]
    fn csv_format() {
        let rows = run_sweep(&df_spec()).unwrap();
        let text = String::from_utf8(csv_bytes(&rows)).unwrap();
        let mut lines = text.split("\r\n");
        assert_eq!(lines.next().unwrap(), REPORT_HEADER.join(","));
        let first: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(first[..6], ["W1", "bcp", "1", "1.100000", "0.900000", "5"]);
        assert_eq!(first[6], "1246.000000");
        assert_eq!(first[10], "");
        assert_eq!(first[12], "0");
    }

    #[test]
    fn quoting_follows_rfc4180() {
        let mut w = w1();
        w.name = "a,\"b\"".into();
        let row = run_point(&w, &two_vm_platform(), SweepAlgorithm::Bcp, 0.75, 0, 0, 0.75).unwrap();
        let text = String::from_utf8(csv_bytes(&[row])).unwrap();
        assert!(text.split("\r\n").nth(1).unwrap().starts_with("\"a,\"\"b\"\"\",bcp"));
    }

    #[test]
    fn bcp_constant_and_dy_dominant() {
        let rows = run_sweep(&df_spec()).unwrap();
        for r in &rows {
            if r.algorithm == SweepAlgorithm::Bcp {
                assert!((r.planned_energy - 1246.0).abs() < 1e-9);
            }
            if r.algorithm == SweepAlgorithm::Dy {
                assert!(r.realized_energy <= r.planned_energy + 1e-9);
            } else {
                assert_eq!(r.realized_energy, r.planned_energy);
            }
        }
    }

    #[test]
    fn summary_mean_and_min() {
        let spec = df_spec();
        let rows = run_sweep(&spec).unwrap();
        let summary = summarize(spec.parameter, &rows);
        assert_eq!(summary.len(), 4 * 4);
        let dy = summary.iter().find(|s| s.algorithm == SweepAlgorithm::Dy && s.value == 2.0).unwrap();
        let realized: Vec<f64> = rows
            .iter()
            .filter(|r| r.algorithm == SweepAlgorithm::Dy && r.value == 2.0)
            .map(|r| r.realized_energy)
            .collect();
        assert_eq!(dy.runs, 3);
        assert!((dy.mean_realized_energy - realized.iter().sum::<f64>() / 3.0).abs() < 1e-9);
        assert_eq!(dy.min_realized_energy, realized.iter().copied().fold(f64::INFINITY, f64::min));
    }

    #[test]
    fn task_count_sweep_generates_workflows() {
        let mut spec = SweepSpec::new(
            WorkflowSource::Layered(LayeredSpec { layers: 3, ..LayeredSpec::default() }),
            two_vm_platform(),
            SweepParameter::TaskCount,
            vec![5.0, 9.0],
        );
        spec.algorithms = vec![SweepAlgorithm::Bcp];
        spec.seeds = vec![0, 1];
        let rows = run_sweep(&spec).unwrap();
        assert_eq!(rows.iter().map(|r| r.tasks).collect::<Vec<_>>(), vec![5, 5, 9, 9]);
        assert_eq!(rows[0].workflow, "layered-n5");
    }

    #[test]
    fn monte_carlo_column() {
        let mut spec = df_spec();
        spec.algorithms = vec![SweepAlgorithm::Lef];
        spec.trials = 2000;
        let rows = run_sweep(&spec).unwrap();
        assert!(rows.iter().all(|r| r.achieved_reliability.is_some_and(|a| a > 0.97 && a >= r.rw)));
    }

    #[test]
    fn invalid_specs_rejected() {
        let mut spec = df_spec();
        spec.grid.clear();
        assert!(matches!(run_sweep(&spec), Err(BenchError::EmptyGrid)));
        let mut spec = df_spec();
        spec.grid = vec![0.9];
        assert!(matches!(run_sweep(&spec), Err(BenchError::DeadlineFactor(_))));
        let mut spec = df_spec();
        spec.parameter = SweepParameter::TaskCount;
        assert!(matches!(run_sweep(&spec), Err(BenchError::TaskCountNeedsGenerator)));
        assert!(matches!("foo".parse::<SweepAlgorithm>(), Err(BenchError::UnknownAlgorithm(_))));
        assert_eq!("DY".parse::<SweepAlgorithm>().unwrap(), SweepAlgorithm::Dy);
    }

    #[test]
    fn partial_file_removed_on_failure() {
        let dir = std::env::temp_dir().join(format!("relsched-bench-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("out.csv");
        let err = write_file(&path, |f| {
            f.write_all(b"partial")?;
            Err(BenchError::EmptyGrid)
        });
        assert!(err.is_err());
        assert!(!path.exists());
        std::fs::remove_dir_all(&dir).unwrap();
    }
}

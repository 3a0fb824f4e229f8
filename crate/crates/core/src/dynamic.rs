//! Event-driven execution of a static schedule with sampled run times,
//! rolling-horizon rescheduling of undispatched tasks, and Monte-Carlo
//! reliability measurement.
//!
//! Every task draws its run-time fraction from its own random stream, so
//! a run with rescheduling and a run of the unchanged static schedule see
//! the same fractions, and trial counts or thread counts never change the
//! values drawn.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::platform::{self, ExecContext, Platform};
use crate::schedule::{time_eps, Algorithm, Schedule, EPS};
use crate::scheduler::{asmfr_select, plan, FixedTask, Frame, Heuristic, DEFAULT_THRESHOLD};
use crate::workflow::Workflow;

/// Mean of the sampled run time as a fraction of the worst case.
pub const DEFAULT_MEAN_FRACTION: f64 = 0.75;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("mean fraction {0} must lie in (0, 1]")]
    InvalidFraction(f64),
    #[error("scripted fractions: expected {expected}, got {got}")]
    ScriptLength { expected: usize, got: usize },
    #[error("scripted fraction {0} must lie in [0, 1]")]
    InvalidScript(f64),
    #[error("the initial schedule is not feasible")]
    InfeasibleSchedule,
    #[error("at least one trial is required")]
    NoTrials,
}

/// How actual run times relate to the worst case.
#[derive(Debug, Clone, PartialEq)]
pub enum DurationModel {
    /// `min(X, tau)` with `X` exponential of mean `mean_fraction * tau`.
    Exponential { mean_fraction: f64 },
    /// Every task takes exactly its worst case.
    WorstCase,
    /// Fixed fraction of the worst case per task, indexed by task.
    Scripted(Vec<f64>),
}

/// Which heuristic replans the undispatched tasks after each completion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RescheduleMode {
    Lef,
    Ldd,
    /// The heuristic that produced the initial schedule.
    AsSelected,
    /// Execute the static schedule unchanged.
    Off,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub seed: u64,
    pub duration: DurationModel,
    pub failure_injection: bool,
    pub reschedule: RescheduleMode,
}

impl SimConfig {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            duration: DurationModel::Exponential { mean_fraction: DEFAULT_MEAN_FRACTION },
            failure_injection: false,
            reschedule: RescheduleMode::AsSelected,
        }
    }

    fn fractions(&self, n: usize) -> Result<Vec<f64>, SimError> {
        match &self.duration {
            DurationModel::Exponential { mean_fraction } => {
                if !(*mean_fraction > 0.0 && *mean_fraction <= 1.0) {
                    return Err(SimError::InvalidFraction(*mean_fraction));
                }
                Ok((0..n).map(|j| sample_fraction(&mut task_rng(self.seed, j, Stream::Duration), *mean_fraction)).collect())
            }
            DurationModel::WorstCase => Ok(vec![1.0; n]),
            DurationModel::Scripted(v) => {
                if v.len() != n {
                    return Err(SimError::ScriptLength { expected: n, got: v.len() });
                }
                if let Some(&bad) = v.iter().find(|&&y| !(0.0..=1.0).contains(&y)) {
                    return Err(SimError::InvalidScript(bad));
                }
                Ok(v.clone())
            }
        }
    }
}

#[derive(Clone, Copy)]
enum Stream {
    Duration = 0,
    Failure = 1,
}

fn task_rng(seed: u64, task: usize, stream: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(2 * task as u64 + stream as u64);
    rng
}

/// Capped exponential fraction of the worst case: `min(X, 1)` with
/// `X ~ Exp(mean = mean_fraction)`.
pub fn sample_fraction<R: Rng + ?Sized>(rng: &mut R, mean_fraction: f64) -> f64 {
    let exp = Exp::new(1.0 / mean_fraction).expect("mean fraction is positive");
    exp.sample(rng).min(1.0)
}

/// Actual run time of `wc` MI on `ctx`, capped at the worst case.
pub fn sample_actual_time<R: Rng + ?Sized>(p: &Platform, wc: f64, ctx: ExecContext, mean_fraction: f64, rng: &mut R) -> f64 {
    platform::execution_time(p, wc, ctx) * sample_fraction(rng, mean_fraction)
}

/// Dispatched, completed and pending tasks during a run.
#[derive(Debug, Clone, PartialEq)]
pub struct RollingHorizon {
    /// Dispatched and still running.
    pub ready: BTreeSet<usize>,
    /// Completed, with actual finish times (`None` while not completed).
    pub completed: Vec<Option<f64>>,
    /// Not dispatched yet.
    pub pending: BTreeSet<usize>,
}

impl RollingHorizon {
    pub fn new(w: &Workflow) -> Self {
        Self { ready: BTreeSet::new(), completed: vec![None; w.len()], pending: (0..w.len()).collect() }
    }

    pub fn dispatch(&mut self, j: usize) {
        debug_assert!(self.pending.contains(&j));
        self.pending.remove(&j);
        self.ready.insert(j);
    }

    pub fn complete(&mut self, j: usize, finish: f64) {
        debug_assert!(self.ready.contains(&j));
        self.ready.remove(&j);
        self.completed[j] = Some(finish);
    }

    pub fn is_completed(&self, j: usize) -> bool {
        self.completed[j].is_some()
    }
}

/// Pending tasks whose predecessors have all completed, ascending by index.
pub fn advance_ready(h: &RollingHorizon, w: &Workflow) -> Vec<usize> {
    h.pending.iter().copied().filter(|&j| w.task(j).preds.iter().all(|&r| h.is_completed(r))).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EventKind {
    Dispatch,
    Complete,
    Reschedule,
    Failure,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceEvent {
    pub time: f64,
    pub kind: EventKind,
    pub task: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vm: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub frequency: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub backup: Option<bool>,
    /// Planned energy on dispatch, realized energy on completion, planned
    /// energy of the pending tasks on reschedule.
    pub energy: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub accepted: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimTrace {
    pub events: Vec<TraceEvent>,
    /// Worst-case energy of the initial schedule.
    pub planned_energy: f64,
    /// Sum of power times actual duration over every executed copy.
    pub realized_energy: f64,
    /// Realized energy of the initial schedule executed unchanged with the
    /// same sampled fractions.
    pub static_energy: f64,
    pub makespan: f64,
    pub deadline_met: bool,
    /// `None` unless failures are injected.
    pub success: Option<bool>,
    pub reschedules: usize,
    pub accepted: usize,
}

#[derive(Serialize)]
struct SummaryLine {
    kind: &'static str,
    planned_energy: f64,
    realized_energy: f64,
    static_energy: f64,
    makespan: f64,
    deadline_met: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    success: Option<bool>,
    reschedules: usize,
    accepted: usize,
}

impl SimTrace {
    /// One JSON object per event, then a summary object.
    pub fn to_json_lines(&self) -> String {
        let mut out = String::new();
        for e in &self.events {
            out.push_str(&serde_json::to_string(e).expect("events serialize"));
            out.push('\n');
        }
        let summary = SummaryLine {
            kind: "summary",
            planned_energy: self.planned_energy,
            realized_energy: self.realized_energy,
            static_energy: self.static_energy,
            makespan: self.makespan,
            deadline_met: self.deadline_met,
            success: self.success,
            reschedules: self.reschedules,
            accepted: self.accepted,
        };
        out.push_str(&serde_json::to_string(&summary).expect("summary serializes"));
        out.push('\n');
        out
    }
}

#[derive(Debug, Clone, Copy)]
struct Placement {
    ctx: ExecContext,
    backup: bool,
}

impl Placement {
    fn energy(&self, w: &Workflow, p: &Platform, j: usize) -> f64 {
        let copies = if self.backup { 2.0 } else { 1.0 };
        copies * platform::task_energy(p, w.task(j).wc, self.ctx)
    }
}

struct Clock {
    start: Vec<f64>,
    worst_finish: Vec<f64>,
    actual_finish: Vec<f64>,
}

fn reschedule_heuristic(w: &Workflow, initial: &Schedule, mode: RescheduleMode) -> Option<Heuristic> {
    match mode {
        RescheduleMode::Lef => Some(Heuristic::Lef),
        RescheduleMode::Ldd => Some(Heuristic::Ldd),
        RescheduleMode::Off => None,
        RescheduleMode::AsSelected => Some(match initial.heuristic {
            Algorithm::Lef => Heuristic::Lef,
            Algorithm::Ldd => Heuristic::Ldd,
            _ => asmfr_select(w, initial.threshold.unwrap_or(DEFAULT_THRESHOLD)),
        }),
    }
}

/// Executes `initial`, replanning undispatched tasks after every completion.
///
/// Ready tasks start as soon as their last predecessor completes. A
/// replanning pass treats completed tasks as certain (reliability factor 1)
/// and running tasks as fixed until their worst-case finish. Its result
/// replaces the current plan only when no pending task's energy grows, so
/// the realized energy never exceeds that of the unchanged static schedule
/// under the same fractions.
pub fn run_dynamic(w: &Workflow, p: &Platform, initial: &Schedule, cfg: &SimConfig) -> Result<SimTrace, SimError> {
    if !initial.feasible {
        return Err(SimError::InfeasibleSchedule);
    }
    let n = w.len();
    let fraction = cfg.fractions(n)?;
    let heuristic = reschedule_heuristic(w, initial, cfg.reschedule);

    let mut placement: Vec<Placement> =
        initial.entries.iter().map(|e| Placement { ctx: e.ctx, backup: e.backup.is_some() }).collect();
    let static_energy = (0..n).map(|j| placement[j].energy(w, p, j) * fraction[j]).sum();
    let mut h = RollingHorizon::new(w);
    let mut clock = Clock { start: vec![0.0; n], worst_finish: vec![0.0; n], actual_finish: vec![0.0; n] };
    let mut events = Vec::new();
    let mut realized_energy = 0.0;
    let mut success = cfg.failure_injection.then_some(true);
    let (mut reschedules, mut accepted) = (0, 0);

    let dispatch = |j: usize, now: f64, h: &mut RollingHorizon, clock: &mut Clock, placement: &[Placement], events: &mut Vec<TraceEvent>| {
        let pl = placement[j];
        let tau = platform::execution_time(p, w.task(j).wc, pl.ctx);
        h.dispatch(j);
        clock.start[j] = now;
        clock.worst_finish[j] = now + tau;
        clock.actual_finish[j] = now + tau * fraction[j];
        events.push(TraceEvent {
            time: now,
            kind: EventKind::Dispatch,
            task: w.task(j).id.clone(),
            vm: Some(p.vm(pl.ctx).name.clone()),
            frequency: Some(p.freq(pl.ctx)),
            backup: Some(pl.backup),
            energy: pl.energy(w, p, j),
            accepted: None,
        });
    };

    for j in advance_ready(&h, w) {
        dispatch(j, w.arrival, &mut h, &mut clock, &placement, &mut events);
    }
    let mut last_finish = w.arrival;
    while let Some(&j) = h.ready.iter().min_by(|&&a, &&b| {
        clock.actual_finish[a].total_cmp(&clock.actual_finish[b]).then_with(|| w.task(a).id.cmp(&w.task(b).id))
    }) {
        let now = clock.actual_finish[j];
        last_finish = last_finish.max(now);
        h.complete(j, now);
        let pl = placement[j];
        let energy = pl.energy(w, p, j) * fraction[j];
        realized_energy += energy;
        events.push(TraceEvent {
            time: now,
            kind: EventKind::Complete,
            task: w.task(j).id.clone(),
            vm: None,
            frequency: None,
            backup: None,
            energy,
            accepted: None,
        });

        if cfg.failure_injection {
            let tau = now - clock.start[j];
            let copy_ok = (-platform::failure_rate(p, pl.ctx) * tau).exp();
            let mut rng = task_rng(cfg.seed, j, Stream::Failure);
            let copies = if pl.backup { 2 } else { 1 };
            if !(0..copies).any(|_| rng.random::<f64>() < copy_ok) {
                success = Some(false);
                events.push(TraceEvent {
                    time: now,
                    kind: EventKind::Failure,
                    task: w.task(j).id.clone(),
                    vm: None,
                    frequency: None,
                    backup: None,
                    energy: 0.0,
                    accepted: None,
                });
                break;
            }
        }

        if let (Some(heuristic), false) = (heuristic, h.pending.is_empty()) {
            reschedules += 1;
            let frame = Frame {
                origin: now,
                fixed: (0..n)
                    .map(|t| match h.completed[t] {
                        Some(f) => Some(FixedTask { start: clock.start[t], finish: f }),
                        None if h.ready.contains(&t) => Some(FixedTask { start: clock.start[t], finish: clock.worst_finish[t] }),
                        None => None,
                    })
                    .collect(),
                fixed_log_reliability: h
                    .ready
                    .iter()
                    .map(|&t| platform::task_log_reliability(p, w.task(t).wc, placement[t].ctx, placement[t].backup))
                    .sum(),
            };
            let mut take = false;
            let mut pending_energy: f64 = h.pending.iter().map(|&t| placement[t].energy(w, p, t)).sum();
            if let Ok(state) = plan(w, p, &frame, heuristic) {
                let no_worse = h.pending.iter().all(|&t| {
                    let old = placement[t].energy(w, p, t);
                    state.task_energy(t) <= old + EPS * old.max(1.0)
                });
                if no_worse {
                    take = true;
                    accepted += 1;
                    for &t in &h.pending {
                        placement[t] = Placement { ctx: state.ctx(t), backup: state.has_backup(t) };
                    }
                    pending_energy = state.energy();
                }
            }
            events.push(TraceEvent {
                time: now,
                kind: EventKind::Reschedule,
                task: w.task(j).id.clone(),
                vm: None,
                frequency: None,
                backup: None,
                energy: pending_energy,
                accepted: Some(take),
            });
        }

        for t in advance_ready(&h, w) {
            dispatch(t, now, &mut h, &mut clock, &placement, &mut events);
        }
    }

    Ok(SimTrace {
        events,
        planned_energy: initial.total_energy,
        realized_energy,
        static_energy,
        makespan: last_finish - w.arrival,
        deadline_met: last_finish <= w.deadline + time_eps(w.deadline),
        success,
        reschedules,
        accepted,
    })
}

/// Monte-Carlo estimate of a schedule's reliability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReliabilityEstimate {
    pub trials: u64,
    pub successes: u64,
    pub estimate: f64,
    /// Wilson 95% interval.
    pub lower: f64,
    pub upper: f64,
    /// Wilson half-width at one standard deviation.
    pub sigma: f64,
}

/// Wilson score interval `(center, half_width)` at `z` standard deviations.
pub fn wilson(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    let n = trials as f64;
    let phat = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (phat + z2 / (2.0 * n)) / denom;
    let half = z / denom * (phat * (1.0 - phat) / n + z2 / (4.0 * n * n)).sqrt();
    (center, half)
}

/// Runs `trials` independent executions of `s` at worst-case durations; a
/// copy fails with probability `1 - exp(-r tau)`, a task fails when all its
/// copies fail, the workflow when any task fails.
pub fn run_monte_carlo(w: &Workflow, p: &Platform, s: &Schedule, trials: u64, seed: u64) -> Result<ReliabilityEstimate, SimError> {
    if trials == 0 {
        return Err(SimError::NoTrials);
    }
    // per task: (probability that one copy survives, copies)
    let tasks: Vec<(f64, u32)> = s
        .entries
        .iter()
        .map(|e| {
            let tau = platform::execution_time(p, w.task(e.task).wc, e.ctx);
            ((-platform::failure_rate(p, e.ctx) * tau).exp(), if e.backup.is_some() { 2 } else { 1 })
        })
        .collect();
    let successes = (0..trials)
        .into_par_iter()
        .filter(|&trial| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(trial);
            tasks.iter().all(|&(ok, copies)| (0..copies).any(|_| rng.random::<f64>() < ok))
        })
        .count() as u64;
    let (lo_c, lo_h) = wilson(successes, trials, 1.959_963_984_540_054);
    let (_, sigma) = wilson(successes, trials, 1.0);
    Ok(ReliabilityEstimate {
        trials,
        successes,
        estimate: successes as f64 / trials as f64,
        lower: (lo_c - lo_h).max(0.0),
        upper: (lo_c + lo_h).min(1.0),
        sigma,
    })
}

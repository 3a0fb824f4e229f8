//! Static schedule synthesis: the fastest-placement admission test (BCP),
//! per-task frequency and replication selection, Largest Energy First,
//! Level-based Deadline Distribution and the fan-out based selector.

mod plan;

pub use plan::{FixedTask, Frame, PlanState, ReplicationLedger, RetDecision, RetOption};

use thiserror::Error;

use crate::platform::{critical_frequency, ExecContext, Platform};
use crate::schedule::{Algorithm, Rejection, Schedule};
use crate::workflow::{compute_levels, compute_time_bounds, max_fanout_ratio, LevelInfo, TimeBounds, Workflow};

/// Default fan-out ratio threshold separating LEF from LDD.
pub const DEFAULT_THRESHOLD: f64 = 0.75;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SchedError {
    #[error("empty window: bound {bound} is not after start {start}")]
    InfeasibleWindow { start: f64, bound: f64 },
    #[error("no unreplicated earlier task is available to back up")]
    NoCandidate,
}

/// Replication decision attached to a task placement.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BackupChoice {
    NoBackup,
    BackupSelf,
    /// Replicate this earlier, unreplicated task instead.
    BackupPrev(usize),
}

/// Heuristic used for placement passes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Heuristic {
    Lef,
    Ldd,
}

impl Heuristic {
    pub fn algorithm(self) -> Algorithm {
        match self {
            Heuristic::Lef => Algorithm::Lef,
            Heuristic::Ldd => Algorithm::Ldd,
        }
    }
}

/// Minimum compute-power x frequency product that finishes `wc` MI between
/// `start` and `bound`.
pub fn min_cpf(wc: f64, start: f64, bound: f64) -> Result<f64, SchedError> {
    if bound <= start {
        return Err(SchedError::InfeasibleWindow { start, bound });
    }
    Ok(wc / (bound - start))
}

/// Cheapest context (energy per MI) whose speed covers `need`.
///
/// Per VM type the lowest adequate level is found by binary search; among
/// that level and the faster ones, the lowest energy per MI wins, ties going
/// to the frequency closest to the critical frequency. `None` when no VM
/// type is fast enough.
pub fn select_context(p: &Platform, need: f64) -> Option<ExecContext> {
    // absorbs rounding in wc / (bound - start)
    let need = need * (1.0 - 1e-12);
    let mut best: Option<(f64, f64, ExecContext)> = None;
    for (l, vm) in p.vm_types.iter().enumerate() {
        let lowest = vm.freqs.partition_point(|&f| vm.cp * f < need);
        let f_cri = critical_frequency(vm);
        for k in lowest..vm.levels() {
            let f = vm.freqs[k];
            let key = (vm.energy_per_mi(f), (f - f_cri).abs(), ExecContext::new(l, k));
            let better = match best {
                None => true,
                Some((e, d, _)) => key.0 < e - 1e-15 || ((key.0 - e).abs() <= 1e-15 && key.1 < d),
            };
            if better {
                best = Some(key);
            }
        }
    }
    best.map(|(_, _, c)| c)
}

/// `current / old_eff * new_eff`, evaluated in log space.
pub fn updated_reliability(current: f64, old_eff: f64, new_eff: f64) -> f64 {
    (current.ln() - old_eff.ln() + new_eff.ln()).exp()
}

/// Effective energy of a placement: the task alone, doubled with its own
/// replica, or plus the energy of the earlier task's replica.
pub fn effective_energy(choice: BackupChoice, task_energy: f64, prev_energy: Option<f64>) -> Result<f64, SchedError> {
    match choice {
        BackupChoice::NoBackup => Ok(task_energy),
        BackupChoice::BackupSelf => Ok(2.0 * task_energy),
        BackupChoice::BackupPrev(_) => prev_energy.map(|e| task_energy + e).ok_or(SchedError::NoCandidate),
    }
}

fn finish_schedule(w: &Workflow, p: &Platform, state: &PlanState<'_>, algorithm: Algorithm) -> Schedule {
    Schedule::from_entries(w, p, state.entries(), algorithm)
}

fn rejected(w: &Workflow, p: &Platform, state: &PlanState<'_>, algorithm: Algorithm, why: Rejection) -> Schedule {
    let mut s = finish_schedule(w, p, state, algorithm);
    s.feasible = false;
    s.rejection = Some(why);
    s
}

/// Every task on the fastest VM at its maximum frequency, replicated in
/// ascending energy order if the reliability requirement demands it.
pub fn bcp_schedule(w: &Workflow, p: &Platform) -> Schedule {
    let mut state = PlanState::fastest(w, p, &Frame::whole(w));
    match state.admit() {
        Ok(()) => finish_schedule(w, p, &state, Algorithm::Bcp),
        Err(why) => rejected(w, p, &state, Algorithm::Bcp, why),
    }
}

/// Level deadline per task: each level receives a share of the window
/// proportional to its work, clamped to `[EFT, LFT]`.
pub fn level_deadlines(w: &Workflow, info: &LevelInfo, bounds: &TimeBounds) -> Vec<f64> {
    let per_level = cumulative_level_deadlines(w.arrival, w.deadline, &info.work, info.total_work);
    (0..w.len())
        .map(|j| per_level[info.level[j] - 1].max(bounds.eft[j]).min(bounds.lft[j]))
        .collect()
}

fn cumulative_level_deadlines(origin: f64, deadline: f64, work: &[f64], total: f64) -> Vec<f64> {
    let mut acc = 0.0;
    work.iter()
        .map(|&w| {
            acc += w;
            origin + (deadline - origin) * (acc / total)
        })
        .collect()
}

/// Level deadlines for the pending tasks of a planning state, measured from
/// its origin. Levels are counted among pending tasks only.
fn pending_level_deadlines(state: &PlanState<'_>) -> Vec<f64> {
    let w = state.workflow();
    let mut level = vec![0usize; w.len()];
    for &j in w.topological() {
        if state.is_pending(j) {
            level[j] = 1 + w.task(j).preds.iter().map(|&r| level[r]).max().unwrap_or(0);
        }
    }
    let depth = level.iter().copied().max().unwrap_or(0);
    let mut work = vec![0.0; depth];
    for j in state.pending() {
        work[level[j] - 1] += w.task(j).wc;
    }
    let total: f64 = work.iter().sum();
    let per_level = cumulative_level_deadlines(state.origin(), w.deadline, &work, total);
    (0..w.len())
        .map(|j| if state.is_pending(j) { per_level[level[j] - 1].max(state.eft(j)).min(state.lft(j)) } else { 0.0 })
        .collect()
}

/// Runs one heuristic over the pending tasks of `frame`. Returns the final
/// planning state, or why the pending set cannot be admitted.
pub fn plan<'a>(w: &'a Workflow, p: &'a Platform, frame: &Frame, heuristic: Heuristic) -> Result<PlanState<'a>, Rejection> {
    let mut state = PlanState::fastest(w, p, frame);
    state.admit()?;
    let by_id = |a: &usize, b: &usize| w.task(*a).id.cmp(&w.task(*b).id);
    match heuristic {
        Heuristic::Lef => {
            let mut order: Vec<usize> = state.pending().collect();
            order.sort_by(|a, b| w.task(*b).wc.total_cmp(&w.task(*a).wc).then_with(|| by_id(a, b)));
            for j in order {
                let bound = state.lft(j);
                state.ret_schedule_task(j, bound);
            }
        }
        Heuristic::Ldd => {
            let delta = pending_level_deadlines(&state);
            let mut order: Vec<usize> = state.pending().collect();
            order.sort_by(|a, b| delta[*a].total_cmp(&delta[*b]).then_with(|| by_id(a, b)));
            for j in order {
                let bound = delta[j].min(state.lft(j));
                state.ret_schedule_task(j, bound);
            }
        }
    }
    if !state.replicate_cheapest() {
        return Err(Rejection::ReliabilityInfeasible);
    }
    debug_assert!(state.meets_deadline());
    Ok(state)
}

fn heuristic_schedule(w: &Workflow, p: &Platform, heuristic: Heuristic) -> Schedule {
    match plan(w, p, &Frame::whole(w), heuristic) {
        Ok(state) => finish_schedule(w, p, &state, heuristic.algorithm()),
        Err(_) => {
            let mut s = bcp_schedule(w, p);
            s.algorithm = heuristic.algorithm();
            s.heuristic = heuristic.algorithm();
            s.feasible = false;
            s
        }
    }
}

/// Largest Energy First: tasks in non-increasing worst-case length (ties by
/// id), each stretched towards its latest finish time.
pub fn lef_schedule(w: &Workflow, p: &Platform) -> Schedule {
    heuristic_schedule(w, p, Heuristic::Lef)
}

/// Level-based Deadline Distribution: tasks in non-decreasing level
/// deadline (ties by id), each stretched towards its level deadline.
pub fn ldd_schedule(w: &Workflow, p: &Platform) -> Schedule {
    heuristic_schedule(w, p, Heuristic::Ldd)
}

/// LEF below the fan-out ratio threshold, LDD at or above it. Single-task
/// workflows use LEF.
pub fn asmfr_select(w: &Workflow, threshold: f64) -> Heuristic {
    match max_fanout_ratio(w) {
        Ok(mfr) if mfr >= threshold => Heuristic::Ldd,
        _ => Heuristic::Lef,
    }
}

pub fn asmfr_schedule(w: &Workflow, p: &Platform, threshold: f64) -> Schedule {
    let heuristic = asmfr_select(w, threshold);
    let mut s = heuristic_schedule(w, p, heuristic);
    s.algorithm = Algorithm::Asmfr;
    s.threshold = Some(threshold);
    s
}

/// Dispatches to the named algorithm; the oracle runs with default limits.
pub fn schedule(w: &Workflow, p: &Platform, algorithm: Algorithm, threshold: f64) -> Schedule {
    match algorithm {
        Algorithm::Bcp => bcp_schedule(w, p),
        Algorithm::Lef => lef_schedule(w, p),
        Algorithm::Ldd => ldd_schedule(w, p),
        Algorithm::Asmfr => asmfr_schedule(w, p, threshold),
        Algorithm::Oracle => crate::oracle::oracle_schedule(w, p),
    }
}

/// Static time bounds and level deadlines together, for reporting.
pub fn static_level_deadlines(w: &Workflow, p: &Platform) -> Vec<f64> {
    level_deadlines(w, &compute_levels(w), &compute_time_bounds(w, p))
}

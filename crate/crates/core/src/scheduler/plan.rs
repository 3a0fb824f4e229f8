//! Mutable planning state shared by BCP, LEF and LDD.
//!
//! A [`PlanState`] covers a set of *pending* tasks to be placed; every
//! other task is fixed by a [`Frame`] (already completed or running).
//! Static scheduling is the special case where nothing is fixed.

use std::collections::VecDeque;

use crate::platform::{self, ExecContext, Platform};
use crate::schedule::{time_eps, Backup, Rejection, ScheduleEntry, EPS};
use crate::workflow::Workflow;

use super::{min_cpf, select_context, BackupChoice};

/// A task whose placement can no longer change.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedTask {
    pub start: f64,
    /// Finish time successors must wait for (worst case for running tasks).
    pub finish: f64,
}

/// What is fixed when a planning pass starts.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    /// Earliest instant a pending task may start.
    pub origin: f64,
    /// Per task: `Some` when fixed, `None` when pending.
    pub fixed: Vec<Option<FixedTask>>,
    /// `ln` of the reliability product that fixed tasks still contribute.
    pub fixed_log_reliability: f64,
}

impl Frame {
    /// Nothing fixed; pending tasks may start at arrival.
    pub fn whole(w: &Workflow) -> Self {
        Self { origin: w.arrival, fixed: vec![None; w.len()], fixed_log_reliability: 0.0 }
    }

    pub fn is_pending(&self, j: usize) -> bool {
        self.fixed[j].is_none()
    }
}

/// Non-replicated tasks decided in this pass, ascending by (wc, id).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ReplicationLedger {
    tasks: Vec<usize>,
}

impl ReplicationLedger {
    pub fn tasks(&self) -> &[usize] {
        &self.tasks
    }

    fn insert(&mut self, w: &Workflow, j: usize) {
        if self.tasks.contains(&j) {
            return;
        }
        let key = |t: usize| (w.task(t).wc, w.task(t).id.as_str());
        let pos = self
            .tasks
            .partition_point(|&t| key(t).0 < key(j).0 || (key(t).0 == key(j).0 && key(t).1 < key(j).1));
        self.tasks.insert(pos, j);
    }

    fn remove(&mut self, j: usize) {
        self.tasks.retain(|&t| t != j);
    }
}

/// One entry of the option list built for a task.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RetOption {
    /// Effective energy of this option.
    pub energy: f64,
    /// `None` keeps the current mapping.
    pub ctx: Option<ExecContext>,
    pub backup: BackupChoice,
    pub log_reliability: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RetDecision {
    pub task: usize,
    pub need: Option<f64>,
    pub candidate: Option<ExecContext>,
    pub options: Vec<RetOption>,
    pub chosen: RetOption,
}

#[derive(Debug, Clone)]
pub struct PlanState<'a> {
    w: &'a Workflow,
    p: &'a Platform,
    origin: f64,
    pending: Vec<bool>,
    decided: Vec<bool>,
    ctx: Vec<ExecContext>,
    backup: Vec<bool>,
    start: Vec<f64>,
    finish: Vec<f64>,
    lft: Vec<f64>,
    task_log_rel: Vec<f64>,
    fixed_log_rel: f64,
    ledger: ReplicationLedger,
    best: ExecContext,
}

impl<'a> PlanState<'a> {
    /// Places every pending task on the fastest context and derives start
    /// times and latest finish times. No replication yet.
    pub fn fastest(w: &'a Workflow, p: &'a Platform, frame: &Frame) -> Self {
        let n = w.len();
        let best = p.best_context();
        let mut s = Self {
            w,
            p,
            origin: frame.origin,
            pending: (0..n).map(|j| frame.is_pending(j)).collect(),
            decided: (0..n).map(|j| !frame.is_pending(j)).collect(),
            ctx: vec![best; n],
            backup: vec![false; n],
            start: vec![frame.origin; n],
            finish: vec![frame.origin; n],
            lft: vec![w.deadline; n],
            task_log_rel: vec![0.0; n],
            fixed_log_rel: frame.fixed_log_reliability,
            ledger: ReplicationLedger::default(),
            best,
        };
        for (j, fixed) in frame.fixed.iter().enumerate() {
            if let Some(f) = fixed {
                s.start[j] = f.start;
                s.finish[j] = f.finish;
            }
        }
        for &j in w.topological() {
            if s.pending[j] {
                s.start[j] = s.earliest_start(j);
                s.finish[j] = s.start[j] + s.tau(j, best);
                s.task_log_rel[j] = platform::task_log_reliability(p, w.task(j).wc, best, false);
            }
        }
        for &j in w.topological().iter().rev() {
            s.lft[j] = s.latest_finish(j);
        }
        s
    }

    pub fn workflow(&self) -> &'a Workflow {
        self.w
    }

    pub fn is_pending(&self, j: usize) -> bool {
        self.pending[j]
    }

    pub fn is_decided(&self, j: usize) -> bool {
        self.decided[j]
    }

    pub fn pending(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.w.len()).filter(|&j| self.pending[j])
    }

    pub fn ctx(&self, j: usize) -> ExecContext {
        self.ctx[j]
    }

    pub fn has_backup(&self, j: usize) -> bool {
        self.backup[j]
    }

    pub fn start(&self, j: usize) -> f64 {
        self.start[j]
    }

    pub fn finish(&self, j: usize) -> f64 {
        self.finish[j]
    }

    pub fn lft(&self, j: usize) -> f64 {
        self.lft[j]
    }

    /// `LST`: the start for decided tasks, `LFT - tau_best` otherwise.
    pub fn lst(&self, j: usize) -> f64 {
        if self.decided[j] {
            self.start[j]
        } else {
            self.lft[j] - self.tau(j, self.best)
        }
    }

    /// Earliest finish on the fastest context from the current start.
    pub fn eft(&self, j: usize) -> f64 {
        self.start[j] + self.tau(j, self.best)
    }

    pub fn ledger(&self) -> &ReplicationLedger {
        &self.ledger
    }

    pub fn origin(&self) -> f64 {
        self.origin
    }

    pub fn log_reliability(&self) -> f64 {
        self.fixed_log_rel + self.pending().map(|j| self.task_log_rel[j]).sum::<f64>()
    }

    /// Reliability of the whole workflow, fixed contributions included.
    pub fn reliability(&self) -> f64 {
        self.log_reliability().exp()
    }

    pub fn meets_reliability(&self) -> bool {
        self.reliability() >= self.w.reliability - EPS
    }

    /// Latest pending finish.
    pub fn latest_finish_time(&self) -> f64 {
        self.pending().map(|j| self.finish[j]).fold(self.origin, f64::max)
    }

    pub fn meets_deadline(&self) -> bool {
        self.latest_finish_time() <= self.w.deadline + time_eps(self.w.deadline)
    }

    pub fn task_energy(&self, j: usize) -> f64 {
        let copies = if self.backup[j] { 2.0 } else { 1.0 };
        copies * platform::task_energy(self.p, self.w.task(j).wc, self.ctx[j])
    }

    /// Effective energy of the pending tasks.
    pub fn energy(&self) -> f64 {
        self.pending().map(|j| self.task_energy(j)).sum()
    }

    fn tau(&self, j: usize, ctx: ExecContext) -> f64 {
        platform::execution_time(self.p, self.w.task(j).wc, ctx)
    }

    fn log_rel(&self, j: usize, ctx: ExecContext, replicated: bool) -> f64 {
        platform::task_log_reliability(self.p, self.w.task(j).wc, ctx, replicated)
    }

    fn earliest_start(&self, j: usize) -> f64 {
        self.w.task(j).preds.iter().map(|&r| self.finish[r]).fold(self.origin, f64::max)
    }

    fn latest_finish(&self, j: usize) -> f64 {
        self.w.task(j).succs.iter().map(|&s| self.lst(s)).fold(self.w.deadline, f64::min)
    }

    /// Replicates pending tasks in ascending order of effective energy
    /// (ties by id) until the requirement holds. Returns whether it does.
    pub fn replicate_cheapest(&mut self) -> bool {
        if self.meets_reliability() {
            return true;
        }
        let mut order: Vec<usize> = self.pending().filter(|&j| !self.backup[j]).collect();
        order.sort_by(|&a, &b| {
            self.task_energy(a)
                .total_cmp(&self.task_energy(b))
                .then_with(|| self.w.task(a).id.cmp(&self.w.task(b).id))
        });
        for j in order {
            self.set_backup(j, true);
            if self.meets_reliability() {
                return true;
            }
        }
        false
    }

    fn set_backup(&mut self, j: usize, on: bool) {
        self.backup[j] = on;
        self.task_log_rel[j] = self.log_rel(j, self.ctx[j], on);
        if on {
            self.ledger.remove(j);
        }
    }

    /// The fastest-placement admission test: deadline first, then
    /// reliability with at most one replica per task.
    pub fn admit(&mut self) -> Result<(), Rejection> {
        if !self.meets_deadline() {
            return Err(Rejection::DeadlineInfeasible);
        }
        if !self.replicate_cheapest() {
            return Err(Rejection::ReliabilityInfeasible);
        }
        Ok(())
    }

    /// Option list for placing `j` on `candidate`, keep-current first.
    pub fn ret_options(&self, j: usize, candidate: Option<ExecContext>) -> Vec<RetOption> {
        let total = self.log_reliability();
        let mut options = vec![RetOption {
            energy: self.task_energy(j),
            ctx: None,
            backup: if self.backup[j] { BackupChoice::BackupSelf } else { BackupChoice::NoBackup },
            log_reliability: total,
        }];
        let Some(c) = candidate else {
            return options;
        };
        let required = self.w.reliability;
        let ok = |log_r: f64| log_r.exp() >= required - EPS;
        let wc = self.w.task(j).wc;
        let e_new = platform::task_energy(self.p, wc, c);
        let without = total - self.task_log_rel[j];

        let plain = without + self.log_rel(j, c, false);
        if ok(plain) {
            options.push(RetOption { energy: e_new, ctx: Some(c), backup: BackupChoice::NoBackup, log_reliability: plain });
            return options;
        }
        let with_self = without + self.log_rel(j, c, true);
        if ok(with_self) {
            options.push(RetOption {
                energy: 2.0 * e_new,
                ctx: Some(c),
                backup: BackupChoice::BackupSelf,
                log_reliability: with_self,
            });
        }
        for &h in self.ledger.tasks() {
            if h == j || self.backup[h] {
                continue;
            }
            let with_prev = plain - self.task_log_rel[h] + self.log_rel(h, self.ctx[h], true);
            if ok(with_prev) {
                let e_prev = platform::task_energy(self.p, self.w.task(h).wc, self.ctx[h]);
                options.push(RetOption {
                    energy: e_new + e_prev,
                    ctx: Some(c),
                    backup: BackupChoice::BackupPrev(h),
                    log_reliability: with_prev,
                });
            }
        }
        options
    }

    /// Places task `j` so that it finishes by `bound` when a cheaper option
    /// exists, otherwise keeps its current mapping; then marks it decided and
    /// propagates start and latest-finish times.
    pub fn ret_schedule_task(&mut self, j: usize, bound: f64) -> RetDecision {
        debug_assert!(self.pending[j] && !self.decided[j]);
        let need = min_cpf(self.w.task(j).wc, self.start[j], bound).ok();
        let candidate = need.and_then(|need| select_context(self.p, need));
        let options = self.ret_options(j, candidate);
        let mut chosen = options[0];
        for o in &options[1..] {
            if o.energy < chosen.energy - EPS {
                chosen = *o;
            }
        }

        if let Some(c) = chosen.ctx {
            self.ctx[j] = c;
            match chosen.backup {
                BackupChoice::NoBackup => {
                    self.set_backup(j, false);
                    self.ledger.insert(self.w, j);
                }
                BackupChoice::BackupSelf => self.set_backup(j, true),
                BackupChoice::BackupPrev(h) => {
                    self.set_backup(j, false);
                    self.set_backup(h, true);
                    self.ledger.insert(self.w, j);
                }
            }
            self.finish[j] = self.start[j] + self.tau(j, c);
        } else if !self.backup[j] {
            self.ledger.insert(self.w, j);
        }
        self.decided[j] = true;
        self.propagate(j);
        RetDecision { task: j, need, candidate, options, chosen }
    }

    /// Pushes start times of undecided descendants forward and pulls latest
    /// finish times of ancestors in, breadth first from `j`.
    fn propagate(&mut self, j: usize) {
        let mut queue: VecDeque<usize> = self.w.task(j).succs.iter().copied().collect();
        while let Some(s) = queue.pop_front() {
            if self.decided[s] {
                continue;
            }
            let st = self.earliest_start(s);
            if st != self.start[s] {
                self.start[s] = st;
                self.finish[s] = st + self.tau(s, self.ctx[s]);
                queue.extend(self.w.task(s).succs.iter().copied());
            }
        }

        let mut queue: VecDeque<usize> = self.w.task(j).preds.iter().copied().collect();
        while let Some(r) = queue.pop_front() {
            if !self.pending[r] {
                continue;
            }
            let lft = self.latest_finish(r);
            if lft != self.lft[r] {
                self.lft[r] = lft;
                if !self.decided[r] {
                    queue.extend(self.w.task(r).preds.iter().copied());
                }
            }
        }
    }

    /// Entries for the pending tasks, ascending by task index.
    pub fn entries(&self) -> Vec<ScheduleEntry> {
        self.pending()
            .map(|j| ScheduleEntry {
                task: j,
                ctx: self.ctx[j],
                start: self.start[j],
                finish: self.finish[j],
                backup: Backup::from_flag(self.backup[j]),
            })
            .collect()
    }
}

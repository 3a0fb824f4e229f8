//! Schedules, their totals, the output document and an independent
//! constraint checker.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::platform::{self, ExecContext, Platform};
use crate::workflow::Workflow;

/// Comparison slack for energies and reliabilities.
pub const EPS: f64 = 1e-9;

/// Slack for comparing instants, scaled to their magnitude.
pub fn time_eps(t: f64) -> f64 {
    1e-9 * t.abs().max(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Bcp,
    Lef,
    Ldd,
    Asmfr,
    Oracle,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Bcp => "bcp",
            Algorithm::Lef => "lef",
            Algorithm::Ldd => "ldd",
            Algorithm::Asmfr => "asmfr",
            Algorithm::Oracle => "oracle",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Backup {
    None,
    /// Concurrent copy on a second instance of the same VM type at the same
    /// frequency; identical start and finish.
    SameFreqReplica,
}

impl Backup {
    pub fn is_some(self) -> bool {
        self == Backup::SameFreqReplica
    }

    pub fn copies(self) -> f64 {
        if self.is_some() {
            2.0
        } else {
            1.0
        }
    }

    pub fn from_flag(replicated: bool) -> Self {
        if replicated {
            Backup::SameFreqReplica
        } else {
            Backup::None
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScheduleEntry {
    pub task: usize,
    pub ctx: ExecContext,
    pub start: f64,
    pub finish: f64,
    pub backup: Backup,
}

impl ScheduleEntry {
    pub fn energy(&self, w: &Workflow, p: &Platform) -> f64 {
        self.backup.copies() * platform::task_energy(p, w.task(self.task).wc, self.ctx)
    }

    pub fn reliability(&self, w: &Workflow, p: &Platform) -> f64 {
        platform::task_reliability(p, w.task(self.task).wc, self.ctx, self.backup.is_some())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rejection {
    /// Even the fastest placement misses the deadline.
    DeadlineInfeasible,
    /// Replicating every task on the fastest placement is not reliable enough.
    ReliabilityInfeasible,
}

impl fmt::Display for Rejection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Rejection::DeadlineInfeasible => "deadline infeasible",
            Rejection::ReliabilityInfeasible => "reliability infeasible",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    /// One entry per task, indexed by task.
    pub entries: Vec<ScheduleEntry>,
    pub total_energy: f64,
    pub reliability: f64,
    pub makespan: f64,
    pub feasible: bool,
    pub rejection: Option<Rejection>,
    pub algorithm: Algorithm,
    /// Heuristic that actually produced the entries (differs from
    /// `algorithm` for ASMFR).
    pub heuristic: Algorithm,
    pub threshold: Option<f64>,
}

impl Schedule {
    /// Builds a schedule and derives its totals. `entries` must be indexed by task.
    pub fn from_entries(w: &Workflow, p: &Platform, entries: Vec<ScheduleEntry>, algorithm: Algorithm) -> Self {
        let total_energy = entries.iter().map(|e| e.energy(w, p)).sum();
        let reliability = platform::workflow_reliability(entries.iter().map(|e| e.reliability(w, p)));
        let makespan = entries.iter().map(|e| e.finish).fold(w.arrival, f64::max) - w.arrival;
        Self {
            entries,
            total_energy,
            reliability,
            makespan,
            feasible: true,
            rejection: None,
            algorithm,
            heuristic: algorithm,
            threshold: None,
        }
    }

    pub fn entry(&self, task: usize) -> &ScheduleEntry {
        &self.entries[task]
    }

    pub fn replicated(&self) -> usize {
        self.entries.iter().filter(|e| e.backup.is_some()).count()
    }

    pub fn to_doc(&self, w: &Workflow, p: &Platform) -> ScheduleDoc {
        let mut tasks: Vec<TaskScheduleDoc> = self
            .entries
            .iter()
            .map(|e| TaskScheduleDoc {
                id: w.task(e.task).id.clone(),
                vm: p.vm(e.ctx).name.clone(),
                frequency: p.freq(e.ctx),
                start: e.start,
                finish: e.finish,
                backup: e.backup.is_some(),
            })
            .collect();
        tasks.sort_by_key(|t| w.index_of(&t.id));
        ScheduleDoc {
            workflow: w.name.clone(),
            algorithm: self.algorithm,
            heuristic: self.heuristic,
            threshold: self.threshold,
            feasible: self.feasible,
            rejection: self.rejection,
            energy: self.total_energy,
            reliability: self.reliability,
            makespan: self.makespan,
            tasks,
        }
    }
}

/// Schedule output document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleDoc {
    pub workflow: String,
    pub algorithm: Algorithm,
    pub heuristic: Algorithm,
    pub threshold: Option<f64>,
    pub feasible: bool,
    pub rejection: Option<Rejection>,
    pub energy: f64,
    pub reliability: f64,
    pub makespan: f64,
    pub tasks: Vec<TaskScheduleDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskScheduleDoc {
    pub id: String,
    pub vm: String,
    pub frequency: f64,
    pub start: f64,
    pub finish: f64,
    pub backup: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Constraint {
    /// `R(W) >= R_w`.
    Reliability,
    /// Successors start after every predecessor finishes.
    Precedence,
    /// `Ft = St + tau` for the chosen context.
    Duration,
    /// Latest finish no later than `D_w`.
    Deadline,
    /// Earliest start no earlier than `A_w`.
    Arrival,
    /// Exactly one entry per task.
    SingleAssignment,
    /// Every entry names an existing (VM, frequency) pair.
    ValidContext,
}

impl Constraint {
    pub const ALL: [Constraint; 7] = [
        Constraint::Reliability,
        Constraint::Precedence,
        Constraint::Duration,
        Constraint::Deadline,
        Constraint::Arrival,
        Constraint::SingleAssignment,
        Constraint::ValidContext,
    ];
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintCheck {
    pub constraint: Constraint,
    pub violators: Vec<String>,
}

impl ConstraintCheck {
    pub fn passed(&self) -> bool {
        self.violators.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintReport {
    pub checks: Vec<ConstraintCheck>,
}

impl ConstraintReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(ConstraintCheck::passed)
    }

    pub fn get(&self, c: Constraint) -> &ConstraintCheck {
        self.checks.iter().find(|k| k.constraint == c).expect("every constraint is checked")
    }

    pub fn failures(&self) -> impl Iterator<Item = &ConstraintCheck> {
        self.checks.iter().filter(|c| !c.passed())
    }
}

/// Re-derives every constraint from the raw entries; the schedule's own
/// totals are not trusted.
pub fn check_constraints(w: &Workflow, p: &Platform, s: &Schedule) -> ConstraintReport {
    let id = |j: usize| w.tasks().get(j).map_or_else(|| format!("#{j}"), |t| t.id.clone());
    let mut checks = Vec::with_capacity(Constraint::ALL.len());

    let mut count = vec![0usize; w.len()];
    let mut by_task: Vec<Option<&ScheduleEntry>> = vec![None; w.len()];
    let mut single = Vec::new();
    for e in &s.entries {
        if e.task >= w.len() {
            single.push(id(e.task));
            continue;
        }
        count[e.task] += 1;
        by_task[e.task].get_or_insert(e);
    }
    single.extend((0..w.len()).filter(|&j| count[j] != 1).map(id));
    checks.push(ConstraintCheck { constraint: Constraint::SingleAssignment, violators: single });

    let valid: Vec<String> =
        s.entries.iter().filter(|e| e.task >= w.len() || !p.is_valid(e.ctx)).map(|e| id(e.task)).collect();
    checks.push(ConstraintCheck { constraint: Constraint::ValidContext, violators: valid });

    let usable: Vec<&ScheduleEntry> =
        by_task.iter().flatten().copied().filter(|e| p.is_valid(e.ctx)).collect();

    let duration = usable
        .iter()
        .filter(|e| {
            let tau = platform::execution_time(p, w.task(e.task).wc, e.ctx);
            (e.finish - (e.start + tau)).abs() > time_eps(e.finish)
        })
        .map(|e| id(e.task))
        .collect();
    checks.push(ConstraintCheck { constraint: Constraint::Duration, violators: duration });

    let mut precedence = Vec::new();
    for &(r, t) in w.edges() {
        if let (Some(a), Some(b)) = (by_task[r], by_task[t]) {
            if b.start < a.finish - time_eps(a.finish) {
                precedence.push(id(t));
            }
        }
    }
    precedence.dedup();
    checks.push(ConstraintCheck { constraint: Constraint::Precedence, violators: precedence });

    let deadline = usable
        .iter()
        .filter(|e| e.finish > w.deadline + time_eps(w.deadline))
        .map(|e| id(e.task))
        .collect();
    checks.push(ConstraintCheck { constraint: Constraint::Deadline, violators: deadline });

    let arrival = usable
        .iter()
        .filter(|e| e.start < w.arrival - time_eps(w.arrival))
        .map(|e| id(e.task))
        .collect();
    checks.push(ConstraintCheck { constraint: Constraint::Arrival, violators: arrival });

    let complete = usable.len() == w.len();
    let rel = platform::workflow_reliability(usable.iter().map(|e| e.reliability(w, p)));
    let reliability = if complete && rel >= w.reliability - EPS {
        Vec::new()
    } else {
        // weakest tasks first
        let mut weak: Vec<(f64, usize)> = usable.iter().map(|e| (e.reliability(w, p), e.task)).collect();
        weak.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let mut v: Vec<String> = weak.into_iter().take(3).map(|(_, j)| id(j)).collect();
        if v.is_empty() {
            v.push(w.name.clone());
        }
        v
    };
    checks.push(ConstraintCheck { constraint: Constraint::Reliability, violators: reliability });

    checks.sort_by_key(|c| Constraint::ALL.iter().position(|k| *k == c.constraint));
    ConstraintReport { checks }
}

//! Exact minimum-energy static scheduling for small instances by
//! depth-first branch and bound over (VM, frequency, replica) choices.
//!
//! Start times are as early as possible: with unlimited instances and no
//! contention an earlier start never hurts either the deadline or the
//! energy. Replicas always share the primary's VM type and frequency.

use serde::Serialize;

use crate::platform::{self, ExecContext, Platform};
use crate::schedule::{time_eps, Algorithm, Backup, Rejection, Schedule, ScheduleEntry, EPS};
use crate::scheduler::bcp_schedule;
use crate::workflow::Workflow;

/// Replica policy reported with every result.
pub const REPLICA_POLICY: &str = "same-frequency";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Assignment {
    pub ctx: ExecContext,
    pub replicated: bool,
}

/// One assignment per task, indexed by task.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AssignmentVector(pub Vec<Assignment>);

impl AssignmentVector {
    pub fn from_schedule(s: &Schedule) -> Self {
        Self(s.entries.iter().map(|e| Assignment { ctx: e.ctx, replicated: e.backup.is_some() }).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub energy: f64,
    pub makespan: f64,
    pub reliability: f64,
    pub feasible: bool,
}

fn asap_entries(w: &Workflow, p: &Platform, a: &AssignmentVector) -> Vec<ScheduleEntry> {
    let mut finish = vec![0.0; w.len()];
    let mut entries: Vec<Option<ScheduleEntry>> = vec![None; w.len()];
    for &j in w.topological() {
        let Assignment { ctx, replicated } = a.0[j];
        let start = w.task(j).preds.iter().map(|&r| finish[r]).fold(w.arrival, f64::max);
        finish[j] = start + platform::execution_time(p, w.task(j).wc, ctx);
        entries[j] = Some(ScheduleEntry { task: j, ctx, start, finish: finish[j], backup: Backup::from_flag(replicated) });
    }
    entries.into_iter().map(|e| e.expect("every task is visited")).collect()
}

fn is_feasible(w: &Workflow, makespan: f64, reliability: f64) -> bool {
    w.arrival + makespan <= w.deadline + time_eps(w.deadline) && reliability >= w.reliability - EPS
}

/// Energy, makespan and reliability of an assignment with as-early-as-possible starts.
///
/// # Panics
/// If the vector's length differs from the task count.
pub fn evaluate_assignment(w: &Workflow, p: &Platform, a: &AssignmentVector) -> Evaluation {
    assert_eq!(a.0.len(), w.len(), "one assignment per task");
    let s = Schedule::from_entries(w, p, asap_entries(w, p, a), Algorithm::Oracle);
    Evaluation {
        energy: s.total_energy,
        makespan: s.makespan,
        reliability: s.reliability,
        feasible: is_feasible(w, s.makespan, s.reliability),
    }
}

/// Schedule realized by an assignment with as-early-as-possible starts.
pub fn assignment_schedule(w: &Workflow, p: &Platform, a: &AssignmentVector) -> Schedule {
    let mut s = Schedule::from_entries(w, p, asap_entries(w, p, a), Algorithm::Oracle);
    s.feasible = is_feasible(w, s.makespan, s.reliability);
    s
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OracleStatus {
    Optimal,
    Infeasible,
    /// Search stopped early; `best` holds the incumbent, if any.
    BudgetExceeded,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleLimits {
    /// Larger workflows are refused without searching.
    pub max_tasks: usize,
    pub node_budget: u64,
    /// Disable to enumerate every leaf (for cross-checking the bounds).
    pub prune: bool,
}

impl Default for OracleLimits {
    fn default() -> Self {
        Self { max_tasks: 8, node_budget: 10_000_000, prune: true }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub best: Option<(AssignmentVector, Schedule)>,
    pub optimal_energy: Option<f64>,
    pub explored: u64,
    pub status: OracleStatus,
    pub replica_policy: &'static str,
}

struct Search<'a> {
    w: &'a Workflow,
    order: Vec<usize>,
    /// Options per task, cheapest first.
    options: Vec<Vec<(Assignment, f64, f64, f64)>>,
    /// Suffix sums over `order` of the cheapest energy and the best
    /// log-reliability.
    energy_tail: Vec<f64>,
    log_rel_tail: Vec<f64>,
    /// Fastest completion time of everything downstream of a task.
    time_tail: Vec<f64>,
    log_required: f64,
    limits: OracleLimits,
    current: Vec<Assignment>,
    finish: Vec<f64>,
    best: Option<(f64, Vec<Assignment>)>,
    explored: u64,
    exhausted: bool,
}

impl Search<'_> {
    fn dfs(&mut self, depth: usize, energy: f64, log_rel: f64) {
        if self.exhausted {
            return;
        }
        if depth == self.order.len() {
            let makespan = self.finish.iter().fold(self.w.arrival, |a, &b| a.max(b)) - self.w.arrival;
            let better = self.best.as_ref().is_none_or(|(e, _)| energy < e - EPS);
            if better && is_feasible(self.w, makespan, log_rel.exp()) {
                self.best = Some((energy, self.current.clone()));
            }
            return;
        }
        let j = self.order[depth];
        let start = self.w.task(j).preds.iter().map(|&r| self.finish[r]).fold(self.w.arrival, f64::max);
        for i in 0..self.options[j].len() {
            if self.explored >= self.limits.node_budget {
                self.exhausted = true;
                return;
            }
            self.explored += 1;
            let (a, e, lr, tau) = self.options[j][i];
            let (energy, log_rel, finish) = (energy + e, log_rel + lr, start + tau);
            if self.limits.prune {
                if let Some((best, _)) = &self.best {
                    if energy + self.energy_tail[depth + 1] >= best - EPS {
                        // options are sorted by energy: the rest cannot do better
                        break;
                    }
                }
                if log_rel + self.log_rel_tail[depth + 1] < self.log_required {
                    continue;
                }
                if finish + self.time_tail[j] > self.w.deadline + time_eps(self.w.deadline) {
                    continue;
                }
            }
            self.current[j] = a;
            self.finish[j] = finish;
            self.dfs(depth + 1, energy, log_rel);
        }
    }
}

/// Minimum-energy feasible assignment, found by exhaustive search with
/// admissible energy, reliability and deadline bounds. Traversal order is
/// deterministic.
pub fn enumerate_optimal(w: &Workflow, p: &Platform, limits: OracleLimits) -> OracleResult {
    let refused = OracleResult {
        best: None,
        optimal_energy: None,
        explored: 0,
        status: OracleStatus::BudgetExceeded,
        replica_policy: REPLICA_POLICY,
    };
    if w.len() > limits.max_tasks {
        return refused;
    }
    let order = w.topological().to_vec();
    let options: Vec<Vec<(Assignment, f64, f64, f64)>> = (0..w.len())
        .map(|j| {
            let wc = w.task(j).wc;
            let mut v: Vec<_> = p
                .contexts()
                .flat_map(|ctx| [false, true].map(|replicated| Assignment { ctx, replicated }))
                .map(|a| {
                    let copies = if a.replicated { 2.0 } else { 1.0 };
                    (
                        a,
                        copies * platform::task_energy(p, wc, a.ctx),
                        platform::task_log_reliability(p, wc, a.ctx, a.replicated),
                        platform::execution_time(p, wc, a.ctx),
                    )
                })
                .collect();
            v.sort_by(|x, y| x.1.total_cmp(&y.1).then(x.0.cmp(&y.0)));
            v
        })
        .collect();
    let mut energy_tail = vec![0.0; w.len() + 1];
    let mut log_rel_tail = vec![0.0; w.len() + 1];
    for d in (0..w.len()).rev() {
        let opts = &options[order[d]];
        energy_tail[d] = energy_tail[d + 1] + opts.iter().map(|o| o.1).fold(f64::INFINITY, f64::min);
        log_rel_tail[d] = log_rel_tail[d + 1] + opts.iter().map(|o| o.2).fold(f64::NEG_INFINITY, f64::max);
    }
    let best_speed = p.best_speed();
    let mut time_tail = vec![0.0; w.len()];
    for &j in order.iter().rev() {
        time_tail[j] =
            w.task(j).succs.iter().map(|&s| w.task(s).wc / best_speed + time_tail[s]).fold(0.0, f64::max);
    }
    // relaxed so rounding in the bound never cuts off a feasible leaf
    let log_required = (w.reliability - EPS).max(f64::MIN_POSITIVE).ln() - 1e-12;

    let mut search = Search {
        w,
        order,
        options,
        energy_tail,
        log_rel_tail,
        time_tail,
        log_required,
        limits,
        current: vec![Assignment { ctx: ExecContext::new(0, 0), replicated: false }; w.len()],
        finish: vec![0.0; w.len()],
        best: None,
        explored: 0,
        exhausted: false,
    };
    search.dfs(0, 0.0, 0.0);

    let status = match (&search.best, search.exhausted) {
        (_, true) => OracleStatus::BudgetExceeded,
        (Some(_), false) => OracleStatus::Optimal,
        (None, false) => OracleStatus::Infeasible,
    };
    let best = search.best.map(|(_, v)| {
        let a = AssignmentVector(v);
        let s = assignment_schedule(w, p, &a);
        (a, s)
    });
    OracleResult {
        optimal_energy: best.as_ref().map(|(_, s)| s.total_energy),
        best,
        explored: search.explored,
        status,
        replica_policy: REPLICA_POLICY,
    }
}

/// The oracle's schedule under default limits. When no feasible assignment
/// is found, the BCP placement is returned marked infeasible.
pub fn oracle_schedule(w: &Workflow, p: &Platform) -> Schedule {
    let result = enumerate_optimal(w, p, OracleLimits::default());
    match result.best {
        Some((_, s)) => s,
        None => {
            let mut s = bcp_schedule(w, p);
            s.algorithm = Algorithm::Oracle;
            s.heuristic = Algorithm::Oracle;
            if s.feasible {
                // BCP admits it, so only the budget can have stopped the search
                s.rejection = None;
            } else if s.rejection.is_none() {
                s.rejection = Some(Rejection::ReliabilityInfeasible);
            }
            s.feasible = false;
            s
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{self, two_vm_platform, vm1_platform, w1};
    use crate::generate::{random_instance, InstanceSpec};
    use crate::platform::VmType;
    use crate::schedule::check_constraints;
    use crate::scheduler::{asmfr_schedule, ldd_schedule, lef_schedule, DEFAULT_THRESHOLD};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn uniform(w: &Workflow, ctx: ExecContext) -> AssignmentVector {
        AssignmentVector(vec![Assignment { ctx, replicated: false }; w.len()])
    }

    #[test]
    fn evaluate_fastest() {
        let w = w1();
        let e = evaluate_assignment(&w, &vm1_platform(), &uniform(&w, ExecContext::new(0, 1)));
        assert_eq!(e.energy, 1246.0);
        assert_eq!(e.makespan, 6.0);
        assert!(e.feasible);
    }

    #[test]
    fn evaluate_lef_assignment() {
        let w = w1();
        let p = two_vm_platform();
        let a = AssignmentVector::from_schedule(&lef_schedule(&w, &p));
        let e = evaluate_assignment(&w, &p, &a);
        assert!((e.energy - 1016.0).abs() < 1e-9);
        assert!(e.makespan <= 10.0);
        assert!(e.feasible);
    }

    #[test]
    fn slowed_critical_task_misses_deadline() {
        let w = w1();
        let mut a = uniform(&w, ExecContext::new(0, 1));
        a.0[w.index_of("t2").unwrap()].ctx = ExecContext::new(1, 1);
        let e = evaluate_assignment(&w, &two_vm_platform(), &a);
        assert!(e.makespan > 10.0);
        assert!(!e.feasible);
    }

    #[test]
    fn w1_optimum_beats_lef() {
        let w = w1();
        let p = vm1_platform();
        let r = enumerate_optimal(&w, &p, OracleLimits::default());
        assert_eq!(r.status, OracleStatus::Optimal);
        assert!(r.optimal_energy.unwrap() <= 1016.0 + 1e-9);
        let (a, s) = r.best.unwrap();
        assert!(evaluate_assignment(&w, &p, &a).feasible);
        assert!(check_constraints(&w, &p, &s).all_passed());
        assert_eq!(r.replica_policy, "same-frequency");
    }

    #[test]
    fn single_task_scan() {
        let w = Workflow::new("one", vec![("a".into(), 8.0)], vec![], 0.0, 100.0, 0.5).unwrap();
        let p = two_vm_platform();
        let r = enumerate_optimal(&w, &p, OracleLimits::default());
        assert!(r.explored <= 8);
        let min = p.contexts().map(|c| platform::task_energy(&p, 8.0, c)).fold(f64::INFINITY, f64::min);
        assert_eq!(r.optimal_energy, Some(min));
    }

    #[test]
    fn unsatisfiable_reliability() {
        let mut vms = vec![fixtures::vm1(), fixtures::vm2()];
        for vm in &mut vms {
            vm.r0 = 1e-2;
        }
        let p = Platform::new(vms).unwrap();
        let w = Workflow::new("one", vec![("a".into(), 8.0)], vec![], 0.0, 100.0, 0.999999).unwrap();
        let r = enumerate_optimal(&w, &p, OracleLimits::default());
        assert_eq!(r.status, OracleStatus::Infeasible);
        assert!(r.best.is_none());
        assert!(!oracle_schedule(&w, &p).feasible);
    }

    #[test]
    fn refuses_large_workflows() {
        let w = fixtures::chain(&[1.0; 9], 100.0);
        let r = enumerate_optimal(&w, &vm1_platform(), OracleLimits::default());
        assert_eq!(r.status, OracleStatus::BudgetExceeded);
        assert_eq!(r.explored, 0);
    }

    #[test]
    fn budget_keeps_incumbent() {
        let w = fixtures::chain(&[8.0; 6], 40.0);
        let limits = OracleLimits { node_budget: 50, prune: false, ..OracleLimits::default() };
        let r = enumerate_optimal(&w, &two_vm_platform(), limits);
        assert_eq!(r.status, OracleStatus::BudgetExceeded);
        assert_eq!(r.explored, 50);
    }

    #[test]
    fn pruned_equals_unpruned() {
        let spec = InstanceSpec { tasks: (1, 5), ..InstanceSpec::default() };
        for seed in 0..100 {
            let (w, p) = random_instance(&mut ChaCha8Rng::seed_from_u64(seed), &spec);
            let fast = enumerate_optimal(&w, &p, OracleLimits::default());
            let full = enumerate_optimal(&w, &p, OracleLimits { prune: false, ..OracleLimits::default() });
            assert_eq!(full.status, fast.status, "seed {seed}");
            match (fast.optimal_energy, full.optimal_energy) {
                (Some(a), Some(b)) => assert!((a - b).abs() <= 1e-9 * b.max(1.0), "seed {seed}: {a} vs {b}"),
                (None, None) => {}
                other => panic!("seed {seed}: {other:?}"),
            }
            assert!(fast.explored <= full.explored);
        }
    }

    #[test]
    fn heuristics_never_beat_the_optimum() {
        for seed in 0..100 {
            let (w, p) = random_instance(&mut ChaCha8Rng::seed_from_u64(seed), &InstanceSpec::default());
            let r = enumerate_optimal(&w, &p, OracleLimits::default());
            let bcp = bcp_schedule(&w, &p);
            assert_eq!(bcp.feasible, r.status == OracleStatus::Optimal, "seed {seed}");
            let Some(opt) = r.optimal_energy else { continue };
            for s in [lef_schedule(&w, &p), ldd_schedule(&w, &p), asmfr_schedule(&w, &p, DEFAULT_THRESHOLD)] {
                assert!(s.total_energy >= opt - 1e-9, "seed {seed}");
            }
            // the all-fastest assignment reproduces the BCP makespan
            let a = uniform(&w, p.best_context());
            assert!((evaluate_assignment(&w, &p, &a).makespan - bcp.makespan).abs() < 1e-9);
            let (_, best) = r.best.unwrap();
            assert!(best.makespan >= bcp.makespan - 1e-9);
        }
    }

    #[test]
    fn single_vm_catalog_matches_bound() {
        let vm = VmType { name: "v".into(), cp: 4.0, alpha: 10.0, beta: 40.0, freqs: vec![0.5, 1.0], r0: 1e-6, psi: 3.0 };
        let p = Platform::new(vec![vm]).unwrap();
        let w = fixtures::chain(&[4.0, 4.0], 4.0);
        let r = enumerate_optimal(&w, &p, OracleLimits::default());
        // both at 0.5: tau 2 each, fills the window exactly
        assert_eq!(r.optimal_energy, Some(2.0 * 2.0 * (10.0 + 40.0 * 0.125)));
    }
}

//! Workflow DAG model: tasks, dependency edges, topological structure,
//! levels, fan-out and the EST/EFT/LST/LFT time bounds.
//!
//! Task lengths are stored in million instructions (MI) and all times are
//! seconds. Multiple roots and sinks are allowed; no virtual entry or exit
//! node is inserted.

use std::collections::{BTreeSet, HashMap, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::platform::Platform;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WorkflowError {
    #[error("schema violation: {0}")]
    Schema(String),
    #[error("duplicate task id `{0}`")]
    DuplicateTask(String),
    #[error("edge {from} -> {to} references an unknown task")]
    DanglingEdge { from: String, to: String },
    #[error("cycle detected through task `{0}`")]
    Cycle(String),
    #[error("task `{id}` has non-positive worst-case length {wc}")]
    NonPositiveLength { id: String, wc: f64 },
    #[error("deadline {deadline} must be later than arrival {arrival}")]
    DeadlineBeforeArrival { arrival: f64, deadline: f64 },
    #[error("reliability requirement {0} outside [0, 1)")]
    ReliabilityOutOfRange(f64),
    #[error("fan-out ratio is undefined for a workflow with {0} task(s)")]
    Degenerate(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Task {
    pub id: String,
    /// Worst-case execution length in MI.
    pub wc: f64,
    /// Predecessor indices, ascending.
    pub preds: Vec<usize>,
    /// Successor indices, ascending.
    pub succs: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Workflow {
    pub name: String,
    pub arrival: f64,
    pub deadline: f64,
    pub reliability: f64,
    tasks: Vec<Task>,
    edges: Vec<(usize, usize)>,
    index: HashMap<String, usize>,
    topo: Vec<usize>,
}

/// Canonical on-disk representation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorkflowDoc {
    pub name: String,
    pub arrival: f64,
    pub deadline: f64,
    pub reliability: f64,
    pub tasks: Vec<TaskDoc>,
    #[serde(default)]
    pub edges: Vec<(String, String)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskDoc {
    pub id: String,
    pub wc: f64,
}

impl Workflow {
    /// Builds and validates a workflow. Duplicate edges are collapsed.
    pub fn new(
        name: impl Into<String>,
        tasks: Vec<(String, f64)>,
        edges: Vec<(String, String)>,
        arrival: f64,
        deadline: f64,
        reliability: f64,
    ) -> Result<Self, WorkflowError> {
        if tasks.is_empty() {
            return Err(WorkflowError::Schema("workflow has no tasks".into()));
        }
        if !arrival.is_finite() || !deadline.is_finite() {
            return Err(WorkflowError::Schema("arrival and deadline must be finite".into()));
        }
        if deadline <= arrival {
            return Err(WorkflowError::DeadlineBeforeArrival { arrival, deadline });
        }
        if !(0.0..1.0).contains(&reliability) {
            return Err(WorkflowError::ReliabilityOutOfRange(reliability));
        }

        let mut index = HashMap::with_capacity(tasks.len());
        let mut built = Vec::with_capacity(tasks.len());
        for (i, (id, wc)) in tasks.into_iter().enumerate() {
            if id.is_empty() {
                return Err(WorkflowError::Schema("empty task id".into()));
            }
            if !(wc > 0.0) || !wc.is_finite() {
                return Err(WorkflowError::NonPositiveLength { id, wc });
            }
            if index.insert(id.clone(), i).is_some() {
                return Err(WorkflowError::DuplicateTask(id));
            }
            built.push(Task { id, wc, preds: Vec::new(), succs: Vec::new() });
        }

        let mut edge_set = BTreeSet::new();
        for (from, to) in edges {
            let (Some(&r), Some(&s)) = (index.get(&from), index.get(&to)) else {
                return Err(WorkflowError::DanglingEdge { from, to });
            };
            if r == s {
                return Err(WorkflowError::Cycle(from));
            }
            edge_set.insert((r, s));
        }
        let edges: Vec<(usize, usize)> = edge_set.into_iter().collect();
        for &(r, s) in &edges {
            built[r].succs.push(s);
            built[s].preds.push(r);
        }
        for t in &mut built {
            t.preds.sort_unstable();
            t.succs.sort_unstable();
        }

        let topo = topological_order(&built)?;
        Ok(Self { name: name.into(), arrival, deadline, reliability, tasks: built, edges, index, topo })
    }

    pub fn from_doc(doc: WorkflowDoc) -> Result<Self, WorkflowError> {
        Self::new(
            doc.name,
            doc.tasks.into_iter().map(|t| (t.id, t.wc)).collect(),
            doc.edges,
            doc.arrival,
            doc.deadline,
            doc.reliability,
        )
    }

    pub fn to_doc(&self) -> WorkflowDoc {
        WorkflowDoc {
            name: self.name.clone(),
            arrival: self.arrival,
            deadline: self.deadline,
            reliability: self.reliability,
            tasks: self.tasks.iter().map(|t| TaskDoc { id: t.id.clone(), wc: t.wc }).collect(),
            edges: self
                .edges
                .iter()
                .map(|&(r, s)| (self.tasks[r].id.clone(), self.tasks[s].id.clone()))
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_doc()).expect("workflow document serializes")
    }

    pub fn len(&self) -> usize {
        self.tasks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tasks.is_empty()
    }

    pub fn tasks(&self) -> &[Task] {
        &self.tasks
    }

    pub fn task(&self, idx: usize) -> &Task {
        &self.tasks[idx]
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    /// Task indices in a deterministic topological order.
    pub fn topological(&self) -> &[usize] {
        &self.topo
    }

    pub fn window(&self) -> f64 {
        self.deadline - self.arrival
    }

    /// Copy with a different deadline and/or reliability requirement.
    pub fn with_constraints(&self, deadline: f64, reliability: f64) -> Result<Self, WorkflowError> {
        if deadline <= self.arrival {
            return Err(WorkflowError::DeadlineBeforeArrival { arrival: self.arrival, deadline });
        }
        if !(0.0..1.0).contains(&reliability) {
            return Err(WorkflowError::ReliabilityOutOfRange(reliability));
        }
        let mut w = self.clone();
        w.deadline = deadline;
        w.reliability = reliability;
        Ok(w)
    }

    /// Critical-path duration when every task runs on the fastest VM at its
    /// maximum frequency.
    pub fn critical_path_time(&self, p: &Platform) -> f64 {
        let speed = p.best_speed();
        let mut finish = vec![0.0_f64; self.len()];
        for &j in &self.topo {
            let start = self.tasks[j].preds.iter().map(|&r| finish[r]).fold(0.0, f64::max);
            finish[j] = start + self.tasks[j].wc / speed;
        }
        finish.into_iter().fold(0.0, f64::max)
    }

    /// Sets `D_w = A_w + df * critical_path_time`.
    pub fn with_deadline_factor(&self, df: f64, p: &Platform) -> Result<Self, WorkflowError> {
        if !(df >= 1.0) {
            return Err(WorkflowError::Schema(format!("deadline factor {df} must be >= 1")));
        }
        self.with_constraints(self.arrival + df * self.critical_path_time(p), self.reliability)
    }

    /// A deadline no assignment can miss: every task at its slowest
    /// context, run back to back.
    pub fn with_unbounded_deadline(&self, p: &Platform) -> Result<Self, WorkflowError> {
        let slowest = p.slowest_speed();
        let max_tau = self.tasks.iter().map(|t| t.wc / slowest).fold(0.0, f64::max);
        self.with_constraints(self.arrival + self.len() as f64 * max_tau, self.reliability)
    }
}

fn topological_order(tasks: &[Task]) -> Result<Vec<usize>, WorkflowError> {
    let mut indeg: Vec<usize> = tasks.iter().map(|t| t.preds.len()).collect();
    let mut ready: VecDeque<usize> = (0..tasks.len()).filter(|&i| indeg[i] == 0).collect();
    let mut order = Vec::with_capacity(tasks.len());
    while let Some(j) = ready.pop_front() {
        order.push(j);
        for &s in &tasks[j].succs {
            indeg[s] -= 1;
            if indeg[s] == 0 {
                ready.push_back(s);
            }
        }
    }
    if order.len() != tasks.len() {
        let stuck = (0..tasks.len()).find(|&i| indeg[i] > 0).expect("some task is on a cycle");
        return Err(WorkflowError::Cycle(tasks[stuck].id.clone()));
    }
    Ok(order)
}

/// Parses the canonical JSON document.
pub fn parse_workflow(document: &str) -> Result<Workflow, WorkflowError> {
    let doc: WorkflowDoc =
        serde_json::from_str(document).map_err(|e| WorkflowError::Schema(e.to_string()))?;
    Workflow::from_doc(doc)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LevelInfo {
    /// Level of each task (1-based), indexed by task.
    pub level: Vec<usize>,
    /// Total work per level; `work[0]` is level 1.
    pub work: Vec<f64>,
    pub total_work: f64,
}

impl LevelInfo {
    pub fn levels(&self) -> usize {
        self.work.len()
    }
}

pub fn compute_levels(w: &Workflow) -> LevelInfo {
    let mut level = vec![0usize; w.len()];
    for &j in w.topological() {
        level[j] = 1 + w.task(j).preds.iter().map(|&r| level[r]).max().unwrap_or(0);
    }
    let depth = level.iter().copied().max().unwrap_or(0);
    let mut work = vec![0.0; depth];
    for (j, t) in w.tasks().iter().enumerate() {
        work[level[j] - 1] += t.wc;
    }
    let total_work = w.tasks().iter().map(|t| t.wc).sum();
    LevelInfo { level, work, total_work }
}

/// EST/EFT/LST/LFT per task (indexed by task), all computed with the
/// fastest-VM, maximum-frequency duration.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeBounds {
    pub est: Vec<f64>,
    pub eft: Vec<f64>,
    pub lst: Vec<f64>,
    pub lft: Vec<f64>,
}

pub fn compute_time_bounds(w: &Workflow, p: &Platform) -> TimeBounds {
    let n = w.len();
    let speed = p.best_speed();
    let tau: Vec<f64> = w.tasks().iter().map(|t| t.wc / speed).collect();

    let mut est = vec![w.arrival; n];
    let mut eft = vec![0.0; n];
    for &j in w.topological() {
        est[j] = w.task(j).preds.iter().map(|&r| eft[r]).fold(w.arrival, f64::max);
        eft[j] = est[j] + tau[j];
    }

    let mut lft = vec![w.deadline; n];
    let mut lst = vec![0.0; n];
    for &j in w.topological().iter().rev() {
        lft[j] = w.task(j).succs.iter().map(|&s| lst[s]).fold(w.deadline, f64::min);
        lst[j] = lft[j] - tau[j];
    }
    TimeBounds { est, eft, lst, lft }
}

/// Largest successor count divided by `N - 1`.
pub fn max_fanout_ratio(w: &Workflow) -> Result<f64, WorkflowError> {
    if w.len() < 2 {
        return Err(WorkflowError::Degenerate(w.len()));
    }
    let d_max = w.tasks().iter().map(|t| t.succs.len()).max().unwrap_or(0);
    Ok(d_max as f64 / (w.len() - 1) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn single_task_document() {
        let w = parse_workflow(
            r#"{"name":"one","arrival":0,"deadline":10,"reliability":0.9,
                "tasks":[{"id":"t1","wc":8}],"edges":[]}"#,
        )
        .unwrap();
        assert_eq!(w.len(), 1);
        assert!(w.edges().is_empty());
    }

    #[test]
    fn w1_shape() {
        let w = fixtures::w1();
        assert_eq!(w.len(), 5);
        assert_eq!(w.edges().len(), 5);
        let t2 = w.index_of("t2").unwrap();
        assert_eq!(w.task(t2).succs.len(), 2);
    }

    #[test]
    fn rejects_cycle() {
        let mut doc = fixtures::w1().to_doc();
        doc.edges.push(("t5".into(), "t1".into()));
        assert!(matches!(Workflow::from_doc(doc), Err(WorkflowError::Cycle(_))));
    }

    #[test]
    fn distinct_diagnostics() {
        let base = || fixtures::w1().to_doc();

        let mut d = base();
        d.tasks.push(TaskDoc { id: "t1".into(), wc: 3.0 });
        assert_eq!(Workflow::from_doc(d), Err(WorkflowError::DuplicateTask("t1".into())));

        let mut d = base();
        d.edges.push(("t1".into(), "ghost".into()));
        assert!(matches!(Workflow::from_doc(d), Err(WorkflowError::DanglingEdge { .. })));

        let mut d = base();
        d.tasks[0].wc = 0.0;
        assert!(matches!(Workflow::from_doc(d), Err(WorkflowError::NonPositiveLength { .. })));

        let mut d = base();
        d.deadline = -1.0;
        assert!(matches!(Workflow::from_doc(d), Err(WorkflowError::DeadlineBeforeArrival { .. })));

        let mut d = base();
        d.reliability = 1.0;
        assert!(matches!(Workflow::from_doc(d), Err(WorkflowError::ReliabilityOutOfRange(_))));

        assert!(matches!(parse_workflow("{\"name\": 3}"), Err(WorkflowError::Schema(_))));
        assert!(matches!(
            parse_workflow(r#"{"name":"x","arrival":0,"deadline":1,"reliability":0.5,"tasks":[{"id":"a","wc":1,"x":2}]}"#),
            Err(WorkflowError::Schema(_))
        ));
    }

    #[test]
    fn self_loop_is_a_cycle() {
        let r = Workflow::new("x", vec![("a".into(), 1.0)], vec![("a".into(), "a".into())], 0.0, 1.0, 0.5);
        assert!(matches!(r, Err(WorkflowError::Cycle(_))));
    }

    #[test]
    fn levels_w1() {
        let w = fixtures::w1();
        let info = compute_levels(&w);
        let lv = |id: &str| info.level[w.index_of(id).unwrap()];
        assert_eq!([lv("t1"), lv("t2"), lv("t3"), lv("t4"), lv("t5")], [1, 2, 3, 3, 4]);
        assert_eq!(info.work, vec![8.0, 24.0, 16.0, 8.0]);
        assert_eq!(info.total_work, 56.0);
    }

    #[test]
    fn levels_single_and_star() {
        let w = Workflow::new("one", vec![("a".into(), 7.0)], vec![], 0.0, 10.0, 0.5).unwrap();
        let info = compute_levels(&w);
        assert_eq!(info.level, vec![1]);
        assert_eq!(info.total_work, 7.0);

        let w2 = fixtures::w2();
        let info = compute_levels(&w2);
        assert_eq!(info.level, vec![1, 2, 2, 2]);
        assert_eq!(info.total_work, 72.0);
    }

    #[test]
    fn time_bounds_w1_on_vm1() {
        let w = fixtures::w1();
        let p = fixtures::vm1_platform();
        let b = compute_time_bounds(&w, &p);
        let ix = |id: &str| w.index_of(id).unwrap();
        let expect = [("t1", 0.0, 1.0), ("t2", 1.0, 4.0), ("t3", 4.0, 5.0), ("t4", 4.0, 5.0), ("t5", 5.0, 6.0)];
        for (id, est, eft) in expect {
            assert_eq!((b.est[ix(id)], b.eft[ix(id)]), (est, eft), "{id}");
        }
        assert_eq!(b.lft[ix("t5")], 10.0);
        assert_eq!(b.lst[ix("t5")], 9.0);
        assert_eq!(b.lft[ix("t3")], 9.0);
        assert_eq!(b.lft[ix("t4")], 9.0);
    }

    #[test]
    fn time_bounds_isolated_task() {
        let w = Workflow::new("one", vec![("a".into(), 8.0)], vec![], 0.0, 10.0, 0.5).unwrap();
        let b = compute_time_bounds(&w, &fixtures::vm1_platform());
        assert_eq!((b.est[0], b.eft[0], b.lst[0], b.lft[0]), (0.0, 1.0, 9.0, 10.0));
    }

    #[test]
    fn fanout_ratios() {
        assert_eq!(max_fanout_ratio(&fixtures::w2()).unwrap(), 1.0);
        assert_eq!(max_fanout_ratio(&fixtures::w1()).unwrap(), 0.5);
        let chain = fixtures::chain(&[1.0, 2.0, 3.0, 4.0, 5.0], 100.0);
        assert_eq!(max_fanout_ratio(&chain).unwrap(), 0.25);
        let one = Workflow::new("one", vec![("a".into(), 1.0)], vec![], 0.0, 1.0, 0.5).unwrap();
        assert_eq!(max_fanout_ratio(&one), Err(WorkflowError::Degenerate(1)));
    }

    #[test]
    fn deadline_factor_scales_critical_path() {
        let w = fixtures::w1();
        let p = fixtures::vm1_platform();
        assert_eq!(w.critical_path_time(&p), 6.0);
        let w = w.with_deadline_factor(1.5, &p).unwrap();
        assert_eq!(w.deadline, 9.0);
    }
}

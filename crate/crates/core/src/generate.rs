//! Random VM catalogs and layered DAG workflows for sweeps and property tests.

use rand::seq::IndexedRandom;
use rand::Rng;

use crate::platform::{Platform, VmType};
use crate::workflow::Workflow;

/// Sampling ranges for a random VM catalog. Integer ranges are inclusive.
#[derive(Debug, Clone, PartialEq)]
pub struct CatalogRanges {
    pub vm_types: (usize, usize),
    pub cp: (f64, f64),
    pub levels: (usize, usize),
    pub psi: (f64, f64),
    /// Sampled log-uniformly.
    pub r0: (f64, f64),
    pub alpha: (f64, f64),
    pub beta: (f64, f64),
    /// Range of the lowest normalized frequency; levels are evenly spaced
    /// from it up to 1.
    pub f_min: (f64, f64),
}

impl Default for CatalogRanges {
    fn default() -> Self {
        Self {
            vm_types: (5, 15),
            cp: (0.9, 210.0),
            levels: (4, 6),
            psi: (3.0, 7.0),
            r0: (1e-6, 1e-4),
            alpha: (20.0, 80.0),
            beta: (50.0, 150.0),
            f_min: (0.2, 0.5),
        }
    }
}

impl CatalogRanges {
    /// Catalogs small enough for exhaustive search: at most three VM types
    /// with at most three levels each.
    pub fn small() -> Self {
        Self { vm_types: (1, 3), cp: (1.0, 10.0), levels: (2, 3), ..Self::default() }
    }
}

fn uniform<R: Rng + ?Sized>(rng: &mut R, (lo, hi): (f64, f64)) -> f64 {
    if hi > lo {
        rng.random_range(lo..hi)
    } else {
        lo
    }
}

fn log_uniform<R: Rng + ?Sized>(rng: &mut R, (lo, hi): (f64, f64)) -> f64 {
    uniform(rng, (lo.ln(), hi.ln())).exp()
}

pub fn random_vm<R: Rng + ?Sized>(rng: &mut R, ranges: &CatalogRanges, name: String) -> VmType {
    let levels = rng.random_range(ranges.levels.0..=ranges.levels.1).max(1);
    let f_min = uniform(rng, ranges.f_min);
    let freqs = if levels == 1 {
        vec![1.0]
    } else {
        let mut f: Vec<f64> = (0..levels).map(|k| f_min + (1.0 - f_min) * k as f64 / (levels - 1) as f64).collect();
        f[levels - 1] = 1.0;
        f
    };
    VmType {
        name,
        cp: uniform(rng, ranges.cp),
        alpha: uniform(rng, ranges.alpha),
        beta: uniform(rng, ranges.beta),
        freqs,
        r0: log_uniform(rng, ranges.r0),
        psi: uniform(rng, ranges.psi),
    }
}

pub fn random_platform<R: Rng + ?Sized>(rng: &mut R, ranges: &CatalogRanges) -> Platform {
    let n = rng.random_range(ranges.vm_types.0..=ranges.vm_types.1).max(1);
    let vms = (0..n).map(|i| random_vm(rng, ranges, format!("vm{}", i + 1))).collect();
    Platform::new(vms).expect("generated catalog is valid")
}

/// Shape of a random layered DAG.
#[derive(Debug, Clone, PartialEq)]
pub struct LayeredSpec {
    pub tasks: usize,
    pub layers: usize,
    /// Probability of each extra edge from the previous layer, on top of
    /// the one predecessor every non-entry task gets. Higher values raise
    /// the fan-out.
    pub edge_prob: f64,
    pub wc: (f64, f64),
}

impl Default for LayeredSpec {
    fn default() -> Self {
        Self { tasks: 50, layers: 6, edge_prob: 0.2, wc: (10.0, 1000.0) }
    }
}

/// Task ids `t01 .. tNN`, zero padded so lexicographic order is numeric.
fn task_id(i: usize, n: usize) -> String {
    let width = n.to_string().len();
    format!("t{:0width$}", i + 1)
}

/// Random layered DAG with arrival 0, deadline 1 and reliability 0.9; set
/// the real constraints with [`Workflow::with_constraints`] or
/// [`Workflow::with_deadline_factor`].
pub fn layered_workflow<R: Rng + ?Sized>(rng: &mut R, spec: &LayeredSpec, name: &str) -> Workflow {
    let n = spec.tasks.max(1);
    let layers = spec.layers.clamp(1, n);
    // every layer gets one task, the rest are spread at random
    let mut layer_of: Vec<usize> = (0..layers).collect();
    layer_of.extend((layers..n).map(|_| rng.random_range(0..layers)));
    layer_of.sort_unstable();
    let members: Vec<Vec<usize>> = (0..layers).map(|l| (0..n).filter(|&i| layer_of[i] == l).collect()).collect();

    let tasks: Vec<(String, f64)> = (0..n).map(|i| (task_id(i, n), uniform(rng, spec.wc))).collect();
    let mut edges = Vec::new();
    for l in 1..layers {
        let prev = &members[l - 1];
        for &t in &members[l] {
            let first = *prev.choose(rng).expect("layers are non-empty");
            for &r in prev {
                if r == first || rng.random_bool(spec.edge_prob.clamp(0.0, 1.0)) {
                    edges.push((tasks[r].0.clone(), tasks[t].0.clone()));
                }
            }
        }
    }
    Workflow::new(name, tasks, edges, 0.0, 1.0, 0.9).expect("generated workflow is valid")
}

/// Random small instances as used by exhaustive-search comparisons.
#[derive(Debug, Clone, PartialEq)]
pub struct InstanceSpec {
    pub tasks: (usize, usize),
    pub catalog: CatalogRanges,
    pub deadline_factors: Vec<f64>,
    pub reliabilities: Vec<f64>,
    pub wc: (f64, f64),
    pub edge_prob: f64,
}

impl Default for InstanceSpec {
    fn default() -> Self {
        Self {
            tasks: (2, 6),
            catalog: CatalogRanges::small(),
            deadline_factors: vec![1.2, 1.5, 2.0],
            reliabilities: vec![0.9, 0.99],
            wc: (1.0, 20.0),
            edge_prob: 0.3,
        }
    }
}

/// A random workflow and catalog, with the deadline set from a sampled
/// deadline factor.
pub fn random_instance<R: Rng + ?Sized>(rng: &mut R, spec: &InstanceSpec) -> (Workflow, Platform) {
    let platform = random_platform(rng, &spec.catalog);
    let n = rng.random_range(spec.tasks.0..=spec.tasks.1).max(1);
    let layers = rng.random_range(1..=n);
    let shape = LayeredSpec { tasks: n, layers, edge_prob: spec.edge_prob, wc: spec.wc };
    let w = layered_workflow(rng, &shape, "random");
    let df = *spec.deadline_factors.choose(rng).unwrap_or(&1.5);
    let rw = *spec.reliabilities.choose(rng).unwrap_or(&0.9);
    let w = w
        .with_constraints(1.0, rw)
        .and_then(|w| w.with_deadline_factor(df, &platform))
        .expect("sampled constraints are valid");
    (w, platform)
}

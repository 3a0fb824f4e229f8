//! Small hand-checkable instances used by tests, examples and the CLI docs.
//!
//! The DAG shapes of `w1` and `w2` are reconstructions: they are inferred
//! from the completion-time arithmetic of the two-VM worked example (task
//! lengths 8/24/8/8/8 and 24/16/16/16 MI) rather than taken from a drawn
//! graph.

use crate::platform::{Platform, VmType};
use crate::workflow::Workflow;

/// Relaxed reliability requirement for the worked examples.
pub const LOOSE_RELIABILITY: f64 = 0.5;

fn owned(pairs: &[(&str, f64)]) -> Vec<(String, f64)> {
    pairs.iter().map(|&(id, wc)| (id.to_string(), wc)).collect()
}

fn edges(pairs: &[(&str, &str)]) -> Vec<(String, String)> {
    pairs.iter().map(|&(a, b)| (a.to_string(), b.to_string())).collect()
}

/// Chain-diamond: t1 -> t2 -> {t3, t4} -> t5, deadline 10.
pub fn w1() -> Workflow {
    Workflow::new(
        "W1",
        owned(&[("t1", 8.0), ("t2", 24.0), ("t3", 8.0), ("t4", 8.0), ("t5", 8.0)]),
        edges(&[("t1", "t2"), ("t2", "t3"), ("t2", "t4"), ("t3", "t5"), ("t4", "t5")]),
        0.0,
        10.0,
        LOOSE_RELIABILITY,
    )
    .expect("fixture is valid")
}

/// Star: t1 -> {t2, t3, t4}, deadline 8.
pub fn w2() -> Workflow {
    Workflow::new(
        "W2",
        owned(&[("t1", 24.0), ("t2", 16.0), ("t3", 16.0), ("t4", 16.0)]),
        edges(&[("t1", "t2"), ("t1", "t3"), ("t1", "t4")]),
        0.0,
        8.0,
        LOOSE_RELIABILITY,
    )
    .expect("fixture is valid")
}

/// Linear chain `c1 -> c2 -> ...` with the given lengths, arrival 0.
pub fn chain(lengths: &[f64], deadline: f64) -> Workflow {
    let tasks: Vec<(String, f64)> =
        lengths.iter().enumerate().map(|(i, &wc)| (format!("c{}", i + 1), wc)).collect();
    let edges = (1..lengths.len()).map(|i| (format!("c{i}"), format!("c{}", i + 1))).collect();
    Workflow::new("chain", tasks, edges, 0.0, deadline, LOOSE_RELIABILITY).expect("fixture is valid")
}

pub fn vm1() -> VmType {
    VmType { name: "VM1".into(), cp: 8.0, alpha: 50.0, beta: 128.0, freqs: vec![0.5, 1.0], r0: 1e-6, psi: 3.0 }
}

pub fn vm2() -> VmType {
    VmType { name: "VM2".into(), cp: 2.0, alpha: 40.0, beta: 64.0, freqs: vec![0.5, 1.0], r0: 1e-6, psi: 3.0 }
}

pub fn vm1_platform() -> Platform {
    Platform::new(vec![vm1()]).expect("fixture is valid")
}

/// VM1 (cp 8) and VM2 (cp 2), both with levels {0.5, 1}.
pub fn two_vm_platform() -> Platform {
    Platform::new(vec![vm1(), vm2()]).expect("fixture is valid")
}

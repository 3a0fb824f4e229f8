//! The shipped data files load and reproduce the in-code fixtures.

use std::path::{Path, PathBuf};

use relsched_core::dax::{parse_dax, DaxDefaults};
use relsched_core::dynamic::{run_dynamic, SimConfig};
use relsched_core::fixtures;
use relsched_core::schedule::check_constraints;
use relsched_core::scheduler::{asmfr_schedule, bcp_schedule, ldd_schedule, lef_schedule, DEFAULT_THRESHOLD};
use relsched_core::workflow::{max_fanout_ratio, parse_workflow};
use relsched_core::{Algorithm, Platform, Workflow};

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

fn workflow(name: &str) -> Workflow {
    parse_workflow(&std::fs::read_to_string(data(name)).unwrap()).unwrap()
}

fn montage(df: f64, p: &Platform) -> Workflow {
    let text = std::fs::read_to_string(data("montage-50.dax")).unwrap();
    let defaults = DaxDefaults { deadline_factor: df, ..DaxDefaults::default() };
    parse_dax(&text, "montage-50", &defaults, p).unwrap()
}

#[test]
fn json_fixtures_match_code() {
    assert_eq!(workflow("w1.json"), fixtures::w1());
    assert_eq!(workflow("w2.json"), fixtures::w2());
    assert_eq!(Platform::load(&data("vm1.json")).unwrap(), fixtures::vm1_platform());
    assert_eq!(Platform::load(&data("two-vm.json")).unwrap(), fixtures::two_vm_platform());
}

#[test]
fn worked_examples_from_files() {
    let p = Platform::load(&data("vm1.json")).unwrap();
    let w1 = workflow("w1.json");
    let w2 = workflow("w2.json");
    assert!((lef_schedule(&w1, &p).total_energy - 1016.0).abs() < 1e-6);
    assert!((ldd_schedule(&w1, &p).total_energy - 1108.0).abs() < 1e-6);
    assert!((lef_schedule(&w2, &p).total_energy - 1464.0).abs() < 1e-6);
    assert!((ldd_schedule(&w2, &p).total_energy - 1326.0).abs() < 1e-6);
    let s = bcp_schedule(&w1, &p);
    assert!((s.total_energy - 1246.0).abs() < 1e-6 && (s.makespan - 6.0).abs() < 1e-12);
}

#[test]
fn desk_catalog_loads() {
    let p = Platform::load(&data("desk.toml")).unwrap();
    assert_eq!(p.len(), 5);
    assert_eq!(p.best_speed(), 210.0);
    for vm in &p.vm_types {
        assert!((0.9..=210.0).contains(&vm.cp));
        assert!((4..=6).contains(&vm.levels()));
        assert!((3.0..=7.0).contains(&vm.psi));
        assert!((1e-6..=1e-4).contains(&vm.r0));
    }
}

#[test]
fn montage_imports_with_deadline_factor() {
    let p = Platform::load(&data("desk.toml")).unwrap();
    let w = montage(1.2, &p);
    assert_eq!(w.len(), 50);
    let cp = w.critical_path_time(&p);
    assert!((w.deadline - w.arrival - 1.2 * cp).abs() < 1e-9 * cp);
    assert!(w.tasks().iter().all(|t| t.wc > 0.0));
    // mDiffFit fan-out makes it a high-MFR workflow
    assert!(max_fanout_ratio(&w).unwrap() > 0.0);
}

#[test]
fn montage_schedules_pass_constraints() {
    let p = Platform::load(&data("desk.toml")).unwrap();
    for df in [1.2, 1.5, 2.0] {
        let w = montage(df, &p);
        let bcp = bcp_schedule(&w, &p);
        assert!(bcp.feasible);
        for s in [lef_schedule(&w, &p), ldd_schedule(&w, &p), asmfr_schedule(&w, &p, DEFAULT_THRESHOLD)] {
            assert!(s.feasible, "{} infeasible at df {df}", s.algorithm);
            assert!(check_constraints(&w, &p, &s).all_passed());
            assert!(s.total_energy <= bcp.total_energy + 1e-9);
        }
    }
}

#[test]
fn montage_dynamic_runs_dominate() {
    let p = Platform::load(&data("desk.toml")).unwrap();
    let w = montage(1.5, &p);
    let s = asmfr_schedule(&w, &p, DEFAULT_THRESHOLD);
    assert_eq!(s.algorithm, Algorithm::Asmfr);
    for seed in 0..5 {
        let t = run_dynamic(&w, &p, &s, &SimConfig::new(seed)).unwrap();
        assert!(t.deadline_met);
        assert!(t.realized_energy <= t.static_energy + 1e-9);
        assert!(t.realized_energy < t.planned_energy);
    }
}

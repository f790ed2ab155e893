//! Acceptance criteria, one scenario file each under `scenarios/`.
//!
//! Every test prints one `PASS`/`FAIL` line with the measured quantities and
//! wall time, then asserts. The criteria run one at a time so that the
//! reported times are not inflated by each other.

use std::path::PathBuf;
use std::sync::Mutex;
use std::time::Instant;

use alrh::harness::{run_scenario, Scenario};

fn scenario_path(file: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(file)
}

static SERIAL: Mutex<()> = Mutex::new(());

fn criterion(id: u32, file: &str, budget_s: f64) {
    let _guard = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let sc = Scenario::load(&scenario_path(file)).expect("scenario loads");
    let out = std::env::temp_dir().join(format!("alrh-acceptance-{}-{id}", std::process::id()));
    let start = Instant::now();
    let report = run_scenario(&sc, Some(&out));
    let secs = start.elapsed().as_secs_f64();
    let _ = std::fs::remove_dir_all(&out);
    let report = match report {
        Ok(r) => r,
        Err(e) => {
            println!("criterion {id:>2} FAIL {}: error: {e}", sc.name);
            panic!("criterion {id} errored: {e}");
        }
    };
    let within = secs < budget_s;
    for o in &report.criteria {
        println!(
            "criterion {id:>2} {} {}: {} [{secs:.1} s, budget {budget_s} s{}]",
            if o.passed && within { "PASS" } else { "FAIL" },
            sc.name,
            o.detail,
            if within { "" } else { ", over budget" }
        );
    }
    assert!(report.passed, "criterion {id} failed: {:?}", report.lines());
    assert!(within, "criterion {id} took {secs:.1} s, budget {budget_s} s");
}

#[test]
fn c01_conservation() {
    criterion(1, "c01_conservation.json", 30.0);
}

#[test]
fn c02_scattering_identity() {
    criterion(2, "c02_scattering_identity.json", 5.0);
}

#[test]
fn c03_single_site() {
    criterion(3, "c03_single_site.json", 1.0);
}

#[test]
fn c04_soliton_consistency() {
    criterion(4, "c04_soliton_consistency.json", 60.0);
}

#[test]
fn c05_round_trip() {
    criterion(5, "c05_round_trip.json", 30.0);
}

#[test]
fn c06_beals_coifman() {
    criterion(6, "c06_beals_coifman.json", 60.0);
}

#[test]
fn c07_t_function() {
    criterion(7, "c07_t_function.json", 10.0);
}

#[test]
fn c08_vandermonde() {
    criterion(8, "c08_vandermonde.json", 5.0);
}

#[test]
fn c09_pc_model() {
    criterion(9, "c09_pc_model.json", 10.0);
}

#[test]
fn c10_region_decay() {
    criterion(10, "c10_region_decay.json", 900.0);
}

#[test]
fn c11_region_residual() {
    criterion(11, "c11_region_residual.json", 1200.0);
}

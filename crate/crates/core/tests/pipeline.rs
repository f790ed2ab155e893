use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use alrh::harness::io;
use alrh::harness::{run_scenario, Check, Scenario};
use alrh::lattice::evolve;
use alrh::rhsolver::{reconstruct_q, ContourOptions};
use alrh::scattering::{extract_spectrum, ExactScattering};
use alrh::soliton::{pole_removal, soliton_field, RationalRemover};
use alrh::spectrum::{DiscreteSpectrum, Pole};
use alrh::{LatticeState, C64};

fn temp_dir(tag: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("alrh-pipeline-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&d);
    std::fs::create_dir_all(&d).unwrap();
    d
}

fn read_all(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
        })
        .collect()
}

const SMALL: &str = r#"{
    "name": "small",
    "initial": {"kind": "pulse", "amplitude": 0.2, "width": 3},
    "t_grid": {"kind": "log", "start": 2, "end": 12, "points": 6},
    "rays": [0.4],
    "dt": 0.01,
    "checks": [
        {"kind": "conservation", "tol": 1e-8},
        {"kind": "scattering_identity", "grid_points": 128, "tol": 1e-10},
        {"kind": "residual", "max_exponent": 10, "envelope_t": 12, "envelope_tol": 10}
    ],
    "outputs": {"initial": true, "observables": true, "scattering": true, "rays": true}
}"#;

#[test]
fn identical_scenarios_give_identical_files() {
    let sc = Scenario::from_json(SMALL).unwrap();
    let (a, b) = (temp_dir("det-a"), temp_dir("det-b"));
    run_scenario(&sc, Some(&a)).unwrap();
    run_scenario(&sc, Some(&b)).unwrap();
    let (fa, fb) = (read_all(&a), read_all(&b));
    let names: Vec<&str> = fa.keys().map(String::as_str).collect();
    assert_eq!(
        names,
        ["initial.csv", "observables.csv", "ray_+0.400.csv", "report.json", "scattering.csv", "scattering.json"]
    );
    assert_eq!(fa, fb);
    let ray = String::from_utf8(fa["ray_+0.400.csv"].clone()).unwrap();
    assert_eq!(ray.lines().nth(1).unwrap(), "t,n,re_pred,im_pred,re_sim,im_sim,abs_err");
    assert_eq!(ray.lines().count(), 2 + 6);
    std::fs::remove_dir_all(a).unwrap();
    std::fs::remove_dir_all(b).unwrap();
}

#[test]
fn csv_initial_data_resolves_relative_to_the_scenario() {
    let dir = temp_dir("csv");
    let q = LatticeState::from_fn(-5, 5, 0.0, |n| C64::new(0.1 / (1.0 + (n * n) as f64), 0.02 * n as f64)).unwrap();
    io::write_state(io::create(&dir.join("data/q.csv")).unwrap(), &q).unwrap();
    let text = r#"{"name": "from_csv", "initial": {"kind": "csv", "path": "data/q.csv"},
        "checks": [{"kind": "scattering_identity", "grid_points": 256, "tol": 1e-12}]}"#;
    std::fs::write(dir.join("s.json"), text).unwrap();
    let sc = Scenario::load(&dir.join("s.json")).unwrap();
    assert_eq!(sc.initial_state().unwrap().q, q.q);
    assert!(run_scenario(&sc, None).unwrap().passed);
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn one_soliton_scenario_reports_sup_error() {
    let sc = Scenario::from_json(
        r#"{"name": "one_soliton",
            "initial": {"kind": "soliton", "poles": [{"re": 0.4, "im": 1.3, "order": 1, "betas": [[0.5, 0.5]]}],
                        "n_min": -96, "n_max": 96},
            "t_grid": {"kind": "explicit", "values": [2.0]},
            "checks": [{"kind": "soliton_consistency", "residual_dt": 1e-4, "tol_residual": 1e-6, "tol_sup": 1e-6}]}"#,
    )
    .unwrap();
    let r = run_scenario(&sc, None).unwrap();
    assert!(r.passed, "{:?}", r.lines());
    assert!(r.criteria[0].metrics["sup_error"] < 1e-6);
}

#[test]
fn outside_the_light_cone_decays_fast() {
    let sc = Scenario::from_json(
        r#"{"name": "cone", "initial": {"kind": "pulse", "amplitude": 0.1, "width": 4},
            "t_grid": {"kind": "log", "start": 10, "end": 60, "points": 8}, "rays": [-1.5], "dt": 0.005,
            "checks": [{"kind": "decay", "max_exponent": -0.7, "min_r_squared": 0.0}]}"#,
    )
    .unwrap();
    let r = run_scenario(&sc, None).unwrap();
    let fit = r.criteria[0].fits[0].fit.unwrap();
    assert!(fit.exponent <= -0.7, "{fit:?}");
}

#[test]
fn rays_in_the_transition_buffer_are_rejected() {
    let text = SMALL.replace("\"rays\": [0.4]", "\"rays\": [0.97]");
    assert!(Scenario::from_json(&text).is_err());
    let sc = Scenario::from_json(SMALL).unwrap();
    assert!(matches!(sc.checks[2], Check::Residual { .. }));
}

/// Direct transform, time-evolved inverse transform and lattice integration
/// agree at `t > 0`.
#[test]
fn inverse_transform_tracks_the_lattice() {
    let t = 3.0;
    let q0 = LatticeState::from_fn(-12, 12, 0.0, |n| {
        let x = n as f64 / 2.5;
        C64::new(0.25 * (-x * x).exp(), 0.1 * x * (-x * x).exp())
    })
    .unwrap();
    assert!(extract_spectrum(&q0, 1.0 + 1e-3, 50.0).unwrap().is_empty());
    let mut sim = LatticeState::from_fn(-80, 80, 0.0, |n| q0.at(n)).unwrap();
    evolve(&mut sim, t, 1e-3, |_, _| Ok(())).unwrap();
    let model = ExactScattering { state: q0 };
    for n in [-6, -1, 0, 4, 9] {
        let rep = reconstruct_q(&model, &RationalRemover::empty(), n, t, ContourOptions::default()).unwrap();
        assert!((rep.q - sim.at(n)).norm() < 1e-8, "n={n}: {} vs {}", rep.q, sim.at(n));
    }
}

#[test]
fn inverse_transform_with_a_soliton_tracks_the_formula() {
    let spec = DiscreteSpectrum::new(vec![Pole::simple(C64::new(-0.5, 1.6), C64::new(1.2, 0.4))]).unwrap();
    let q0 = alrh::soliton::soliton_state(&spec, -40, 40, 0.0).unwrap();
    let found = extract_spectrum(&q0, 1.0 + 1e-3, 50.0).unwrap();
    assert_eq!(found.len(), 1);
    let model = ExactScattering { state: q0 };
    let remover = pole_removal(&model, &found).unwrap();
    let want = soliton_field(&spec, -3, 3, 2.0).unwrap();
    for (k, n) in (-3..=3).enumerate() {
        let rep = reconstruct_q(&model, &remover, n, 2.0, ContourOptions::default()).unwrap();
        assert!((rep.q - want[k]).norm() < 1e-7, "n={n}: {} vs {}", rep.q, want[k]);
    }
}

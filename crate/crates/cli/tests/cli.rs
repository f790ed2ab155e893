use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn alrh(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_alrh")).arg("--out-dir").arg(out).args(args).output().expect("binary runs")
}

fn scenarios() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

fn data_rows(path: &Path) -> Vec<Vec<f64>> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect()
}

fn header(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap().lines().find(|l| !l.starts_with('#')).unwrap().to_string()
}

fn write_pulse(path: &Path) {
    let mut text = String::from("n,re,im\n");
    for n in -12i32..=12 {
        let x = n as f64 / 3.0;
        text += &format!("{n},{},{}\n", 0.2 * (-x * x).exp(), 0.05 * x * (-x * x).exp());
    }
    std::fs::write(path, text).unwrap();
}

#[test]
fn scatter_then_invert() {
    let dir = tempfile::tempdir().unwrap();
    let q = dir.path().join("q.csv");
    write_pulse(&q);
    let o = alrh(dir.path(), &["scatter", "--initial", q.to_str().unwrap(), "--grid", "512"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = dir.path().join("scattering.csv");
    assert_eq!(header(&csv), "theta,re_a,im_a,re_b,im_b,re_r,im_r");
    assert_eq!(data_rows(&csv).len(), 512);
    let side: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("scattering.json")).unwrap()).unwrap();
    assert_eq!(side["schema_version"], 1);
    assert_eq!(side["poles"].as_array().unwrap().len(), 0);

    let o = alrh(dir.path(), &["rh-solve", "--scattering", csv.to_str().unwrap(), "--n", "-3", "--t", "0"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rep: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let x = -1.0f64;
    let want = (0.2 * (-x * x).exp(), 0.05 * x * (-x * x).exp());
    let got = (rep["q"][0].as_f64().unwrap(), rep["q"][1].as_f64().unwrap());
    assert!((got.0 - want.0).abs() < 1e-8 && (got.1 - want.1).abs() < 1e-8, "{got:?} vs {want:?}");

    let o = alrh(
        dir.path(),
        &["asymptotics", "--scattering", csv.to_str().unwrap(), "--ray", "xi=0.4", "--t-grid", "5:20:5", "--simulate", q.to_str().unwrap(), "--dt", "0.01", "--dump-t"],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let a = dir.path().join("asymptotics.csv");
    assert_eq!(header(&a), "t,n,re_pred,im_pred,re_sim,im_sim,abs_err");
    let rows = data_rows(&a);
    assert_eq!(rows.len(), 5);
    assert_eq!(rows[4][1], 16.0);
    assert!(rows.iter().all(|r| r[6].is_finite() && r[4].is_finite()));
    let t = dir.path().join("t_function.csv");
    assert_eq!(header(&t), "re_lambda,im_lambda,re_T,im_T");
    assert!(!data_rows(&t).is_empty());
}

#[test]
fn soliton_from_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let poles = dir.path().join("poles.json");
    std::fs::write(&poles, r#"{"schema_version": 1, "poles": [{"re": 0.0, "im": 1.5, "order": 1, "betas": [[1.0, 0.0]]}]}"#).unwrap();
    let o = alrh(dir.path(), &["soliton", "--poles", poles.to_str().unwrap(), "--n-range", "-5:5", "--t", "0.5"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let f = dir.path().join("soliton.csv");
    assert_eq!(header(&f), "n,re_q,im_q");
    let rows = data_rows(&f);
    assert_eq!(rows.len(), 11);
    assert_eq!((rows[0][0], rows[10][0]), (-5.0, 5.0));
    assert!(rows.iter().any(|r| r[1].hypot(r[2]) > 0.1));
}

#[test]
fn simulate_writes_trajectory_and_observables() {
    let dir = tempfile::tempdir().unwrap();
    let q = dir.path().join("q.csv");
    write_pulse(&q);
    let o = alrh(dir.path(), &["simulate", "--initial", q.to_str().unwrap(), "--t-final", "1", "--dt", "0.01", "--stride", "50"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(header(&dir.path().join("trajectory.csv")), "t,n,re,im");
    let obs = data_rows(&dir.path().join("observables.csv"));
    assert_eq!(obs.len(), 3);
    assert!((obs[2][1] / obs[0][1] - 1.0).abs() < 1e-10);
}

#[test]
fn verify_region_and_pc_check() {
    let dir = tempfile::tempdir().unwrap();
    let o = alrh(dir.path(), &["verify-region", "--xi", "0.3"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["region"], "I");
    let o = alrh(dir.path(), &["verify-region", "--n", "-300", "--t", "100"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["region"], "II");

    let o = alrh(dir.path(), &["pc-check", "--tau", "1,0", "--radius", "20", "--points", "8"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let f = dir.path().join("pc_check.csv");
    assert_eq!(header(&f), "kind,index,re_zeta,im_zeta,residual");
    let text = std::fs::read_to_string(&f).unwrap();
    let worst_jump = text
        .lines()
        .filter(|l| l.starts_with("jump"))
        .map(|l| l.rsplit(',').next().unwrap().parse::<f64>().unwrap())
        .fold(0.0, f64::max);
    assert!(worst_jump < 1e-8, "{worst_jump:e}");
}

#[test]
fn run_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let pass = scenarios().join("c03_single_site.json");
    let o = alrh(dir.path(), &["run", pass.to_str().unwrap(), scenarios().join("c08_vandermonde.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert_eq!(stdout.lines().filter(|l| l.contains("PASS")).count(), 2);
    assert!(dir.path().join("c03_single_site/report.json").exists());

    let tight = dir.path().join("tight.json");
    std::fs::write(&tight, r#"{"name": "tight", "checks": [{"kind": "single_site", "grid_points": 64, "tol": 0}]}"#).unwrap();
    let o = alrh(dir.path(), &["run", tight.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stdout).contains("FAIL single_site"));

    let o = alrh(dir.path(), &["run", dir.path().join("missing.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

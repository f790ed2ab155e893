//! `alrh`: command-line front end for the Ablowitz–Ladik toolkit.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use alrh::asympt::{predict, AsymptOptions, IndexShift};
use alrh::harness::checks::sample_rays;
use alrh::harness::io::{self, RayRow};
use alrh::harness::scenario::{pad, window_half_width};
use alrh::harness::{run_scenario, Report, Scenario};
use alrh::lattice::{integrate_with, IntegrateOptions};
use alrh::phase::{classify_region, classify_xi, DELTA_TRANS};
use alrh::rhsolver::{reconstruct_q, ContourOptions, DEFAULT_MODES};
use alrh::scattering::{extract_spectrum, transfer_scattering, CircleGrid, SampledScattering, SpectralData, DEFAULT_GRID};
use alrh::soliton::{pole_removal, soliton_field};
use alrh::specfun::{pc_boundary_values, pc_jump, pc_model_with, pc_ray_point, PCModelParams, PcVariant};
use alrh::spectrum::SpectrumSidecar;
use alrh::tfun::TFunctionContext;
use alrh::{Error, Mat2, Result, C64};
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "alrh", version, about = "Ablowitz-Ladik lattice: simulation, scattering, Riemann-Hilbert solves and asymptotics")]
struct Cli {
    /// Directory for output files.
    #[arg(long, global = true, default_value = ".")]
    out_dir: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the lattice from an `n,re,im` CSV or a scenario's initial data.
    Simulate {
        #[arg(long, conflicts_with = "scenario", required_unless_present = "scenario")]
        initial: Option<PathBuf>,
        #[arg(long)]
        scenario: Option<PathBuf>,
        #[arg(long)]
        t_final: Option<f64>,
        #[arg(long)]
        dt: Option<f64>,
        /// Keep every `stride`-th step in the trajectory file.
        #[arg(long, default_value_t = 100)]
        stride: usize,
        /// Abort when the relative drift of c_infty exceeds this value.
        #[arg(long)]
        tol_cons: Option<f64>,
    },
    /// Direct scattering of an `n,re,im` CSV on a uniform circle grid.
    Scatter {
        #[arg(long)]
        initial: PathBuf,
        #[arg(long, default_value_t = DEFAULT_GRID)]
        grid: usize,
        /// Search the annulus `r_in < |λ| < r_out` for discrete spectrum.
        #[arg(long, value_parser = parse_pair, default_value = "1.001,50")]
        annulus: (f64, f64),
    },
    /// Reflectionless field `n,re_q,im_q` from a pole sidecar.
    Soliton {
        #[arg(long)]
        poles: PathBuf,
        #[arg(long, value_parser = parse_range, allow_hyphen_values = true)]
        n_range: (i64, i64),
        #[arg(long)]
        t: f64,
    },
    /// Solve the Riemann–Hilbert problem for `q_n(t)` from sampled scattering data.
    RhSolve {
        /// Scattering CSV; its sidecar is the same path with extension `.json`.
        #[arg(long)]
        scattering: PathBuf,
        #[arg(long)]
        sidecar: Option<PathBuf>,
        #[arg(long, allow_hyphen_values = true)]
        n: i64,
        #[arg(long)]
        t: f64,
        #[arg(long, default_value_t = DEFAULT_MODES)]
        modes: usize,
        #[arg(long)]
        rho: Option<f64>,
    },
    /// Long-time prediction along a ray, optionally against a simulation.
    Asymptotics {
        #[arg(long)]
        scattering: PathBuf,
        #[arg(long)]
        sidecar: Option<PathBuf>,
        /// `xi=<value>`.
        #[arg(long, value_parser = parse_ray, allow_hyphen_values = true)]
        ray: f64,
        /// `start:end:steps`, log-spaced.
        #[arg(long, value_parser = parse_grid)]
        t_grid: (f64, f64, usize),
        /// Initial data CSV to integrate for the simulation columns.
        #[arg(long)]
        simulate: Option<PathBuf>,
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
        #[arg(long, value_enum, default_value_t = Shift::Next)]
        index_shift: Shift,
        /// Also write `T` on a polar grid to `t_function.csv`.
        #[arg(long)]
        dump_t: bool,
    },
    /// Classify `ξ = n/(2t)` and report the stationary points.
    VerifyRegion {
        #[arg(long, allow_hyphen_values = true, conflicts_with_all = ["n", "t"])]
        xi: Option<f64>,
        #[arg(long, allow_hyphen_values = true, requires = "t")]
        n: Option<i64>,
        #[arg(long)]
        t: Option<f64>,
        #[arg(long, default_value_t = DELTA_TRANS)]
        delta: f64,
    },
    /// Jump and large-ζ residuals of the parabolic-cylinder model.
    PcCheck {
        #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
        tau: (f64, f64),
        #[arg(long)]
        radius: f64,
        #[arg(long, default_value_t = 32)]
        points: usize,
        #[arg(long, value_enum, default_value_t = Variant::Printed)]
        variant: Variant,
    },
    /// Run scenario files; each writes into `<out-dir>/<name>/`.
    Run {
        #[arg(required = true)]
        scenarios: Vec<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Shift {
    Next,
    Same,
}

#[derive(Clone, Copy, ValueEnum)]
enum Variant {
    Printed,
    Consistent,
}

fn parse_pair(s: &str) -> std::result::Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or("expected `a,b`")?;
    Ok((a.trim().parse().map_err(|e| format!("{e}"))?, b.trim().parse().map_err(|e| format!("{e}"))?))
}

fn parse_range(s: &str) -> std::result::Result<(i64, i64), String> {
    let (a, b) = s.split_once(':').ok_or("expected `a:b`")?;
    let (a, b): (i64, i64) = (a.parse().map_err(|e| format!("{e}"))?, b.parse().map_err(|e| format!("{e}"))?);
    if b < a {
        return Err("empty range".into());
    }
    Ok((a, b))
}

fn parse_ray(s: &str) -> std::result::Result<f64, String> {
    let v = s.strip_prefix("xi=").unwrap_or(s);
    v.parse().map_err(|e| format!("{e}"))
}

fn parse_grid(s: &str) -> std::result::Result<(f64, f64, usize), String> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err("expected `start:end:steps`".into());
    }
    Ok((
        parts[0].parse().map_err(|e| format!("{e}"))?,
        parts[1].parse().map_err(|e| format!("{e}"))?,
        parts[2].parse().map_err(|e| format!("{e}"))?,
    ))
}

fn sidecar_path(csv: &Path, explicit: Option<&PathBuf>) -> PathBuf {
    explicit.cloned().unwrap_or_else(|| csv.with_extension("json"))
}

fn load_scattering(csv: &Path, sidecar: Option<&PathBuf>) -> Result<SpectralData> {
    let side: SpectrumSidecar = io::read_json(io::open(&sidecar_path(csv, sidecar))?)?;
    io::read_spectral(io::open(csv)?, &side)
}

fn emit_json<T: serde::Serialize>(value: &T) -> Result<()> {
    let stdout = std::io::stdout();
    io::write_json(stdout.lock(), value)
}

fn simulate(out: &Path, initial: Option<PathBuf>, scenario: Option<PathBuf>, t_final: Option<f64>, dt: Option<f64>, stride: usize, tol_cons: Option<f64>) -> Result<()> {
    let (state, t_final, dt) = match (initial, scenario) {
        (Some(p), _) => {
            let t_final = t_final.ok_or_else(|| Error::Invalid("--t-final is required with --initial".into()))?;
            let s = io::read_state(io::open(&p)?)?;
            let w = ((s.n_max() - s.n0) as f64 / 2.0).max(1.0);
            let h = window_half_width(t_final, w, 0.0);
            let c = (s.n0 + s.n_max()).div_euclid(2);
            (pad(&s, c - h, c + h)?, t_final, dt.unwrap_or(1e-3))
        }
        (None, Some(p)) => {
            let sc = Scenario::load(&p)?;
            let t_final = t_final.or(sc.t_final()).ok_or_else(|| Error::Invalid("scenario has no time grid; pass --t-final".into()))?;
            (sc.initial_state()?, t_final, dt.unwrap_or(sc.dt))
        }
        (None, None) => unreachable!("clap requires one source"),
    };
    let traj = integrate_with(&state, t_final, dt, IntegrateOptions { stride, tol_cons })?;
    io::write_trajectory(io::create(&out.join("trajectory.csv"))?, &traj)?;
    io::write_observables(io::create(&out.join("observables.csv"))?, &traj.observables)?;
    emit_json(&serde_json::json!({
        "t_final": t_final,
        "dt": dt,
        "sites": state.len(),
        "max_drift": traj.max_drift,
    }))
}

fn scatter(out: &Path, initial: &Path, grid: usize, annulus: (f64, f64)) -> Result<()> {
    let q = io::read_state(io::open(initial)?)?;
    let mut data = transfer_scattering(&q, &CircleGrid::uniform(grid)?)?;
    data.spectrum = extract_spectrum(&q, annulus.0, annulus.1)?;
    io::write_spectral(io::create(&out.join("scattering.csv"))?, &data)?;
    let side = SpectrumSidecar::from_spectrum(&data.spectrum, data.c_inf);
    io::write_json(io::create(&out.join("scattering.json"))?, &side)?;
    emit_json(&serde_json::json!({
        "c_inf": data.c_inf,
        "identity_residual": data.identity_residual(),
        "poles": data.spectrum.len(),
    }))
}

fn soliton(out: &Path, poles: &Path, n_range: (i64, i64), t: f64) -> Result<()> {
    let side: SpectrumSidecar = io::read_json(io::open(poles)?)?;
    let spec = side.to_spectrum()?;
    let q = soliton_field(&spec, n_range.0, n_range.1, t)?;
    io::write_field(io::create(&out.join("soliton.csv"))?, n_range.0, &q)
}

fn rh_solve(scattering: &Path, sidecar: Option<&PathBuf>, n: i64, t: f64, modes: usize, rho: Option<f64>) -> Result<()> {
    let data = load_scattering(scattering, sidecar)?;
    let model = SampledScattering::new(&data)?;
    let remover = pole_removal(&model, &data.spectrum)?;
    let rep = reconstruct_q(&model, &remover, n, t, ContourOptions { modes, rho })?;
    emit_json(&rep)
}

#[allow(clippy::too_many_arguments)]
fn asymptotics(
    out: &Path,
    scattering: &Path,
    sidecar: Option<&PathBuf>,
    xi: f64,
    t_grid: (f64, f64, usize),
    sim_initial: Option<PathBuf>,
    dt: f64,
    shift: Shift,
    dump_t: bool,
) -> Result<()> {
    let data = load_scattering(scattering, sidecar)?;
    let model = SampledScattering::new(&data)?;
    let times = alrh::harness::fit::log_grid(t_grid.0, t_grid.1, t_grid.2)?;
    let index_shift = match shift {
        Shift::Next => IndexShift::Next,
        Shift::Same => IndexShift::Same,
    };
    let opts = AsymptOptions { index_shift, ..AsymptOptions::default() };
    let sims = match sim_initial {
        Some(p) => {
            let s = io::read_state(io::open(&p)?)?;
            let w = ((s.n_max() - s.n0) as f64 / 2.0).max(1.0);
            let h = window_half_width(t_grid.1, w, xi.abs());
            let c = (s.n0 + s.n_max()).div_euclid(2);
            Some(sample_rays(&pad(&s, c - h, c + h)?, &[xi], &times, dt)?.remove(0))
        }
        None => None,
    };
    let mut rows = Vec::with_capacity(times.len());
    for (k, &t) in times.iter().enumerate() {
        let n = (2.0 * xi * t).round() as i64;
        let p = predict(&model, &data.spectrum, n, t, opts)?;
        let sim = sims.as_ref().map_or(C64::new(f64::NAN, f64::NAN), |s| s[k].2);
        rows.push(RayRow { t, n, pred: p.q_pred, sim });
    }
    io::write_ray(io::create(&out.join("asymptotics.csv"))?, &rows)?;
    if dump_t {
        let ctx = TFunctionContext::new(&model, data.spectrum.clone(), xi)?;
        let mut pts = Vec::new();
        for r in [0.5, 0.8, 0.95, 1.05, 1.25, 2.0] {
            for j in 0..64 {
                let lam = C64::from_polar(r, 2.0 * std::f64::consts::PI * (j as f64 + 0.5) / 64.0);
                pts.push((lam, ctx.t_eval(lam)?));
            }
        }
        io::write_t_dump(io::create(&out.join("t_function.csv"))?, &pts)?;
    }
    Ok(())
}

fn verify_region(xi: Option<f64>, n: Option<i64>, t: Option<f64>, delta: f64) -> Result<()> {
    let rd = match (xi, n, t) {
        (Some(xi), _, _) => classify_xi(xi, delta),
        (None, Some(n), Some(t)) => classify_region(n, t, delta)?,
        _ => return Err(Error::Invalid("pass --xi or both --n and --t".into())),
    };
    emit_json(&rd)
}

fn pc_check(out: &Path, tau: (f64, f64), radius: f64, points: usize, variant: Variant) -> Result<()> {
    let tau = C64::new(tau.0, tau.1);
    let v = match variant {
        Variant::Printed => PcVariant::Printed,
        Variant::Consistent => PcVariant::Consistent,
    };
    let p = PCModelParams::with_variant(tau, v)?;
    let mut w = io::csv_writer(io::create(&out.join("pc_check.csv"))?, &["kind", "index", "re_zeta", "im_zeta", "residual"])?;
    for k in 1..=4 {
        for j in 1..=points {
            let z = pc_ray_point(k, radius * j as f64 / points as f64);
            let (mp, mm) = pc_boundary_values(k, z, &p)?;
            let res = (mp - mm * pc_jump(k, z, p.tau, p.nu)).norm_max() / mp.norm_max().max(1.0);
            w.write_record(["jump".to_string(), k.to_string(), format!("{:e}", z.re), format!("{:e}", z.im), format!("{res:e}")])?;
        }
    }
    let want = p.residue();
    for j in 0..points {
        let z = C64::from_polar(radius, 2.0 * std::f64::consts::PI * (j as f64 + 0.5) / points as f64 + 0.01);
        let got: Mat2 = (pc_model_with(z, &p)? - Mat2::IDENTITY).scale(z);
        let res = (got - want).norm_max();
        w.write_record(["asymptotic".to_string(), j.to_string(), format!("{:e}", z.re), format!("{:e}", z.im), format!("{res:e}")])?;
    }
    w.flush()?;
    Ok(())
}

fn run(out: &Path, files: &[PathBuf]) -> Result<bool> {
    let scenarios: Vec<Scenario> = files.iter().map(|f| Scenario::load(f)).collect::<Result<_>>()?;
    let results: Vec<Result<Report>> = std::thread::scope(|s| {
        let handles: Vec<_> = scenarios.iter().map(|sc| s.spawn(move || run_scenario(sc, Some(&out.join(&sc.name))))).collect();
        handles.into_iter().map(|h| h.join().expect("scenario thread panicked")).collect()
    });
    let mut all = true;
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    for r in results {
        let r = r?;
        for line in r.lines() {
            writeln!(lock, "{line}")?;
        }
        all &= r.passed;
    }
    Ok(all)
}

fn dispatch(cli: Cli) -> Result<bool> {
    let out = cli.out_dir.as_path();
    std::fs::create_dir_all(out)?;
    match cli.command {
        Command::Simulate { initial, scenario, t_final, dt, stride, tol_cons } => simulate(out, initial, scenario, t_final, dt, stride, tol_cons)?,
        Command::Scatter { initial, grid, annulus } => scatter(out, &initial, grid, annulus)?,
        Command::Soliton { poles, n_range, t } => soliton(out, &poles, n_range, t)?,
        Command::RhSolve { scattering, sidecar, n, t, modes, rho } => rh_solve(&scattering, sidecar.as_ref(), n, t, modes, rho)?,
        Command::Asymptotics { scattering, sidecar, ray, t_grid, simulate, dt, index_shift, dump_t } => {
            asymptotics(out, &scattering, sidecar.as_ref(), ray, t_grid, simulate, dt, index_shift, dump_t)?
        }
        Command::VerifyRegion { xi, n, t, delta } => verify_region(xi, n, t, delta)?,
        Command::PcCheck { tau, radius, points, variant } => pc_check(out, tau, radius, points, variant)?,
        Command::Run { scenarios } => return run(out, &scenarios),
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn argument_parsers() {
        assert_eq!(parse_pair("1, -0.5").unwrap(), (1.0, -0.5));
        assert_eq!(parse_range("-3:4").unwrap(), (-3, 4));
        assert!(parse_range("4:3").is_err());
        assert_eq!(parse_ray("xi=-1.5").unwrap(), -1.5);
        assert_eq!(parse_grid("50:400:12").unwrap(), (50.0, 400.0, 12));
        assert!(parse_grid("50:400").is_err());
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}

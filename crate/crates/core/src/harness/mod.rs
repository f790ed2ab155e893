//! Scenario runner: builds initial data, runs the requested checks and
//! writes CSV outputs plus a JSON report.

pub mod checks;
pub mod fit;
pub mod io;
pub mod scenario;

use std::path::Path;

use serde::{Deserialize, Serialize};

pub use checks::{Outcome, RayFit};
pub use fit::{slope_fit, SlopeFit};
pub use scenario::{Assembly, Check, InitialData, Outputs, Scenario, TGrid};

use crate::scattering::{ExactScattering, truncate_support};
use crate::spectrum::{SpectrumSidecar, SCHEMA_VERSION};
use crate::{c, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub scenario: String,
    pub passed: bool,
    pub criteria: Vec<Outcome>,
}

impl Report {
    pub fn lines(&self) -> Vec<String> {
        self.criteria.iter().map(|o| format!("[{}] {}", self.scenario, o.line())).collect()
    }
}

/// Run every check of `scenario`; with `out_dir`, write the requested CSVs
/// and `report.json` there. Errors carry the scenario name.
pub fn run_scenario(scenario: &Scenario, out_dir: Option<&Path>) -> Result<Report> {
    run(scenario, out_dir).map_err(|e| e.in_scenario(&scenario.name))
}

fn run(sc: &Scenario, out_dir: Option<&Path>) -> Result<Report> {
    sc.validate()?;
    let initial = match &sc.initial {
        Some(_) => Some(sc.initial_state()?),
        None => None,
    };
    let known = sc.soliton_spectrum()?;
    let write = |name: &str, f: &dyn Fn(&mut dyn std::io::Write) -> Result<()>| -> Result<()> {
        if let Some(d) = out_dir {
            let mut w = io::create(&d.join(name))?;
            f(&mut w)?;
        }
        Ok(())
    };
    if sc.outputs.initial {
        if let Some(s) = &initial {
            write("initial.csv", &|w| io::write_state(w, s))?;
        }
    }
    let mut outcomes = Vec::new();
    let mut ray_samples = None;
    for ch in &sc.checks {
        let o = match ch {
            Check::Conservation { tol } => {
                let state = initial.as_ref().expect("validated");
                let t_final = sc.t_final().expect("validated");
                let (o, obs) = checks::conservation(state, t_final, sc.dt, *tol)?;
                if sc.outputs.observables {
                    write("observables.csv", &|w| io::write_observables(w, &obs))?;
                }
                o
            }
            Check::ScatteringIdentity { grid_points, tol } => {
                let (o, data) = checks::scattering_identity(initial.as_ref().expect("validated"), *grid_points, *tol)?;
                if sc.outputs.scattering {
                    write("scattering.csv", &|w| io::write_spectral(w, &data))?;
                    let side = SpectrumSidecar::from_spectrum(&data.spectrum, data.c_inf);
                    write("scattering.json", &|w| io::write_json(w, &side))?;
                }
                o
            }
            Check::SingleSite { grid_points, tol } => checks::single_site(*grid_points, *tol)?,
            Check::SolitonConsistency { residual_dt, tol_residual, tol_sup } => {
                let Some(InitialData::Soliton { n_min, n_max, .. }) = &sc.initial else { unreachable!("validated") };
                let spec = known.as_ref().expect("validated");
                let t_final = sc.t_final().expect("validated");
                checks::soliton_consistency(spec, *n_min, *n_max, *residual_dt, t_final, sc.dt, *tol_residual, *tol_sup)?
            }
            Check::RoundTrip { r_in, r_out, tol } => {
                checks::round_trip(known.as_ref().expect("validated"), initial.as_ref().expect("validated"), *r_in, *r_out, *tol)?
            }
            Check::BealsCoifman { n_max, times, modes, tol } => {
                checks::beals_coifman(known.as_ref().expect("validated"), *n_max, times, *modes, *tol)?
            }
            Check::TFunction { xi, points, tol_jump, tol_symmetry, tol_infinity } => {
                let (trimmed, _) = truncate_support(initial.as_ref().expect("validated"), checks::TRUNCATION)?;
                let model = ExactScattering { state: trimmed };
                checks::t_function(&model, *xi, *points, *tol_jump, *tol_symmetry, *tol_infinity)?
            }
            Check::Vandermonde { instances, max_order, seed, tol } => checks::vandermonde(*instances, *max_order, *seed, *tol)?,
            Check::PcModel { tau, radius, points, tol_coeff, tol_gamma } => {
                checks::pc_model(c(tau[0], tau[1]), *radius, *points, *tol_coeff, *tol_gamma)?
            }
            Check::Decay { assembly, index_shift, .. } | Check::Residual { assembly, index_shift, .. } => {
                let state = initial.as_ref().expect("validated");
                let times = sc.times()?;
                if ray_samples.as_ref().is_none_or(|(shift, _)| shift != index_shift) {
                    let sims = checks::sample_rays(state, &sc.rays, &times, sc.dt)?;
                    let spectrum = checks::initial_spectrum(state, known.clone())?;
                    ray_samples = Some((*index_shift, checks::predict_rays(state, &spectrum, &sims, *index_shift)?));
                }
                let samples = &ray_samples.as_ref().expect("just filled").1;
                if sc.outputs.rays {
                    for (xi, ray) in sc.rays.iter().zip(samples) {
                        let rows: Vec<io::RayRow> = ray.iter().map(|s| s.row(*assembly)).collect();
                        write(&format!("ray_{xi:+.3}.csv"), &|w| io::write_ray(w, &rows))?;
                    }
                }
                match ch {
                    Check::Decay { max_exponent, min_r_squared, .. } => {
                        checks::decay(&sc.rays, samples, *assembly, *max_exponent, *min_r_squared)
                    }
                    Check::Residual { max_exponent, envelope_t, envelope_tol, .. } => {
                        checks::residual(&sc.rays, samples, *assembly, *max_exponent, *envelope_t, *envelope_tol)
                    }
                    _ => unreachable!(),
                }
            }
        };
        outcomes.push(o);
    }
    let report = Report { schema_version: SCHEMA_VERSION, scenario: sc.name.clone(), passed: outcomes.iter().all(|o| o.passed), criteria: outcomes };
    write("report.json", &|w| io::write_json(w, &report))?;
    Ok(report)
}

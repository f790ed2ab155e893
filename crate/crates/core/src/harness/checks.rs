//! Individual verification experiments. Each returns an [`Outcome`]; module
//! errors propagate.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::fit::{slope_fit, SlopeFit};
use super::io::RayRow;
use super::scenario::Assembly;
use crate::asympt::{predict, AsymptOptions, AsymptoticPrediction, IndexShift};
use crate::lattice::{al_rhs, evolve, integrate_with, IntegrateOptions, Observables};
use crate::rhsolver::{reconstruct_q, ContourOptions};
use crate::scattering::{extract_spectrum, transfer_scattering, truncate_support, CircleGrid, ExactScattering, Reflectionless, ScatteringModel, SpectralData};
use crate::soliton::{pole_removal, soliton_field, soliton_q, soliton_state, vandermonde_closed_form, vandermonde_general};
use crate::specfun::{pc_residue_estimate, PCModelParams};
use crate::spectrum::DiscreteSpectrum;
use crate::tfun::{ArcSide, TFunctionContext};
use crate::{c, Error, LatticeState, Result, C64};

/// Annulus searched for discrete spectrum of general initial data.
pub const SPECTRUM_ANNULUS: (f64, f64) = (1.0 + 1e-3, 50.0);

/// Sites below this modulus are dropped before scattering evaluations.
pub const TRUNCATION: f64 = 1e-18;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RayFit {
    pub xi: f64,
    pub fit: Option<SlopeFit>,
}

/// Result of one check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub name: String,
    pub passed: bool,
    pub metrics: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub fits: Vec<RayFit>,
    pub detail: String,
}

impl Outcome {
    fn new(name: &str) -> Self {
        Outcome { name: name.to_string(), passed: false, metrics: BTreeMap::new(), fits: Vec::new(), detail: String::new() }
    }

    fn metric(&mut self, key: &str, v: f64) -> &mut Self {
        self.metrics.insert(key.to_string(), v);
        self
    }

    /// `PASS name: detail` or `FAIL name: detail`.
    pub fn line(&self) -> String {
        format!("{} {}: {}", if self.passed { "PASS" } else { "FAIL" }, self.name, self.detail)
    }
}

pub fn conservation(state: &LatticeState, t_final: f64, dt: f64, tol: f64) -> Result<(Outcome, Vec<Observables>)> {
    let steps = (t_final / dt).ceil().max(1.0) as usize;
    let traj = integrate_with(state, t_final, dt, IntegrateOptions { stride: (steps / 200).max(1), tol_cons: None })?;
    let mut o = Outcome::new("conservation");
    o.metric("drift", traj.max_drift).metric("c_infty", traj.observables[0].c_infty).metric("tol", tol);
    o.passed = traj.max_drift < tol;
    o.detail = format!("max relative drift of c_infty {:.3e} (tol {tol:e}) over t in [0, {t_final}]", traj.max_drift);
    Ok((o, traj.observables))
}

pub fn scattering_identity(state: &LatticeState, grid_points: usize, tol: f64) -> Result<(Outcome, SpectralData)> {
    let data = transfer_scattering(state, &CircleGrid::uniform(grid_points)?)?;
    let res = data.identity_residual();
    let mut o = Outcome::new("scattering_identity");
    o.metric("residual", res).metric("tol", tol);
    o.passed = res < tol;
    o.detail = format!("max ||a|^2+|b|^2-c_infty| = {res:.3e} over {grid_points} points (tol {tol:e})");
    Ok((o, data))
}

pub fn single_site(grid_points: usize, tol: f64) -> Result<Outcome> {
    let q = LatticeState::from_fn(-1, 1, 0.0, |n| if n == 0 { c(1.0, 0.0) } else { C64::default() })?;
    let g = CircleGrid::uniform(grid_points)?;
    let d = transfer_scattering(&q, &g)?;
    let mut worst: f64 = 0.0;
    for (k, l) in g.points.iter().enumerate() {
        worst = worst.max((d.a_vals[k] - 1.0).norm()).max((d.b_vals[k] + l).norm()).max((d.r_vals[k] + l).norm());
    }
    let mut o = Outcome::new("single_site");
    o.metric("max_error", worst).metric("tol", tol);
    o.passed = worst < tol;
    o.detail = format!("max deviation from a = 1, b = r = -lambda: {worst:.3e} (tol {tol:e})");
    Ok(o)
}

#[allow(clippy::too_many_arguments)]
pub fn soliton_consistency(
    spec: &DiscreteSpectrum,
    n_min: i64,
    n_max: i64,
    residual_dt: f64,
    t_final: f64,
    dt: f64,
    tol_residual: f64,
    tol_sup: f64,
) -> Result<Outcome> {
    let now = soliton_state(spec, n_min, n_max, 0.0)?;
    let plus = soliton_field(spec, n_min, n_max, residual_dt)?;
    let minus = soliton_field(spec, n_min, n_max, -residual_dt)?;
    let rhs = al_rhs(&now)?;
    let residual = (0..now.len()).map(|k| ((plus[k] - minus[k]) / (2.0 * residual_dt) - rhs[k]).norm()).fold(0.0, f64::max);
    let mut state = now.clone();
    evolve(&mut state, t_final, dt, |_, _| Ok(()))?;
    let want = soliton_field(spec, n_min, n_max, t_final)?;
    let sup = state.q.iter().zip(&want).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    let mut o = Outcome::new("soliton_consistency");
    o.metric("residual", residual).metric("sup_error", sup).metric("tol_residual", tol_residual).metric("tol_sup", tol_sup);
    o.passed = residual < tol_residual && sup < tol_sup;
    o.detail = format!("lattice residual {residual:.3e} (tol {tol_residual:e}), integrator vs formula at t = {t_final}: {sup:.3e} (tol {tol_sup:e})");
    Ok(o)
}

pub fn round_trip(spec: &DiscreteSpectrum, state: &LatticeState, r_in: f64, r_out: f64, tol: f64) -> Result<Outcome> {
    let found = extract_spectrum(state, r_in, r_out)?;
    let mut o = Outcome::new("round_trip");
    o.metric("poles_expected", spec.len() as f64).metric("poles_found", found.len() as f64).metric("tol", tol);
    if found.len() != spec.len() {
        o.detail = format!("expected {} poles, found {}", spec.len(), found.len());
        return Ok(o);
    }
    let (mut dl, mut db, mut orders_ok) = (0.0f64, 0.0f64, true);
    for p in &spec.poles {
        let q = found
            .poles
            .iter()
            .min_by(|a, b| (a.lambda - p.lambda).norm().total_cmp(&(b.lambda - p.lambda).norm()))
            .expect("nonempty");
        dl = dl.max((q.lambda - p.lambda).norm() / p.lambda.norm());
        db = db.max((q.betas[0] - p.betas[0]).norm() / p.betas[0].norm());
        orders_ok &= q.order == p.order;
    }
    o.metric("lambda_rel", dl).metric("beta0_rel", db);
    o.passed = orders_ok && dl < tol && db < tol;
    o.detail = format!("relative errors lambda {dl:.3e}, beta0 {db:.3e}, orders {} (tol {tol:e})", if orders_ok { "match" } else { "differ" });
    Ok(o)
}

pub fn beals_coifman(spec: &DiscreteSpectrum, n_max: i64, times: &[f64], modes: usize, tol: f64) -> Result<Outcome> {
    let model = Reflectionless { spectrum: spec.clone() };
    let remover = pole_removal(&model, spec)?;
    let (mut worst, mut resid) = (0.0f64, 0.0f64);
    for &t in times {
        for n in -n_max..=n_max {
            let rep = reconstruct_q(&model, &remover, n, t, ContourOptions { modes, rho: None })?;
            worst = worst.max((rep.q - soliton_q(spec, n, t)?).norm());
            resid = resid.max(rep.residual);
        }
    }
    let mut o = Outcome::new("beals_coifman");
    o.metric("max_error", worst).metric("max_residual", resid).metric("tol", tol);
    o.passed = worst < tol;
    o.detail = format!("max |q_BC - q_formula| = {worst:.3e} for |n| <= {n_max}, t in {times:?} (tol {tol:e})");
    Ok(o)
}

/// Off-arc points for the reflection symmetry: radii cycle through
/// `{0.3, 0.6, 1.7, 3.0}`, angles advance by the golden angle.
pub fn symmetry_points(count: usize) -> Vec<C64> {
    let golden = PI * (3.0 - 5f64.sqrt());
    (0..count).map(|k| C64::from_polar([0.3, 0.6, 1.7, 3.0][k % 4], 0.2 + golden * k as f64)).collect()
}

pub fn t_function(model: &dyn ScatteringModel, xi: f64, points: usize, tol_jump: f64, tol_symmetry: f64, tol_infinity: f64) -> Result<Outcome> {
    let ctx = TFunctionContext::new(model, DiscreteSpectrum::empty(), xi)?;
    let mut jump: f64 = 0.0;
    if !ctx.arc_is_empty() {
        let (a, b) = ctx.arc();
        for k in 0..points {
            let lam = C64::from_polar(1.0, a + (b - a) * (k as f64 + 0.5) / points as f64);
            let ratio = ctx.t_boundary(lam, ArcSide::Plus)? / ctx.t_boundary(lam, ArcSide::Minus)?;
            jump = jump.max((ratio - (1.0 + model.r(lam).norm_sqr())).norm());
        }
    }
    let t0 = ctx.t_zero()?;
    let mut sym: f64 = 0.0;
    for z in symmetry_points(points) {
        let w = ctx.t_eval(z.conj().inv())? * ctx.t_eval(z)?.conj();
        sym = sym.max((w - t0).norm());
    }
    let inf = (ctx.t_eval(c(1e8, 1e8))? - 1.0).norm();
    let mut o = Outcome::new("t_function");
    o.metric("jump_residual", jump).metric("symmetry_residual", sym).metric("infinity_error", inf);
    o.passed = jump < tol_jump && sym < tol_symmetry && inf < tol_infinity;
    o.detail = format!("xi = {xi}: jump {jump:.3e} (tol {tol_jump:e}), symmetry {sym:.3e} (tol {tol_symmetry:e}), |T(inf)-1| {inf:.3e} (tol {tol_infinity:e})");
    Ok(o)
}

/// Random well-separated nodes with orders summing to at most `max_order`.
pub fn random_vandermonde_instance(rng: &mut ChaCha8Rng, max_order: usize) -> (Vec<C64>, Vec<usize>) {
    let m = rng.random_range(1..=max_order.clamp(1, 4));
    let total = rng.random_range(m..=max_order.max(m));
    let mut orders = vec![1usize; m];
    for _ in m..total {
        let j = rng.random_range(0..m);
        orders[j] += 1;
    }
    let mut nodes: Vec<C64> = Vec::with_capacity(m);
    while nodes.len() < m {
        let z = c(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
        if nodes.iter().all(|w| (w - z).norm() > 0.25) {
            nodes.push(z);
        }
    }
    (nodes, orders)
}

pub fn vandermonde(instances: usize, max_order: usize, seed: u64, tol: f64) -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..instances {
        let (nodes, orders) = random_vandermonde_instance(&mut rng, max_order);
        let (_, direct) = vandermonde_general(&nodes, &orders)?;
        let closed = vandermonde_closed_form(&nodes, &orders);
        worst = worst.max((direct - closed).norm() / closed.norm());
    }
    let mut o = Outcome::new("vandermonde");
    o.metric("max_relative_error", worst).metric("tol", tol);
    o.passed = worst < tol;
    o.detail = format!("max relative error {worst:.3e} over {instances} instances, total order <= {max_order} (tol {tol:e})");
    Ok(o)
}

pub fn pc_model(tau: C64, radius: f64, points: usize, tol_coeff: f64, tol_gamma: f64) -> Result<Outcome> {
    let p = PCModelParams::new(tau)?;
    let est = pc_residue_estimate(&p, radius, points)?;
    let coeff = (est - p.residue()).norm_max();
    let gamma = (p.gamma1.norm_sqr() - p.nu / (1.0 + tau.norm_sqr())).abs();
    let mut o = Outcome::new("pc_model");
    o.metric("coefficient_error", coeff).metric("gamma_error", gamma);
    o.passed = coeff < tol_coeff && gamma < tol_gamma;
    o.detail = format!("tau = {tau}: 1/zeta coefficient at |zeta| = {radius}: {coeff:.3e} (tol {tol_coeff:e}), ||g1|^2 - nu/(1+|tau|^2)| = {gamma:.3e} (tol {tol_gamma:e})");
    Ok(o)
}

/// Simulated field along each ray `n = round(2ξt)` at every grid time.
pub fn sample_rays(initial: &LatticeState, rays: &[f64], times: &[f64], dt: f64) -> Result<Vec<Vec<(f64, i64, C64)>>> {
    let mut out = vec![Vec::with_capacity(times.len()); rays.len()];
    let mut state = initial.clone();
    for &t in times {
        if t > state.t {
            evolve(&mut state, t, dt, |_, _| Ok(()))?;
        }
        for (k, &xi) in rays.iter().enumerate() {
            let n = (2.0 * xi * t).round() as i64;
            if n < state.n0 || n > state.n_max() {
                return Err(Error::invalid(format!("ray xi = {xi} leaves the window at t = {t}")));
            }
            out[k].push((t, n, state.at(n)));
        }
    }
    Ok(out)
}

/// Discrete spectrum of the initial data: given for solitons, searched
/// otherwise.
pub fn initial_spectrum(state: &LatticeState, known: Option<DiscreteSpectrum>) -> Result<DiscreteSpectrum> {
    match known {
        Some(s) => Ok(s),
        None => extract_spectrum(state, SPECTRUM_ANNULUS.0, SPECTRUM_ANNULUS.1),
    }
}

/// Prediction and simulation at one ray sample.
#[derive(Clone, Copy, Debug)]
pub struct RaySample {
    pub sim: C64,
    pub prediction: AsymptoticPrediction,
}

impl RaySample {
    pub fn pred(&self, assembly: Assembly) -> C64 {
        match assembly {
            Assembly::Prefactored => self.prediction.q_pred,
            Assembly::Bare => self.prediction.q_pred_alt,
        }
    }

    /// The `t^{-1/2}` term as it enters the prediction.
    pub fn tail(&self) -> C64 {
        let p = &self.prediction;
        p.prefactor * p.q_osc / p.t.sqrt()
    }

    pub fn row(&self, assembly: Assembly) -> RayRow {
        RayRow { t: self.prediction.t, n: self.prediction.n, pred: self.pred(assembly), sim: self.sim }
    }
}

pub fn predict_rays(
    state: &LatticeState,
    spectrum: &DiscreteSpectrum,
    samples: &[Vec<(f64, i64, C64)>],
    index_shift: IndexShift,
) -> Result<Vec<Vec<RaySample>>> {
    let (trimmed, _) = truncate_support(state, TRUNCATION)?;
    let model = ExactScattering { state: trimmed };
    let opts = AsymptOptions { index_shift, ..AsymptOptions::default() };
    samples
        .iter()
        .map(|ray| {
            ray.iter()
                .map(|&(t, n, sim)| Ok(RaySample { sim, prediction: predict(&model, spectrum, n, t, opts)? }))
                .collect()
        })
        .collect()
}

fn fit_ray(ray: &[RaySample], assembly: Assembly) -> std::result::Result<SlopeFit, String> {
    let ts: Vec<f64> = ray.iter().map(|s| s.prediction.t).collect();
    let errs: Vec<f64> = ray.iter().map(|s| (s.pred(assembly) - s.sim).norm()).collect();
    slope_fit(&ts, &errs).map_err(|e| e.to_string())
}

pub fn decay(rays: &[f64], samples: &[Vec<RaySample>], assembly: Assembly, max_exponent: f64, min_r_squared: f64) -> Outcome {
    let mut o = Outcome::new("decay");
    o.metric("max_exponent", max_exponent).metric("min_r_squared", min_r_squared);
    o.passed = true;
    let mut parts = Vec::new();
    for (&xi, ray) in rays.iter().zip(samples) {
        match fit_ray(ray, assembly) {
            Ok(f) => {
                o.passed &= f.exponent <= max_exponent && f.r_squared >= min_r_squared;
                parts.push(format!("xi = {xi}: exponent {:.3}, r^2 {:.3}", f.exponent, f.r_squared));
                o.fits.push(RayFit { xi, fit: Some(f) });
            }
            Err(e) => {
                o.passed = false;
                parts.push(format!("xi = {xi}: no fit ({e})"));
                o.fits.push(RayFit { xi, fit: None });
            }
        }
    }
    o.detail = format!("{} (need exponent <= {max_exponent}, r^2 >= {min_r_squared})", parts.join("; "));
    o
}

pub fn residual(
    rays: &[f64],
    samples: &[Vec<RaySample>],
    assembly: Assembly,
    max_exponent: f64,
    envelope_t: f64,
    envelope_tol: f64,
) -> Outcome {
    let mut o = Outcome::new("residual");
    o.metric("max_exponent", max_exponent).metric("envelope_tol", envelope_tol);
    o.passed = true;
    let mut parts = Vec::new();
    for (&xi, ray) in rays.iter().zip(samples) {
        match fit_ray(ray, assembly) {
            Ok(f) => {
                o.passed &= f.exponent <= max_exponent;
                parts.push(format!("xi = {xi}: exponent {:.3}, r^2 {:.3}", f.exponent, f.r_squared));
                o.fits.push(RayFit { xi, fit: Some(f) });
            }
            Err(e) => {
                o.passed = false;
                parts.push(format!("xi = {xi}: no fit ({e})"));
                o.fits.push(RayFit { xi, fit: None });
            }
        }
        let s = ray
            .iter()
            .min_by(|a, b| (a.prediction.t - envelope_t).abs().total_cmp(&(b.prediction.t - envelope_t).abs()))
            .expect("nonempty ray");
        let solitonic = s.pred(assembly) - s.tail();
        let measured = (s.sim - solitonic).norm();
        let tail = s.tail().norm();
        let rel = (tail - measured).abs() / measured;
        o.passed &= rel < envelope_tol;
        o.metric(&format!("envelope_rel_{xi}"), rel);
        parts.push(format!("|t^-1/2 term| {tail:.4e} vs simulated {measured:.4e} at t = {}: {:.1}%", s.prediction.t, 100.0 * rel));
    }
    o.detail = format!("{} (need exponent <= {max_exponent}, envelope within {:.0}%)", parts.join("; "), 100.0 * envelope_tol);
    o
}

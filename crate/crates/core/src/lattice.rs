//! Direct time integration of the focusing Ablowitz–Ladik system on a
//! finite window with zero exterior.

use serde::{Deserialize, Serialize};

use crate::{Error, Result, C64};

/// Field values `q_n` for `n = n0, …, n0 + len - 1` at time `t`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticeState {
    pub n0: i64,
    pub q: Vec<C64>,
    pub t: f64,
}

impl LatticeState {
    pub fn new(n0: i64, q: Vec<C64>, t: f64) -> Result<Self> {
        let s = LatticeState { n0, q, t };
        s.validate()?;
        Ok(s)
    }

    pub fn zeros(n_min: i64, n_max: i64, t: f64) -> Result<Self> {
        if n_max < n_min {
            return Err(Error::invalid("empty window"));
        }
        Self::new(n_min, vec![C64::default(); (n_max - n_min + 1) as usize], t)
    }

    /// Build a window `n_min..=n_max` from a site function.
    pub fn from_fn(n_min: i64, n_max: i64, t: f64, f: impl Fn(i64) -> C64) -> Result<Self> {
        Self::new(n_min, (n_min..=n_max).map(f).collect(), t)
    }

    pub fn validate(&self) -> Result<()> {
        if self.q.len() < 3 {
            return Err(Error::invalid(format!("window length {} < 3", self.q.len())));
        }
        if !self.t.is_finite() {
            return Err(Error::invalid("non-finite time"));
        }
        if let Some(k) = self.q.iter().position(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::NonFinite { site: self.n0 + k as i64 });
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.q.len()
    }

    pub fn is_empty(&self) -> bool {
        self.q.is_empty()
    }

    pub fn n_max(&self) -> i64 {
        self.n0 + self.q.len() as i64 - 1
    }

    pub fn sites(&self) -> impl Iterator<Item = i64> + '_ {
        self.n0..=self.n_max()
    }

    /// Amplitude at site `n`, zero outside the window.
    pub fn at(&self, n: i64) -> C64 {
        let k = n - self.n0;
        if k < 0 || k >= self.q.len() as i64 {
            C64::default()
        } else {
            self.q[k as usize]
        }
    }

    /// Largest modulus over the outermost `width` sites on either side.
    pub fn edge_amplitude(&self, width: usize) -> f64 {
        let w = width.min(self.q.len());
        self.q[..w]
            .iter()
            .chain(self.q[self.q.len() - w..].iter())
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// Sub-window of sites with `|q_n| > threshold`, or `None` when all vanish.
    pub fn support(&self, threshold: f64) -> Option<(i64, i64)> {
        let first = self.q.iter().position(|z| z.norm() > threshold)?;
        let last = self.q.iter().rposition(|z| z.norm() > threshold)?;
        Some((self.n0 + first as i64, self.n0 + last as i64))
    }
}

/// dq/dt written into `out`; sites outside the window are zero.
pub(crate) fn al_rhs_into(q: &[C64], out: &mut [C64]) {
    let n = q.len();
    let zero = C64::default();
    for k in 0..n {
        let left = if k > 0 { q[k - 1] } else { zero };
        let right = if k + 1 < n { q[k + 1] } else { zero };
        let qk = q[k];
        let s = left + right;
        let v = s - 2.0 * qk + qk.norm_sqr() * s;
        out[k] = C64::new(v.im, -v.re);
    }
}

/// `dq_n/dt = -i [q_{n+1} - 2q_n + q_{n-1} + |q_n|² (q_{n+1} + q_{n-1})]`.
pub fn al_rhs(state: &LatticeState) -> Result<Vec<C64>> {
    state.validate()?;
    let mut out = vec![C64::default(); state.q.len()];
    al_rhs_into(&state.q, &mut out);
    Ok(out)
}

/// Scratch buffers for the four-stage scheme.
#[derive(Clone, Debug, Default)]
pub struct Rk4Workspace {
    k1: Vec<C64>,
    k2: Vec<C64>,
    k3: Vec<C64>,
    k4: Vec<C64>,
    tmp: Vec<C64>,
}

impl Rk4Workspace {
    fn ensure(&mut self, n: usize) {
        for v in [&mut self.k1, &mut self.k2, &mut self.k3, &mut self.k4, &mut self.tmp] {
            v.resize(n, C64::default());
        }
    }
}

fn rk4_in_place(q: &mut [C64], dt: f64, ws: &mut Rk4Workspace) {
    let n = q.len();
    ws.ensure(n);
    al_rhs_into(q, &mut ws.k1);
    for i in 0..n {
        ws.tmp[i] = q[i] + 0.5 * dt * ws.k1[i];
    }
    al_rhs_into(&ws.tmp, &mut ws.k2);
    for i in 0..n {
        ws.tmp[i] = q[i] + 0.5 * dt * ws.k2[i];
    }
    al_rhs_into(&ws.tmp, &mut ws.k3);
    for i in 0..n {
        ws.tmp[i] = q[i] + dt * ws.k3[i];
    }
    al_rhs_into(&ws.tmp, &mut ws.k4);
    for i in 0..n {
        q[i] += dt / 6.0 * (ws.k1[i] + 2.0 * ws.k2[i] + 2.0 * ws.k3[i] + ws.k4[i]);
    }
}

/// One classical fourth-order Runge–Kutta step.
pub fn step_rk4(state: &LatticeState, dt: f64) -> Result<LatticeState> {
    if !(dt > 0.0) {
        return Err(Error::invalid("dt must be positive"));
    }
    state.validate()?;
    let mut next = state.clone();
    let mut ws = Rk4Workspace::default();
    rk4_in_place(&mut next.q, dt, &mut ws);
    next.t += dt;
    if next.q.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(Error::Overflow { t: state.t });
    }
    Ok(next)
}

/// Advance `state` to `t_final` in equal steps no longer than `dt`,
/// calling `observe` after every step.
pub fn evolve<F>(state: &mut LatticeState, t_final: f64, dt: f64, mut observe: F) -> Result<()>
where
    F: FnMut(usize, &LatticeState) -> Result<()>,
{
    if !(dt > 0.0) {
        return Err(Error::invalid("dt must be positive"));
    }
    if !(t_final > state.t) {
        return Err(Error::invalid("t_final must exceed the initial time"));
    }
    state.validate()?;
    let span = t_final - state.t;
    let steps = ((span / dt) - 1e-9).ceil().max(1.0) as usize;
    let h = span / steps as f64;
    let t0 = state.t;
    let mut ws = Rk4Workspace::default();
    for step in 1..=steps {
        rk4_in_place(&mut state.q, h, &mut ws);
        state.t = if step == steps { t_final } else { t0 + step as f64 * h };
        if (step % 64 == 0 || step == steps)
            && state.q.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
                return Err(Error::Overflow { t: state.t });
            }
        observe(step, state)?;
    }
    Ok(())
}

/// `∏ (1 + |q_n|²)` over the window.
pub fn c_infty(state: &LatticeState) -> f64 {
    log_c_infty(state).exp()
}

/// `Σ ln(1 + |q_n|²)`, the logarithm of [`c_infty`].
pub fn log_c_infty(state: &LatticeState) -> f64 {
    state.q.iter().map(|z| z.norm_sqr().ln_1p()).sum()
}

/// `(Σ (1 + n²) |q_n|^k)^{1/k}` for `k ∈ {1, 2}`.
pub fn weighted_norm(state: &LatticeState, k: u32) -> Result<f64> {
    if k != 1 && k != 2 {
        return Err(Error::invalid(format!("weighted norm exponent {k} not in {{1,2}}")));
    }
    let s: f64 = state
        .sites()
        .zip(&state.q)
        .map(|(n, z)| (1.0 + (n * n) as f64) * z.norm().powi(k as i32))
        .sum();
    Ok(s.powf(1.0 / k as f64))
}

pub fn l2_norm(state: &LatticeState) -> f64 {
    state.q.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Observables {
    pub t: f64,
    pub c_infty: f64,
    pub l2_norm: f64,
    pub l21_norm: f64,
}

impl Observables {
    pub fn of(state: &LatticeState) -> Self {
        Observables {
            t: state.t,
            c_infty: c_infty(state),
            l2_norm: l2_norm(state),
            l21_norm: weighted_norm(state, 2).unwrap_or(f64::NAN),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Trajectory {
    pub states: Vec<LatticeState>,
    pub dt: f64,
    pub observables: Vec<Observables>,
    /// Largest relative drift of `c₋∞` seen along the run.
    pub max_drift: f64,
}

impl Trajectory {
    pub fn last(&self) -> &LatticeState {
        self.states.last().expect("trajectory holds the initial state")
    }
}

#[derive(Clone, Copy, Debug)]
pub struct IntegrateOptions {
    /// Record a state and observables every `stride` steps.
    pub stride: usize,
    /// Abort when the relative drift of `c₋∞` exceeds this value.
    pub tol_cons: Option<f64>,
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        IntegrateOptions { stride: 1, tol_cons: Some(1e-8) }
    }
}

/// Integrate with default options (every step recorded, drift limit `1e-8`).
pub fn integrate(state: &LatticeState, t_final: f64, dt: f64) -> Result<Trajectory> {
    integrate_with(state, t_final, dt, IntegrateOptions::default())
}

pub fn integrate_with(
    state: &LatticeState,
    t_final: f64,
    dt: f64,
    opts: IntegrateOptions,
) -> Result<Trajectory> {
    let stride = opts.stride.max(1);
    let log_c0 = log_c_infty(state);
    let mut traj = Trajectory {
        states: vec![state.clone()],
        dt,
        observables: vec![Observables::of(state)],
        max_drift: 0.0,
    };
    let mut cur = state.clone();
    let mut max_drift: f64 = 0.0;
    let mut last_step = 0;
    evolve(&mut cur, t_final, dt, |step, s| {
        last_step = step;
        let drift = (log_c_infty(s) - log_c0).exp_m1().abs();
        max_drift = max_drift.max(drift);
        if let Some(tol) = opts.tol_cons {
            if drift > tol {
                return Err(Error::ConservationDrift { step, drift });
            }
        }
        if step % stride == 0 {
            traj.states.push(s.clone());
            traj.observables.push(Observables::of(s));
        }
        Ok(())
    })?;
    if last_step % stride != 0 {
        traj.states.push(cur.clone());
        traj.observables.push(Observables::of(&cur));
    }
    traj.max_drift = max_drift;
    Ok(traj)
}

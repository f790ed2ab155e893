//! Direct scattering for compactly supported data.
//!
//! The transfer product is run in the scaled form
//! `A ← A + q_n β`, `β ← λ⁻¹ (β - conj(q_n) A)`, starting from `(1, 0)`.
//! After the last site `a = A` and `b = λ^{N_max+2} β`. The scaling keeps the
//! recursion bounded for `|λ| ≥ 1`, so the same code continues `a` outside
//! the unit circle.

use std::f64::consts::PI;

use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::lattice::{c_infty, LatticeState};
use crate::phase::pow_i64;
use crate::series::Series;
use crate::spectrum::{DiscreteSpectrum, Pole};
use crate::{Error, Result, C64};

pub const DEFAULT_GRID: usize = 1024;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CircleGrid {
    pub thetas: Vec<f64>,
    pub points: Vec<C64>,
}

impl CircleGrid {
    /// `n` equally spaced angles starting at 0.
    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("empty circle grid"));
        }
        let thetas: Vec<f64> = (0..n).map(|k| 2.0 * PI * k as f64 / n as f64).collect();
        Ok(Self::build(thetas))
    }

    pub fn from_thetas(thetas: Vec<f64>) -> Result<Self> {
        if thetas.is_empty() {
            return Err(Error::invalid("empty circle grid"));
        }
        if thetas.iter().any(|t| !(0.0..2.0 * PI).contains(t)) {
            return Err(Error::invalid("grid angles must lie in [0, 2π)"));
        }
        if thetas.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("grid angles must be strictly increasing"));
        }
        Ok(Self::build(thetas))
    }

    fn build(thetas: Vec<f64>) -> Self {
        let points = thetas.iter().map(|&t| C64::from_polar(1.0, t)).collect();
        CircleGrid { thetas, points }
    }

    pub fn len(&self) -> usize {
        self.thetas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.thetas.is_empty()
    }

    pub fn is_uniform(&self) -> bool {
        let n = self.len() as f64;
        self.thetas.iter().enumerate().all(|(k, t)| (t - 2.0 * PI * k as f64 / n).abs() < 1e-12)
    }
}

/// Samples of `a`, `b`, `r = b/a` on a circle grid, with `c₋∞` and the
/// discrete spectrum.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpectralData {
    pub grid: CircleGrid,
    pub a_vals: Vec<C64>,
    pub b_vals: Vec<C64>,
    pub r_vals: Vec<C64>,
    pub c_inf: f64,
    pub spectrum: DiscreteSpectrum,
}

impl SpectralData {
    /// `max | |a|² + |b|² - c₋∞ |` over the grid.
    pub fn identity_residual(&self) -> f64 {
        self.a_vals
            .iter()
            .zip(&self.b_vals)
            .map(|(a, b)| (a.norm_sqr() + b.norm_sqr() - self.c_inf).abs())
            .fold(0.0, f64::max)
    }
}

fn nonzero(q: &LatticeState) -> impl Iterator<Item = (i64, C64)> + '_ {
    q.sites().zip(q.q.iter().copied())
}

/// `(a, β_end)` from the scaled transfer recursion.
fn transfer_scaled(q: &LatticeState, lambda: C64) -> (C64, C64) {
    let inv = lambda.inv();
    let mut a = C64::new(1.0, 0.0);
    let mut beta = C64::default();
    for (_, qn) in nonzero(q) {
        let a_next = a + qn * beta;
        beta = inv * (beta - qn.conj() * a);
        a = a_next;
    }
    (a, beta)
}

fn check_lambda(lambda: C64) -> Result<()> {
    if lambda == C64::default() || !(lambda.re.is_finite() && lambda.im.is_finite()) {
        Err(Error::domain(format!("scattering evaluated at lambda = {lambda}")))
    } else {
        Ok(())
    }
}

/// `(a(λ), b(λ))` from the finite transfer product; `b` is continued off the
/// circle by the same formula.
pub fn scattering_at(q: &LatticeState, lambda: C64) -> Result<(C64, C64)> {
    check_lambda(lambda)?;
    let (a, beta) = transfer_scaled(q, lambda);
    Ok((a, pow_i64(lambda, q.n_max() + 2) * beta))
}

/// Analytic continuation of `a` to `λ ≠ 0`.
pub fn continue_a(q: &LatticeState, lambda: C64) -> Result<C64> {
    check_lambda(lambda)?;
    Ok(transfer_scaled(q, lambda).0)
}

/// Taylor series of `(a, b)` in `ε = λ - λ₀`, truncated to `len` terms.
pub fn ab_series(q: &LatticeState, lambda0: C64, len: usize) -> Result<(Series, Series)> {
    check_lambda(lambda0)?;
    let inv = Series::linear_pow(lambda0, -1, len);
    let mut a = Series::constant(C64::new(1.0, 0.0), len);
    let mut beta = Series::zero(len);
    for (_, qn) in nonzero(q) {
        if qn == C64::default() {
            beta = beta.mul(&inv);
            continue;
        }
        let a_next = a.add(&beta.scale(qn));
        beta = inv.mul(&beta.add(&a.scale(-qn.conj())));
        a = a_next;
    }
    let b = Series::linear_pow(lambda0, q.n_max() + 2, len).mul(&beta);
    Ok((a, b))
}

/// `[a, ∂a, …, ∂^k a]` at `λ`.
pub fn a_derivatives(q: &LatticeState, lambda: C64, k: usize) -> Result<Vec<C64>> {
    let (a, _) = ab_series(q, lambda, k + 1)?;
    Ok(taylor_to_derivatives(&a))
}

pub(crate) fn taylor_to_derivatives(s: &Series) -> Vec<C64> {
    let mut fact = 1.0;
    (0..s.len())
        .map(|j| {
            if j > 0 {
                fact *= j as f64;
            }
            s.coeff(j) * fact
        })
        .collect()
}

/// `a`, `b`, `r` on the grid and `c₋∞`; the spectrum is left empty.
pub fn transfer_scattering(q: &LatticeState, grid: &CircleGrid) -> Result<SpectralData> {
    q.validate()?;
    let mut a_vals = Vec::with_capacity(grid.len());
    let mut b_vals = Vec::with_capacity(grid.len());
    let mut r_vals = Vec::with_capacity(grid.len());
    let c_inf = c_infty(q);
    for (&theta, &lam) in grid.thetas.iter().zip(&grid.points) {
        let (a, b) = scattering_at(q, lam)?;
        if a.norm() < 1e-10 * c_inf.sqrt() {
            return Err(Error::SpectralSingularity { theta });
        }
        a_vals.push(a);
        b_vals.push(b);
        r_vals.push(b / a);
    }
    Ok(SpectralData {
        grid: grid.clone(),
        a_vals,
        b_vals,
        r_vals,
        c_inf,
        spectrum: DiscreteSpectrum::empty(),
    })
}

/// Uniform grid starting at `2¹⁰` points, doubled until `a` and `b` on the
/// coarse grid are reproduced by trigonometric interpolation of the fine grid
/// to `tol`, or until `max_points`.
pub fn transfer_scattering_refined(q: &LatticeState, tol: f64, max_points: usize) -> Result<SpectralData> {
    let mut n = DEFAULT_GRID.max(8);
    let mut data = transfer_scattering(q, &CircleGrid::uniform(n)?)?;
    while n < max_points {
        let fine = transfer_scattering(q, &CircleGrid::uniform(2 * n)?)?;
        // Interpolate the fine samples at the midpoints of the coarse grid.
        let ia = TrigInterpolant::new(&data.a_vals)?;
        let ib = TrigInterpolant::new(&data.b_vals)?;
        let mut change: f64 = 0.0;
        for k in 0..n {
            let th = fine.grid.thetas[2 * k + 1];
            change = change.max((ia.eval(th) - fine.a_vals[2 * k + 1]).norm());
            change = change.max((ib.eval(th) - fine.b_vals[2 * k + 1]).norm());
        }
        data = fine;
        n *= 2;
        if change < tol {
            break;
        }
    }
    Ok(data)
}

/// Trigonometric interpolant of uniform samples on `[0, 2π)`.
#[derive(Clone, Debug)]
pub struct TrigInterpolant {
    /// Coefficients indexed by frequency `k - n/2` for `k = 0..n`.
    coeffs: Vec<C64>,
    kmin: i64,
}

impl TrigInterpolant {
    pub fn new(samples: &[C64]) -> Result<Self> {
        let n = samples.len();
        if n == 0 {
            return Err(Error::invalid("no samples to interpolate"));
        }
        let mut buf = samples.to_vec();
        FftPlanner::<f64>::new().plan_fft_forward(n).process(&mut buf);
        let kmin = -((n / 2) as i64);
        let coeffs = (0..n)
            .map(|j| {
                let k = kmin + j as i64;
                let mut v = buf[k.rem_euclid(n as i64) as usize] / n as f64;
                // Split the Nyquist mode symmetrically for even n.
                if n.is_multiple_of(2) && k == kmin {
                    v *= 0.5;
                }
                v
            })
            .collect();
        Ok(TrigInterpolant { coeffs, kmin })
    }

    pub fn eval(&self, theta: f64) -> C64 {
        let n = self.coeffs.len();
        let mut acc = C64::default();
        for (j, c) in self.coeffs.iter().enumerate() {
            acc += c * C64::from_polar(1.0, (self.kmin + j as i64) as f64 * theta);
        }
        if n.is_multiple_of(2) {
            acc += self.coeffs[0] * C64::from_polar(1.0, -self.kmin as f64 * theta);
        }
        acc
    }

    /// Coefficient of `e^{ikθ}`.
    pub fn coeff(&self, k: i64) -> C64 {
        let n = self.coeffs.len() as i64;
        let j = k - self.kmin;
        if j < 0 || j >= n {
            C64::default()
        } else if n % 2 == 0 && j == 0 {
            2.0 * self.coeffs[0]
        } else {
            self.coeffs[j as usize]
        }
    }
}

/// Scattering data as consumed by the inverse problem: `r` on the circle and
/// the Taylor expansion of `a` outside it.
pub trait ScatteringModel: Sync {
    fn r(&self, lambda: C64) -> C64;
    /// Taylor series of `a` at `λ₀` with `|λ₀| > 1`.
    fn a_series(&self, lambda0: C64, len: usize) -> Result<Series>;
    fn is_reflectionless(&self) -> bool {
        false
    }
}

/// Exact model computed from a compactly supported potential.
#[derive(Clone, Debug)]
pub struct ExactScattering {
    pub state: LatticeState,
}

impl ScatteringModel for ExactScattering {
    fn r(&self, lambda: C64) -> C64 {
        match scattering_at(&self.state, lambda) {
            Ok((a, b)) => b / a,
            Err(_) => C64::new(f64::NAN, f64::NAN),
        }
    }

    fn a_series(&self, lambda0: C64, len: usize) -> Result<Series> {
        Ok(ab_series(&self.state, lambda0, len)?.0)
    }
}

/// `r ≡ 0` with `a` the finite Blaschke-type product over the spectrum.
#[derive(Clone, Debug)]
pub struct Reflectionless {
    pub spectrum: DiscreteSpectrum,
}

impl ScatteringModel for Reflectionless {
    fn r(&self, _lambda: C64) -> C64 {
        C64::default()
    }

    fn a_series(&self, lambda0: C64, len: usize) -> Result<Series> {
        let mut s = Series::constant(C64::new(1.0, 0.0), len);
        for p in &self.spectrum.poles {
            let num = Series::linear_pow(lambda0 - p.lambda, p.order as i64, len);
            let den = Series::linear_pow(lambda0 - p.mirror(), -(p.order as i64), len);
            s = s.mul(&num).mul(&den);
        }
        Ok(s)
    }

    fn is_reflectionless(&self) -> bool {
        true
    }
}

/// Model built from grid samples: `a` and `b` by trigonometric interpolation
/// (exact for compact data once the grid resolves the window), `r = b/a`, and
/// `a` off the circle by its Laurent series in `λ⁻¹`.
#[derive(Clone, Debug)]
pub struct SampledScattering {
    a_interp: TrigInterpolant,
    b_interp: TrigInterpolant,
    a_laurent: Vec<C64>,
}

impl SampledScattering {
    pub fn new(data: &SpectralData) -> Result<Self> {
        if !data.grid.is_uniform() {
            return Err(Error::invalid("sampled scattering needs a uniform grid"));
        }
        let a_interp = TrigInterpolant::new(&data.a_vals)?;
        let b_interp = TrigInterpolant::new(&data.b_vals)?;
        let n = data.a_vals.len() as i64;
        let a_laurent = (0..=n / 2).map(|k| a_interp.coeff(-k)).collect();
        Ok(SampledScattering { a_interp, b_interp, a_laurent })
    }
}

impl ScatteringModel for SampledScattering {
    fn r(&self, lambda: C64) -> C64 {
        let th = lambda.arg().rem_euclid(2.0 * PI);
        self.b_interp.eval(th) / self.a_interp.eval(th)
    }

    fn a_series(&self, lambda0: C64, len: usize) -> Result<Series> {
        check_lambda(lambda0)?;
        let mut s = Series::zero(len);
        for (k, c) in self.a_laurent.iter().enumerate() {
            if c.norm() < 1e-300 {
                continue;
            }
            s = s.add(&Series::linear_pow(lambda0, -(k as i64), len).scale(*c));
        }
        Ok(s)
    }
}

/// A zero of `a` located by [`find_spectrum`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralZero {
    pub lambda: C64,
    pub order: usize,
}

/// Search parameters for [`find_spectrum`].
#[derive(Clone, Copy, Debug)]
pub struct SearchOptions {
    pub max_depth: usize,
    /// Cells smaller than this (in `ln|λ|` and `arg λ`) go straight to Newton.
    pub min_cell: f64,
    pub newton_tol: f64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions { max_depth: 40, min_cell: 0.05, newton_tol: 1e-14 }
    }
}

#[derive(Clone, Copy, Debug)]
struct Cell {
    s0: f64,
    s1: f64,
    t0: f64,
    t1: f64,
}

impl Cell {
    fn at(&self, s: f64, t: f64) -> C64 {
        C64::from_polar(s.exp(), t)
    }

    fn center(&self) -> C64 {
        self.at(0.5 * (self.s0 + self.s1), 0.5 * (self.t0 + self.t1))
    }

    fn contains(&self, lambda: C64, slack: f64) -> bool {
        let s = lambda.norm().ln();
        let mut t = lambda.arg();
        while t < self.t0 - slack {
            t += 2.0 * PI;
        }
        while t > self.t1 + slack {
            t -= 2.0 * PI;
        }
        s >= self.s0 - slack && s <= self.s1 + slack && t >= self.t0 - slack && t <= self.t1 + slack
    }

    fn label(&self) -> String {
        format!(
            "|λ| ∈ [{:.6}, {:.6}], arg ∈ [{:.6}, {:.6}]",
            self.s0.exp(),
            self.s1.exp(),
            self.t0,
            self.t1
        )
    }
}

/// Change of `arg a` along the segment `p(u)`, `u ∈ [0, 1]`, adaptively
/// refined so that consecutive samples differ by less than π/4 in argument.
fn arg_change<F: Fn(f64) -> C64>(f: &F, cell: &Cell) -> Result<f64> {
    let mut total = 0.0;
    let mut stack = vec![(0.0, 1.0, f(0.0), f(1.0))];
    while let Some((u0, u1, f0, f1)) = stack.pop() {
        if f0.norm() == 0.0 || f1.norm() == 0.0 {
            return Err(Error::Winding { cell: cell.label() });
        }
        let d = (f1 / f0).arg();
        if d.abs() < PI / 4.0 {
            // Guard against a full turn hidden between samples.
            let um = 0.5 * (u0 + u1);
            let fm = f(um);
            let d1 = (fm / f0).arg();
            let d2 = (f1 / fm).arg();
            if (d1 + d2 - d).abs() < 1e-9 || u1 - u0 < 1e-12 {
                total += d;
                continue;
            }
            stack.push((um, u1, fm, f1));
            stack.push((u0, um, f0, fm));
        } else {
            if u1 - u0 < 1e-12 {
                return Err(Error::Winding { cell: cell.label() });
            }
            let um = 0.5 * (u0 + u1);
            let fm = f(um);
            stack.push((um, u1, fm, f1));
            stack.push((u0, um, f0, fm));
        }
    }
    Ok(total)
}

fn winding(q: &LatticeState, cell: &Cell) -> Result<i64> {
    let a = |l: C64| transfer_scaled(q, l).0;
    let edges: [Box<dyn Fn(f64) -> C64>; 4] = [
        Box::new(|u| a(cell.at(cell.s0 + u * (cell.s1 - cell.s0), cell.t0))),
        Box::new(|u| a(cell.at(cell.s1, cell.t0 + u * (cell.t1 - cell.t0)))),
        Box::new(|u| a(cell.at(cell.s1 - u * (cell.s1 - cell.s0), cell.t1))),
        Box::new(|u| a(cell.at(cell.s0, cell.t1 - u * (cell.t1 - cell.t0)))),
    ];
    let mut total = 0.0;
    for e in &edges {
        total += arg_change(e, cell)?;
    }
    let w = total / (2.0 * PI);
    let k = w.round();
    if (w - k).abs() > 0.1 {
        return Err(Error::Winding { cell: cell.label() });
    }
    Ok(k as i64)
}

/// `a'(λ)` by fourth-order central differences with step `10⁻⁶|λ|`.
pub fn a_prime_fd(q: &LatticeState, lambda: C64) -> C64 {
    let h = 1e-6 * lambda.norm();
    let f = |d: f64| transfer_scaled(q, lambda + d).0;
    (-f(2.0 * h) + 8.0 * f(h) - 8.0 * f(-h) + f(-2.0 * h)) / (12.0 * h)
}

fn newton(q: &LatticeState, start: C64, order: usize, tol: f64) -> C64 {
    let mut z = start;
    for _ in 0..60 {
        let a = transfer_scaled(q, z).0;
        let d = a_prime_fd(q, z);
        if d.norm() == 0.0 {
            break;
        }
        let step = order as f64 * a / d;
        z -= step;
        if step.norm() <= tol * z.norm() {
            break;
        }
    }
    z
}

/// Zeros of `a` in `r_in < |λ| < r_out` with multiplicities.
pub fn find_spectrum(q: &LatticeState, r_in: f64, r_out: f64) -> Result<Vec<SpectralZero>> {
    find_spectrum_with(q, r_in, r_out, SearchOptions::default())
}

pub fn find_spectrum_with(
    q: &LatticeState,
    r_in: f64,
    r_out: f64,
    opts: SearchOptions,
) -> Result<Vec<SpectralZero>> {
    if !(r_in > 1.0 && r_out > r_in) {
        return Err(Error::invalid("annulus must satisfy 1 < r_in < r_out"));
    }
    q.validate()?;
    let (s0, s1) = (r_in.ln(), r_out.ln());
    let mut found: Vec<SpectralZero> = Vec::new();
    let mut stack: Vec<(Cell, usize, i64)> = Vec::new();
    // Sector edges and split points avoid the real and imaginary axes, where
    // symmetric data put their zeros.
    let offset = 0.0917;
    for k in 0..8 {
        let cell = Cell { s0, s1, t0: offset + k as f64 * PI / 4.0, t1: offset + (k + 1) as f64 * PI / 4.0 };
        let w = winding(q, &cell)?;
        if w < 0 {
            return Err(Error::Winding { cell: cell.label() });
        }
        if w > 0 {
            stack.push((cell, 0, w));
        }
    }
    while let Some((cell, depth, w)) = stack.pop() {
        let small = (cell.s1 - cell.s0).max(cell.t1 - cell.t0) < opts.min_cell;
        if w == 1 && small || depth >= opts.max_depth {
            let z = newton(q, cell.center(), w as usize, opts.newton_tol);
            if !cell.contains(z, 1e-6) {
                if depth >= opts.max_depth {
                    return Err(Error::Winding { cell: cell.label() });
                }
            } else {
                found.push(SpectralZero { lambda: z, order: w as usize });
                continue;
            }
        }
        // Split the longer side, off-center; retry elsewhere if a zero sits
        // on the cut.
        let mut split = None;
        for frac in [0.4871, 0.5327, 0.4433] {
            let halves = if cell.s1 - cell.s0 > cell.t1 - cell.t0 {
                let m = cell.s0 + frac * (cell.s1 - cell.s0);
                [Cell { s1: m, ..cell }, Cell { s0: m, ..cell }]
            } else {
                let m = cell.t0 + frac * (cell.t1 - cell.t0);
                [Cell { t1: m, ..cell }, Cell { t0: m, ..cell }]
            };
            if let (Ok(w0), Ok(w1)) = (winding(q, &halves[0]), winding(q, &halves[1])) {
                if w0 >= 0 && w1 >= 0 && w0 + w1 == w {
                    split = Some((halves, w0, w1));
                    break;
                }
            }
        }
        let (halves, w0, w1) = split.ok_or_else(|| Error::Winding { cell: cell.label() })?;
        if w0 == w && (cell.s1 - cell.s0).max(cell.t1 - cell.t0) < 1e-7 {
            // A cluster that does not separate is a multiple zero.
            let z = newton(q, halves[0].center(), w as usize, opts.newton_tol);
            found.push(SpectralZero { lambda: z, order: w as usize });
            continue;
        }
        for (h, wh) in halves.into_iter().zip([w0, w1]) {
            if wh > 0 {
                stack.push((h, depth + 1, wh));
            }
        }
    }
    found.sort_by(|a, b| a.lambda.arg().total_cmp(&b.lambda.arg()));
    Ok(found)
}

/// Total winding of `a` around the annulus boundary.
pub fn winding_number(q: &LatticeState, r_in: f64, r_out: f64) -> Result<i64> {
    let mut total = 0;
    for k in 0..8 {
        let cell = Cell { s0: r_in.ln(), s1: r_out.ln(), t0: k as f64 * PI / 4.0, t1: (k + 1) as f64 * PI / 4.0 };
        total += winding(q, &cell)?;
    }
    Ok(total)
}

/// Norming coefficients with a conditioning estimate.
#[derive(Clone, Debug, PartialEq)]
pub struct NormingResult {
    pub betas: Vec<C64>,
    pub cond: f64,
}

type Vec2 = [Series; 2];

/// Left Jost column `Y⁻₁(n_c)` as a series in `ε`.
fn jost_left(q: &LatticeState, lambda0: C64, len: usize, n_c: i64) -> Vec2 {
    let inv = Series::linear_pow(lambda0, -1, len);
    let mut y = [Series::constant(C64::new(1.0, 0.0), len), Series::zero(len)];
    for (n, qn) in nonzero(q) {
        if n >= n_c {
            break;
        }
        let y0 = y[0].add(&inv.mul(&y[1]).scale(qn));
        let y1 = y[0].scale(-qn.conj()).add(&inv.mul(&y[1]));
        y = [y0, y1];
    }
    y
}

/// Right Jost column `Y⁺₂(n_c)` as a series in `ε`, recursed backward from
/// `(0, 1)` beyond the window.
fn jost_right(q: &LatticeState, lambda0: C64, len: usize, n_c: i64) -> Vec2 {
    let inv = Series::linear_pow(lambda0, -1, len);
    let mut y = [Series::zero(len), Series::constant(C64::new(1.0, 0.0), len)];
    for k in (0..q.len()).rev() {
        let n = q.n0 + k as i64;
        if n < n_c {
            break;
        }
        let qn = q.q[k];
        let s = 1.0 / (1.0 + qn.norm_sqr());
        // (λ(1+|q|²))⁻¹ [[1, -q], [q̄ λ, λ]]
        let y0 = inv.mul(&y[0].add(&y[1].scale(-qn))).scale(C64::from(s));
        let y1 = y[0].scale(qn.conj()).add(&y[1]).scale(C64::from(s));
        y = [y0, y1];
    }
    y
}

/// `β_0, …, β_{α-1}` at a zero `λ_j` of order `α` from the relation
/// `Y⁻₁(n) = β(λ) λ^{-n} Y⁺₂(n) mod (λ - λ_j)^α` at the window center.
pub fn norming_constants(q: &LatticeState, lambda: C64, order: usize) -> Result<NormingResult> {
    check_lambda(lambda)?;
    if order == 0 {
        return Err(Error::invalid("pole order must be positive"));
    }
    let (lo, hi) = match q.support(0.0) {
        Some(s) => s,
        None => return Err(Error::Inconsistent("zero potential has no discrete spectrum".into())),
    };
    let n_c = (lo + hi + 1).div_euclid(2);
    let left = jost_left(q, lambda, order, n_c);
    let right = jost_right(q, lambda, order, n_c);
    let k = if right[0].coeff(0).norm() >= right[1].coeff(0).norm() { 0 } else { 1 };
    let pivot = right[k].coeff(0);
    let scale = right[0].coeff(0).norm().max(right[1].coeff(0).norm());
    if pivot.norm() == 0.0 {
        return Err(Error::Singular { cond: f64::INFINITY });
    }
    let lam_pow = Series::linear_pow(lambda, n_c, order);
    let beta = lam_pow.mul(&left[k]).div(&right[k]);
    let betas = taylor_to_derivatives(&beta);
    let resid = {
        let other = 1 - k;
        let pred = beta.mul(&Series::linear_pow(lambda, -n_c, order)).mul(&right[other]);
        (0..order).map(|j| (pred.coeff(j) - left[other].coeff(j)).norm()).fold(0.0, f64::max)
    };
    let lscale = left[0].coeff(0).norm().max(left[1].coeff(0).norm());
    let cond = (lscale.max(1.0) / scale) * (1.0 + resid / lscale.max(1e-300));
    if betas[0].norm() < 1e-10 {
        return Err(Error::Inconsistent(format!("|beta_0| = {:.3e} at lambda = {lambda}", betas[0].norm())));
    }
    Ok(NormingResult { betas, cond })
}

/// Zeros of `a` in the annulus with their norming coefficients.
pub fn extract_spectrum(q: &LatticeState, r_in: f64, r_out: f64) -> Result<DiscreteSpectrum> {
    let zeros = find_spectrum(q, r_in, r_out)?;
    let mut poles = Vec::with_capacity(zeros.len());
    for z in zeros {
        let nc = norming_constants(q, z.lambda, z.order)?;
        poles.push(Pole { lambda: z.lambda, order: z.order, betas: nc.betas });
    }
    DiscreteSpectrum::new(poles)
}

/// Trim the window to sites with `|q_n| > threshold`; returns the trimmed
/// state and the discarded `ℓ¹` mass.
pub fn truncate_support(q: &LatticeState, threshold: f64) -> Result<(LatticeState, f64)> {
    let Some((lo, hi)) = q.support(threshold) else {
        let mass = q.q.iter().map(|z| z.norm()).sum();
        return Ok((LatticeState::zeros(-1, 1, q.t)?, mass));
    };
    let (lo, hi) = (lo - 1, hi + 1);
    let mass: f64 = q.sites().zip(&q.q).filter(|(n, _)| *n < lo || *n > hi).map(|(_, z)| z.norm()).sum();
    let trimmed = LatticeState::from_fn(lo, hi, q.t, |n| q.at(n))?;
    Ok((trimmed, mass))
}

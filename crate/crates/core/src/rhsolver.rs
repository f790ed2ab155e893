//! Beals–Coifman solver on the three concentric circles `|λ| = ρ, 1, 1/ρ`.
//!
//! After pole removal the jump data are
//!
//! ```text
//! |λ| = 1   : w₋ = [[0, c̄ e^φ], [0, 0]],  w₊ = [[0, 0], [c e^{-φ}, 0]],  c = r - f
//! |λ| = ρ   : w₊ = [[0, 0], [f e^{-φ}, 0]]
//! |λ| = 1/ρ : w₋ = [[0, f̆ e^φ], [0, 0]],  f̆(λ) = conj f(1/λ̄)
//! ```
//!
//! All circles are oriented clockwise, so `+` is the exterior side, and
//! `M̃_+ = M̃_- (I - w₋)⁻¹ (I + w₊)`. Each circle is discretized on the same
//! uniform angle grid; between concentric circles the Cauchy operator is
//! diagonal in Fourier modes, so every block is circulant.
//!
//! The rows of `μ` decouple, and within a row the first entry only enters
//! through `w₋` and the second only through `w₊`, which reduces each row to
//! a dense system of size `2N`.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::linalg::{condition_number, lu_solve, Mat2};
use crate::phase::exp_phi;
use crate::scattering::ScatteringModel;
use crate::soliton::RationalRemover;
use crate::{Error, Result, C64};

pub const DEFAULT_MODES: usize = 256;
pub const SOLVER_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Orientation {
    Clockwise,
    Counterclockwise,
}

/// Side of a circle for boundary values.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Interior,
    Exterior,
}

/// Fourier coefficients `F_k`, `k = -N/2 .. N/2-1`, of uniform samples,
/// indexed as `k mod N`.
pub fn fourier_coefficients(samples: &[C64]) -> Vec<C64> {
    let n = samples.len();
    let mut buf = samples.to_vec();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let scale = 1.0 / n as f64;
    buf.iter_mut().for_each(|z| *z *= scale);
    buf
}

fn signed_mode(idx: usize, n: usize) -> i64 {
    if idx < n.div_ceil(2) {
        idx as i64
    } else {
        idx as i64 - n as i64
    }
}

/// Cauchy integral `∮ F(ζ) dζ / (2πi(ζ-λ))` of the density sampled uniformly
/// on `|ζ| = radius`. A target on the circle needs a side.
pub fn cauchy_project(
    samples: &[C64],
    radius: f64,
    orientation: Orientation,
    lambda: C64,
    side: Option<Side>,
) -> Result<C64> {
    if samples.is_empty() || !(radius > 0.0) {
        return Err(Error::invalid("cauchy_project needs samples and a positive radius"));
    }
    let on = (lambda.norm() - radius).abs() <= 1e-12 * radius;
    let side = match (on, side) {
        (true, None) => return Err(Error::domain("target on the source circle; declare a side")),
        (true, Some(s)) => s,
        (false, _) => {
            if lambda.norm() < radius {
                Side::Interior
            } else {
                Side::Exterior
            }
        }
    };
    let coeffs = fourier_coefficients(samples);
    let n = samples.len();
    let z = lambda / radius;
    let mut acc = C64::default();
    for (idx, f) in coeffs.iter().enumerate() {
        let k = signed_mode(idx, n);
        match side {
            Side::Interior if k >= 0 => acc += f * z.powi(k as i32),
            Side::Exterior if k < 0 => acc -= f * z.powi(k as i32),
            _ => {}
        }
    }
    Ok(match orientation {
        Orientation::Counterclockwise => acc,
        Orientation::Clockwise => -acc,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Circle {
    pub radius: f64,
    pub orientation: Orientation,
}

/// Sampled jump data of the three-circle problem at fixed `(n, t)`.
#[derive(Clone, Debug)]
pub struct ContourProblem {
    pub n: i64,
    pub t: f64,
    pub rho: f64,
    /// `[outer ρ, unit, inner 1/ρ]`.
    pub circles: [Circle; 3],
    pub thetas: Vec<f64>,
    /// `(w₊)₂₁` on the unit circle.
    pub w21_unit: Vec<C64>,
    /// `(w₋)₁₂` on the unit circle.
    pub w12_unit: Vec<C64>,
    /// `(w₊)₂₁` on `|λ| = ρ`.
    pub w21_outer: Vec<C64>,
    /// `(w₋)₁₂` on `|λ| = 1/ρ`.
    pub w12_inner: Vec<C64>,
}

/// Options for [`build_three_circle_problem`].
#[derive(Clone, Copy, Debug)]
pub struct ContourOptions {
    pub modes: usize,
    /// Outer radius; `None` selects `1.2·max|λ_j|`, or 1.5 without poles.
    pub rho: Option<f64>,
}

impl Default for ContourOptions {
    fn default() -> Self {
        ContourOptions { modes: DEFAULT_MODES, rho: None }
    }
}

pub fn default_rho(remover: &RationalRemover) -> f64 {
    if remover.is_empty() {
        1.5
    } else {
        1.2 * remover.max_pole()
    }
}

impl ContourProblem {
    /// Problem from given jump samples on a uniform grid of `len` angles.
    pub fn from_samples(
        n: i64,
        t: f64,
        rho: f64,
        w21_unit: Vec<C64>,
        w12_unit: Vec<C64>,
        w21_outer: Vec<C64>,
        w12_inner: Vec<C64>,
    ) -> Result<Self> {
        let len = w21_unit.len();
        if len < 4 || [w12_unit.len(), w21_outer.len(), w12_inner.len()].iter().any(|&l| l != len) {
            return Err(Error::invalid("jump samples must share one grid of at least 4 points"));
        }
        if !(rho > 1.0) {
            return Err(Error::invalid("rho must exceed 1"));
        }
        let all = w21_unit.iter().chain(&w12_unit).chain(&w21_outer).chain(&w12_inner);
        if all.into_iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::Overflow { t });
        }
        let cw = Orientation::Clockwise;
        Ok(ContourProblem {
            n,
            t,
            rho,
            circles: [
                Circle { radius: rho, orientation: cw },
                Circle { radius: 1.0, orientation: cw },
                Circle { radius: rho.recip(), orientation: cw },
            ],
            thetas: (0..len).map(|j| 2.0 * PI * j as f64 / len as f64).collect(),
            w21_unit,
            w12_unit,
            w21_outer,
            w12_inner,
        })
    }

    pub fn modes(&self) -> usize {
        self.thetas.len()
    }

    pub fn max_w(&self) -> f64 {
        self.w21_unit
            .iter()
            .chain(&self.w12_unit)
            .chain(&self.w21_outer)
            .chain(&self.w12_inner)
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    pub fn is_trivial(&self) -> bool {
        self.max_w() == 0.0
    }

    /// `(w₊, w₋)` on circle `k` (0 outer, 1 unit, 2 inner) at grid point `j`.
    pub fn w_at(&self, k: usize, j: usize) -> (Mat2, Mat2) {
        let z = C64::default();
        match k {
            0 => (Mat2::new(z, z, self.w21_outer[j], z), Mat2::ZERO),
            1 => (Mat2::new(z, z, self.w21_unit[j], z), Mat2::new(z, self.w12_unit[j], z, z)),
            _ => (Mat2::ZERO, Mat2::new(z, self.w12_inner[j], z, z)),
        }
    }

    /// `(I - w₋)⁻¹ (I + w₊)` on circle `k` at grid point `j`.
    pub fn jump_at(&self, k: usize, j: usize) -> Mat2 {
        let (wp, wm) = self.w_at(k, j);
        (Mat2::IDENTITY - wm).inv() * (Mat2::IDENTITY + wp)
    }

    /// Largest deviation of the unit-circle jump from `V` and from `V†`.
    pub fn unit_jump_checks(&self) -> (f64, f64) {
        let mut dev = 0.0f64;
        let mut herm = 0.0f64;
        for j in 0..self.modes() {
            let v = self.jump_at(1, j);
            let ce = self.w21_unit[j];
            let cbe = self.w12_unit[j];
            let want = Mat2::new(1.0 + ce * cbe, cbe, ce, C64::new(1.0, 0.0));
            dev = dev.max((v - want).norm_max());
            herm = herm.max((v - v.conj_transpose()).norm_max());
        }
        (dev, herm)
    }
}

/// Sample the three-circle problem for `(n, t)`.
pub fn build_three_circle_problem(
    model: &dyn ScatteringModel,
    remover: &RationalRemover,
    n: i64,
    t: f64,
    opts: ContourOptions,
) -> Result<ContourProblem> {
    if opts.modes < 8 {
        return Err(Error::invalid("at least 8 modes are needed"));
    }
    let rho = opts.rho.unwrap_or_else(|| default_rho(remover));
    if !(rho > 1.0) {
        return Err(Error::invalid("rho must exceed 1"));
    }
    for f in &remover.factors {
        let m = f.lambda.norm();
        if m >= rho * (1.0 - 1e-6) {
            return Err(Error::domain(format!("pole {} is not inside |λ| = {rho}; increase rho", f.lambda)));
        }
    }
    let len = opts.modes;
    let mut w21_unit = Vec::with_capacity(len);
    let mut w12_unit = Vec::with_capacity(len);
    let mut w21_outer = Vec::with_capacity(len);
    let mut w12_inner = Vec::with_capacity(len);
    for j in 0..len {
        let th = 2.0 * PI * j as f64 / len as f64;
        let u = C64::from_polar(1.0, th);
        let c = model.r(u) - remover.eval(u);
        w21_unit.push(c * exp_phi(u, n, t, -1)?);
        w12_unit.push(c.conj() * exp_phi(u, n, t, 1)?);
        let outer = u * rho;
        let inner = u / rho;
        if remover.is_empty() {
            w21_outer.push(C64::default());
            w12_inner.push(C64::default());
        } else {
            w21_outer.push(remover.eval(outer) * exp_phi(outer, n, t, -1)?);
            w12_inner.push(remover.eval_mirror(inner) * exp_phi(inner, n, t, 1)?);
        }
    }
    ContourProblem::from_samples(n, t, rho, w21_unit, w12_unit, w21_outer, w12_inner)
}

/// Source-to-target Cauchy operator between clockwise circles, as a
/// first-column kernel of a circulant matrix.
#[derive(Clone, Copy, Debug)]
enum Kernel {
    /// Boundary value `C₊` on the source circle itself.
    SelfPlus,
    SelfMinus,
    /// Target radius / source radius.
    Cross(f64),
}

fn kernel_multipliers(kind: Kernel, len: usize) -> Vec<C64> {
    let mut mult = vec![C64::default(); len];
    for (idx, m) in mult.iter_mut().enumerate() {
        let k = signed_mode(idx, len);
        *m = match kind {
            Kernel::SelfPlus if k < 0 => C64::new(1.0, 0.0),
            Kernel::SelfMinus if k >= 0 => C64::new(-1.0, 0.0),
            Kernel::Cross(ratio) if ratio < 1.0 && k >= 0 => C64::new(-ratio.powi(k as i32), 0.0),
            Kernel::Cross(ratio) if ratio > 1.0 && k < 0 => C64::new(ratio.powi(k as i32), 0.0),
            _ => C64::default(),
        };
    }
    mult
}

fn kernel_column(kind: Kernel, len: usize) -> Vec<C64> {
    let mut mult = kernel_multipliers(kind, len);
    FftPlanner::new().plan_fft_inverse(len).process(&mut mult);
    let scale = 1.0 / len as f64;
    mult.iter().map(|z| z * scale).collect()
}

/// `B A` for `B = [[K₀₀ D₀, K₀₁ D₁], [K₁₀ D₀, K₁₁ D₁]]`, with circulant `K`
/// given by mode multipliers and diagonal `D = diag(w)`, applied to every
/// column of `A` through FFTs.
fn apply_block_operator(kernels: [[&[C64]; 2]; 2], w: [&[C64]; 2], a: &DMatrix<C64>) -> DMatrix<C64> {
    let len = w[0].len();
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(len);
    let inv = planner.plan_fft_inverse(len);
    let scale = 1.0 / len as f64;
    let mut out = DMatrix::<C64>::zeros(2 * len, a.ncols());
    let mut spec = [vec![C64::default(); len], vec![C64::default(); len]];
    let mut acc = vec![C64::default(); len];
    for col in 0..a.ncols() {
        let x = a.column(col);
        for blk in 0..2 {
            for j in 0..len {
                spec[blk][j] = w[blk][j] * x[blk * len + j];
            }
            fwd.process(&mut spec[blk]);
        }
        for row in 0..2 {
            for j in 0..len {
                acc[j] = kernels[row][0][j] * spec[0][j] + kernels[row][1][j] * spec[1][j];
            }
            inv.process(&mut acc);
            for j in 0..len {
                out[(row * len + j, col)] = acc[j] * scale;
            }
        }
    }
    out
}

/// Dense block `K · diag(w)` written into `out` at `(row0, col0)`.
fn fill_block(out: &mut DMatrix<C64>, row0: usize, col0: usize, kernel: &[C64], w: &[C64]) {
    let len = w.len();
    for i in 0..len {
        for j in 0..len {
            out[(row0 + i, col0 + j)] = kernel[(i + len - j) % len] * w[j];
        }
    }
}

/// Boundary function of the Beals–Coifman equation for both rows.
#[derive(Clone, Debug)]
pub struct BCSolution {
    /// `μ[row][0]` on the unit circle, then on `|λ| = 1/ρ`.
    pub mu1: [Vec<C64>; 2],
    /// `μ[row][1]` on the unit circle, then on `|λ| = ρ`.
    pub mu2: [Vec<C64>; 2],
    pub residual: f64,
    pub cond: f64,
}

/// Solve `(Id - C_w) μ = I`.
pub fn solve_bc(problem: &ContourProblem) -> Result<BCSolution> {
    let len = problem.modes();
    let rho = problem.rho;
    let one = vec![C64::new(1.0, 0.0); 2 * len];
    let zero = vec![C64::default(); 2 * len];
    if problem.is_trivial() {
        return Ok(BCSolution {
            mu1: [one.clone(), zero.clone()],
            mu2: [zero, one],
            residual: 0.0,
            cond: 1.0,
        });
    }
    // μ₁ on [unit, inner] = e₁ + A μ₂ on [unit, outer];
    // μ₂ on [unit, outer] = e₂ + B μ₁ on [unit, inner].
    let mut a = DMatrix::<C64>::zeros(2 * len, 2 * len);
    fill_block(&mut a, 0, 0, &kernel_column(Kernel::SelfMinus, len), &problem.w21_unit);
    fill_block(&mut a, 0, len, &kernel_column(Kernel::Cross(1.0 / rho), len), &problem.w21_outer);
    fill_block(&mut a, len, 0, &kernel_column(Kernel::Cross(1.0 / rho), len), &problem.w21_unit);
    fill_block(&mut a, len, len, &kernel_column(Kernel::Cross(1.0 / (rho * rho)), len), &problem.w21_outer);
    let mut b = DMatrix::<C64>::zeros(2 * len, 2 * len);
    fill_block(&mut b, 0, 0, &kernel_column(Kernel::SelfPlus, len), &problem.w12_unit);
    fill_block(&mut b, 0, len, &kernel_column(Kernel::Cross(rho), len), &problem.w12_inner);
    fill_block(&mut b, len, 0, &kernel_column(Kernel::Cross(rho), len), &problem.w12_unit);
    fill_block(&mut b, len, len, &kernel_column(Kernel::Cross(rho * rho), len), &problem.w12_inner);

    let k_self = kernel_multipliers(Kernel::SelfPlus, len);
    let k_cross = kernel_multipliers(Kernel::Cross(rho), len);
    let k_far = kernel_multipliers(Kernel::Cross(rho * rho), len);
    let ba = apply_block_operator(
        [[&k_self, &k_cross], [&k_cross, &k_far]],
        [&problem.w12_unit, &problem.w12_inner],
        &a,
    );
    let id = DMatrix::<C64>::identity(2 * len, 2 * len);
    let s = &id - &ba;
    // Right-hand sides for the two rows: e₂ + B e₁ with e = (1, 0) and (0, 1).
    let e1 = DMatrix::from_column_slice(2 * len, 1, &one);
    let be = &b * &e1;
    let mut rhs = DMatrix::<C64>::zeros(2 * len, 2);
    rhs.set_column(0, &be.column(0));
    rhs.set_column(1, &e1.column(0));
    let sol = match lu_solve(s.clone(), &rhs) {
        Ok(x) => x,
        Err(_) => return Err(Error::Singular { cond: condition_number(&s) }),
    };
    let mut mu1 = [Vec::new(), Vec::new()];
    let mut mu2 = [Vec::new(), Vec::new()];
    let mut residual = 0.0f64;
    for row in 0..2 {
        let m2 = sol.column(row).into_owned();
        let e1_row = if row == 0 { e1.clone() } else { DMatrix::zeros(2 * len, 1) };
        let m1 = &e1_row + &a * &m2;
        let e2_row: DMatrix<C64> = if row == 1 { e1.clone() } else { DMatrix::zeros(2 * len, 1) };
        let r2 = &m2 - &e2_row - &b * &m1;
        residual = residual.max(r2.iter().map(|z| z.norm()).fold(0.0, f64::max));
        mu1[row] = m1.iter().copied().collect();
        mu2[row] = m2.iter().copied().collect();
    }
    if !residual.is_finite() || residual > SOLVER_TOL {
        return Err(Error::Convergence(format!("Beals–Coifman residual {residual:e}")));
    }
    Ok(BCSolution { mu1, mu2, residual, cond: f64::NAN })
}

impl BCSolution {
    /// `μ` as a matrix at grid point `j` of circle `k`, where it is defined
    /// (entries that never enter the equations are reported as identity
    /// entries).
    pub fn mu_at(&self, k: usize, j: usize, len: usize) -> Mat2 {
        let mut m = Mat2::IDENTITY;
        for row in 0..2 {
            match k {
                0 => m.0[row][1] = self.mu2[row][len + j],
                1 => {
                    m.0[row][0] = self.mu1[row][j];
                    m.0[row][1] = self.mu2[row][j];
                }
                _ => m.0[row][0] = self.mu1[row][len + j],
            }
        }
        m
    }
}

/// Densities `μ w` per circle: `(μ₂ w₂₁, μ₁ w₁₂)` contributions.
struct Densities {
    /// `[row] → (unit, outer)` coefficients of `μ₂ (w₊)₂₁`.
    col1: [(Vec<C64>, Vec<C64>); 2],
    /// `[row] → (unit, inner)` coefficients of `μ₁ (w₋)₁₂`.
    col2: [(Vec<C64>, Vec<C64>); 2],
}

fn densities(problem: &ContourProblem, sol: &BCSolution) -> Densities {
    let len = problem.modes();
    let prod = |m: &[C64], w: &[C64]| -> Vec<C64> {
        fourier_coefficients(&m.iter().zip(w).map(|(a, b)| a * b).collect::<Vec<_>>())
    };
    let mk = |row: usize| {
        (
            (prod(&sol.mu2[row][..len], &problem.w21_unit), prod(&sol.mu2[row][len..], &problem.w21_outer)),
            (prod(&sol.mu1[row][..len], &problem.w12_unit), prod(&sol.mu1[row][len..], &problem.w12_inner)),
        )
    };
    let (a0, b0) = mk(0);
    let (a1, b1) = mk(1);
    Densities { col1: [a0, a1], col2: [b0, b1] }
}

/// Clockwise Cauchy integral from Fourier coefficients on radius `r`.
fn cw_cauchy(coeffs: &[C64], r: f64, lambda: C64, side: Option<Side>) -> C64 {
    let len = coeffs.len();
    let z = lambda / r;
    let side = side.unwrap_or(if lambda.norm() < r { Side::Interior } else { Side::Exterior });
    let mut acc = C64::default();
    for (idx, f) in coeffs.iter().enumerate() {
        let k = signed_mode(idx, len);
        match side {
            Side::Interior if k >= 0 => acc -= f * z.powi(k as i32),
            Side::Exterior if k < 0 => acc += f * z.powi(k as i32),
            _ => {}
        }
    }
    acc
}

fn reconstruct_inner(problem: &ContourProblem, d: &Densities, lambda: C64, on: Option<(usize, Side)>) -> Mat2 {
    let rho = problem.rho;
    let side_for = |k: usize| on.and_then(|(c, s)| if c == k { Some(s) } else { None });
    let mut m = Mat2::IDENTITY;
    for row in 0..2 {
        let (u, o) = &d.col1[row];
        m.0[row][0] += cw_cauchy(u, 1.0, lambda, side_for(1)) + cw_cauchy(o, rho, lambda, side_for(0));
        let (u, i) = &d.col2[row];
        m.0[row][1] += cw_cauchy(u, 1.0, lambda, side_for(1)) + cw_cauchy(i, 1.0 / rho, lambda, side_for(2));
    }
    m
}

/// `M̃(λ) = I + C(μ(w₊ + w₋))(λ)` off the circles.
pub fn reconstruct(problem: &ContourProblem, sol: &BCSolution, lambda: C64) -> Result<Mat2> {
    let r = lambda.norm();
    for c in &problem.circles {
        if (r - c.radius).abs() <= 1e-12 * c.radius {
            return Err(Error::domain("lambda on a contour circle; use reconstruct_boundary"));
        }
    }
    Ok(reconstruct_inner(problem, &densities(problem, sol), lambda, None))
}

/// Boundary value of `M̃` on circle `k` (0 outer, 1 unit, 2 inner) at any
/// angle, `Exterior` being the `+` side.
pub fn reconstruct_boundary(problem: &ContourProblem, sol: &BCSolution, k: usize, theta: f64, side: Side) -> Result<Mat2> {
    let c = problem.circles.get(k).ok_or_else(|| Error::invalid("circle index out of range"))?;
    let lambda = C64::from_polar(c.radius, theta);
    Ok(reconstruct_inner(problem, &densities(problem, sol), lambda, Some((k, side))))
}

/// `M̃(0)`, using only the mean of each density.
pub fn reconstruct_at_zero(problem: &ContourProblem, sol: &BCSolution) -> Mat2 {
    let d = densities(problem, sol);
    let mut m = Mat2::IDENTITY;
    for row in 0..2 {
        m.0[row][0] -= d.col1[row].0[0] + d.col1[row].1[0];
        m.0[row][1] -= d.col2[row].0[0] + d.col2[row].1[0];
    }
    m
}

/// Result of a full solve for one `(n, t)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RhReport {
    pub n: i64,
    pub t: f64,
    pub q: C64,
    pub residual: f64,
    pub rho: f64,
    pub modes: usize,
    pub max_w: f64,
}

/// `q_n(t) = M̃₁₂(0; n+1, t)` from the three-circle problem.
pub fn reconstruct_q(
    model: &dyn ScatteringModel,
    remover: &RationalRemover,
    n: i64,
    t: f64,
    opts: ContourOptions,
) -> Result<RhReport> {
    let problem = build_three_circle_problem(model, remover, n + 1, t, opts)?;
    let sol = solve_bc(&problem)?;
    let m = reconstruct_at_zero(&problem, &sol);
    Ok(RhReport {
        n,
        t,
        q: m.0[0][1],
        residual: sol.residual,
        rho: problem.rho,
        modes: problem.modes(),
        max_w: problem.max_w(),
    })
}

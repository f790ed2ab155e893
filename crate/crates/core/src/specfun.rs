//! Complex log-gamma, parabolic cylinder functions and the explicit
//! parabolic cylinder model problem.

use std::f64::consts::{FRAC_PI_4, PI};

use serde::{Deserialize, Serialize};

use crate::linalg::Mat2;
use crate::{c, Error, Result, C64, I};

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// `B_{2k} / (2k (2k-1))` for `k = 1..=10`.
const STIRLING: [f64; 10] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360360.0,
    1.0 / 156.0,
    -3617.0 / 122400.0,
    43867.0 / 244188.0,
    -174611.0 / 125400.0,
];

fn is_nonpositive_integer(z: C64) -> bool {
    z.im == 0.0 && z.re <= 0.0 && z.re == z.re.round()
}

/// `sin(πz)` with the real part reduced first.
fn sin_pi(z: C64) -> C64 {
    let k = z.re.round();
    let w = C64::new(z.re - k, z.im);
    let s = (PI * w).sin();
    if (k as i64).rem_euclid(2) == 0 {
        s
    } else {
        -s
    }
}

/// `ln Γ(z)`. For `Re z ≥ 1/2` this is the branch continuous from the positive
/// real axis; to the left it is defined modulo `2πi`.
pub fn log_gamma(z: C64) -> Result<C64> {
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::domain("log_gamma of non-finite argument"));
    }
    if is_nonpositive_integer(z) {
        return Err(Error::domain(format!("log_gamma pole at {}", z.re)));
    }
    if z.re < 0.5 {
        let s = sin_pi(z);
        return Ok(C64::from(PI.ln()) - s.ln() - log_gamma(1.0 - z)?);
    }
    let mut shift = C64::default();
    let mut w = z;
    while w.re < 15.0 {
        shift += w.ln();
        w += 1.0;
    }
    let inv = w.inv();
    let inv2 = inv * inv;
    let mut corr = C64::default();
    let mut p = inv;
    for b in STIRLING {
        corr += b * p;
        p *= inv2;
    }
    Ok((w - 0.5) * w.ln() - w + LN_SQRT_2PI + corr - shift)
}

pub fn gamma(z: C64) -> Result<C64> {
    Ok(log_gamma(z)?.exp())
}

/// `1/Γ(z)`, entire; zero at the nonpositive integers.
pub fn rgamma(z: C64) -> C64 {
    match log_gamma(z) {
        Ok(v) => (-v).exp(),
        Err(_) => C64::default(),
    }
}

/// `ν(τ) = ln(1 + |τ|²) / 2π`.
pub fn nu_of_tau(tau: C64) -> f64 {
    tau.norm_sqr().ln_1p() / (2.0 * PI)
}

fn gamma_pair(tau: C64, nu: f64) -> Result<(C64, C64)> {
    if tau == C64::default() {
        return Err(Error::domain("gamma12 needs tau != 0"));
    }
    let s = (2.0 * PI).sqrt();
    let g1 = s * (I * FRAC_PI_4 - PI * nu / 2.0 - log_gamma(-I * nu)?).exp() / tau;
    let g2 = s * (-I * FRAC_PI_4 - PI * nu / 2.0 - log_gamma(I * nu)?).exp() / tau.conj();
    Ok((g1, g2))
}

/// `γ₁ = √(2π) e^{iπ/4 - πν/2} / (τ Γ(-iν))`, `γ₂ = √(2π) e^{-iπ/4 - πν/2} / (τ̄ Γ(iν))`.
pub fn gamma12(tau: C64) -> Result<(C64, C64)> {
    gamma_pair(tau, nu_of_tau(tau))
}

/// Asymptotic expansion of `D_a(z)` and `D_a'(z)`, valid for `|arg z| < 3π/4`.
fn pcf_asymptotic(a: C64, z: C64) -> Result<(C64, C64)> {
    let x = 1.0 / (2.0 * z * z);
    let mut term = C64::from(1.0);
    let mut sum = term;
    let mut dsum = C64::default();
    let mut last = f64::INFINITY;
    let mut converged = false;
    for k in 0..80 {
        let kf = k as f64;
        let next = -term * (a - 2.0 * kf) * (a - 2.0 * kf - 1.0) * x / (kf + 1.0);
        let mag = next.norm();
        if mag > last && k > 4 {
            break;
        }
        last = mag;
        sum += next;
        dsum += next * (-2.0 * (kf + 1.0)) / z;
        term = next;
        if mag < 1e-17 * sum.norm() {
            converged = true;
            break;
        }
    }
    if !converged && last > 1e-10 * sum.norm() {
        return Err(Error::Convergence(format!(
            "D_a asymptotic series at |z| = {:.3} stalls at relative term {:.2e}",
            z.norm(),
            last / sum.norm()
        )));
    }
    let pre = (a * z.ln() - z * z / 4.0).exp();
    let d = pre * sum;
    let dp = d * (a / z - z / 2.0) + pre * dsum;
    Ok((d, dp))
}

/// Integrate `D'' = (z²/4 - a - 1/2) D` along the segment `z0 → z1` by
/// local Taylor series.
fn pcf_ode(a: C64, z0: C64, d0: C64, dp0: C64, z1: C64) -> (C64, C64) {
    let span = z1 - z0;
    let steps = (span.norm() / 0.25).ceil().max(1.0) as usize;
    let h = span / steps as f64;
    let (mut z, mut d, mut dp) = (z0, d0, dp0);
    let mut coef = [C64::default(); 96];
    for _ in 0..steps {
        let p0 = z * z / 4.0 - a - 0.5;
        let p1 = z / 2.0;
        coef[0] = d;
        coef[1] = dp;
        let mut val = d + dp * h;
        let mut der = dp;
        let mut hp = h;
        let scale = d.norm() + (dp * h).norm();
        let mut small = 0;
        for k in 0..coef.len() - 2 {
            let mut rhs = p0 * coef[k];
            if k >= 1 {
                rhs += p1 * coef[k - 1];
            }
            if k >= 2 {
                rhs += 0.25 * coef[k - 2];
            }
            let next = rhs / ((k + 2) as f64 * (k + 1) as f64);
            coef[k + 2] = next;
            der += (k + 2) as f64 * next * hp;
            hp *= h;
            let contrib = next * hp;
            val += contrib;
            if contrib.norm() <= 1e-18 * scale.max(val.norm()) {
                small += 1;
                if small >= 3 {
                    break;
                }
            } else {
                small = 0;
            }
        }
        z += h;
        d = val;
        dp = der;
    }
    (d, dp)
}

const PCF_RADIUS: f64 = 12.0;

fn pcf_origin(a: C64) -> (C64, C64) {
    let sqrt_pi = PI.sqrt();
    let two = C64::from(2.0);
    let d0 = two.powc(a / 2.0) * sqrt_pi * rgamma((1.0 - a) / 2.0);
    let dp0 = -two.powc((a + 1.0) / 2.0) * sqrt_pi * rgamma(-a / 2.0);
    (d0, dp0)
}

/// `D_a(z)` for `|z| < R`: inward from the asymptotic regime where `D_a` is
/// recessive, outward from the origin elsewhere.
fn pcf_inner(a: C64, z: C64) -> Result<C64> {
    let arg = z.arg();
    if arg.abs() < FRAC_PI_4 {
        let start = C64::from_polar(PCF_RADIUS, arg);
        let (d, dp) = pcf_asymptotic(a, start)?;
        Ok(pcf_ode(a, start, d, dp, z).0)
    } else {
        let (d0, dp0) = pcf_origin(a);
        Ok(pcf_ode(a, C64::default(), d0, dp0, z).0)
    }
}

/// Parabolic cylinder function `D_a(z)`, the solution of
/// `D'' = (z²/4 - a - 1/2) D` decaying along the positive real axis.
pub fn pcf_d(a: C64, z: C64) -> Result<C64> {
    if !(a.re.is_finite() && a.im.is_finite() && z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::domain("pcf_d of non-finite argument"));
    }
    if z.norm() < PCF_RADIUS {
        return pcf_inner(a, z);
    }
    if z.re >= 0.0 {
        return Ok(pcf_asymptotic(a, z)?.0);
    }
    let k = (2.0 * PI).sqrt() * rgamma(-a);
    let (sgn, rot) = if z.im >= 0.0 { (1.0, -I) } else { (-1.0, I) };
    let first = (sgn * I * PI * a).exp() * pcf_asymptotic(a, -z)?.0;
    if k == C64::default() {
        return Ok(first);
    }
    let second = k * (sgn * I * PI * (a + 1.0) / 2.0).exp() * pcf_asymptotic(-a - 1.0, rot * z)?.0;
    Ok(first + second)
}

/// Which form of the model solution to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PcVariant {
    /// The displayed solution with `ν = ν(τ)` and coefficients `γ₁, γ₂`.
    Printed,
    /// `ν = -ν(τ)`, off-diagonal coefficients `γ₁(ν), -γ₂(ν)`; this form is
    /// continuous across the real axis.
    Consistent,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PCModelParams {
    pub tau: C64,
    pub nu: f64,
    pub gamma1: C64,
    pub gamma2: C64,
    pub variant: PcVariant,
}

impl PCModelParams {
    pub fn new(tau: C64) -> Result<Self> {
        let nu = nu_of_tau(tau);
        let (gamma1, gamma2) = gamma_pair(tau, nu)?;
        Ok(PCModelParams { tau, nu, gamma1, gamma2, variant: PcVariant::Printed })
    }

    pub fn consistent(tau: C64) -> Result<Self> {
        let nu = -nu_of_tau(tau);
        let (g1, g2) = gamma_pair(tau, nu)?;
        Ok(PCModelParams { tau, nu, gamma1: g1, gamma2: -g2, variant: PcVariant::Consistent })
    }

    pub fn with_variant(tau: C64, variant: PcVariant) -> Result<Self> {
        match variant {
            PcVariant::Printed => Self::new(tau),
            PcVariant::Consistent => Self::consistent(tau),
        }
    }

    /// Coefficient of `1/ζ` in the large-`ζ` expansion.
    pub fn residue(&self) -> Mat2 {
        Mat2::new(C64::default(), -I * self.gamma1, I * self.gamma2, C64::default())
    }
}

/// Sector index `1..=6` of `ζ`: `Ω₁ = (0, π/4)`, `Ω₂ = (π/4, 3π/4)`,
/// `Ω₃ = (3π/4, π)`, `Ω₄ = (π, 5π/4)`, `Ω₅ = (5π/4, 7π/4)`, `Ω₆ = (7π/4, 2π)`.
pub fn pc_sector(zeta: C64) -> usize {
    let mut a = zeta.arg();
    if a < 0.0 {
        a += 2.0 * PI;
    }
    match (a / FRAC_PI_4).floor() as i64 {
        0 => 1,
        1 | 2 => 2,
        3 => 3,
        4 => 4,
        5 | 6 => 5,
        _ => 6,
    }
}

fn pc_q(sector: usize, tau: C64) -> Mat2 {
    let t2 = 1.0 + tau.norm_sqr();
    match sector {
        1 => Mat2::lower(-tau),
        3 => Mat2::upper(-tau.conj() / t2),
        4 => Mat2::lower(tau / t2),
        6 => Mat2::upper(tau.conj()),
        _ => Mat2::IDENTITY,
    }
}

fn pc_phi(zeta: C64, p: &PCModelParams, upper: bool) -> Result<Mat2> {
    let nu = p.nu;
    let inu = I * nu;
    let e = |x: f64| C64::from_polar(1.0, x);
    let (m11, m12, m21, m22) = if upper {
        (
            (-3.0 * PI * nu / 4.0).exp() * pcf_d(inu, e(-3.0 * FRAC_PI_4) * zeta)?,
            -I * p.gamma1 * (PI * (nu - I) / 4.0).exp() * pcf_d(-inu - 1.0, e(-FRAC_PI_4) * zeta)?,
            I * p.gamma2 * (-3.0 * PI * (nu + I) / 4.0).exp() * pcf_d(inu - 1.0, e(-3.0 * FRAC_PI_4) * zeta)?,
            (PI * nu / 4.0).exp() * pcf_d(-inu, e(-FRAC_PI_4) * zeta)?,
        )
    } else {
        (
            (PI * nu / 4.0).exp() * pcf_d(inu, e(FRAC_PI_4) * zeta)?,
            -I * p.gamma1 * (-3.0 * PI * (nu - I) / 4.0).exp() * pcf_d(-inu - 1.0, e(3.0 * FRAC_PI_4) * zeta)?,
            I * p.gamma2 * (PI * (nu + I) / 4.0).exp() * pcf_d(inu - 1.0, e(FRAC_PI_4) * zeta)?,
            (-3.0 * PI * nu / 4.0).exp() * pcf_d(-inu, e(3.0 * FRAC_PI_4) * zeta)?,
        )
    };
    Ok(Mat2::new(m11, m12, m21, m22))
}

/// `ζ^{-iνσ₃} e^{iζ²σ₃/4}`.
fn pc_scalar(zeta: C64, nu: f64) -> Mat2 {
    let w = -I * nu * zeta.ln() + I * zeta * zeta / 4.0;
    Mat2::diag(w.exp(), (-w).exp())
}

/// Evaluate `Φ Q ζ^{-iνσ₃} e^{iζ²σ₃/4}` with `Φ` taken from the given
/// half-plane and `Q` from the given sector.
pub fn pc_model_in(zeta: C64, p: &PCModelParams, sector: usize, upper: bool) -> Result<Mat2> {
    if zeta == C64::default() {
        return Err(Error::domain("pc_model at zeta = 0"));
    }
    Ok(pc_phi(zeta, p, upper)? * pc_q(sector, p.tau) * pc_scalar(zeta, p.nu))
}

/// The explicit model solution off the rays and the real axis.
pub fn pc_model_with(zeta: C64, p: &PCModelParams) -> Result<Mat2> {
    let s = pc_sector(zeta);
    pc_model_in(zeta, p, s, zeta.im > 0.0 || (zeta.im == 0.0 && zeta.re < 0.0))
}

/// The explicit model solution in its displayed form.
pub fn pc_model(zeta: C64, tau: C64) -> Result<Mat2> {
    pc_model_with(zeta, &PCModelParams::new(tau)?)
}

/// Ray index `1..=4` at `arg ζ = (2k-1)π/4`.
pub fn pc_ray_point(k: usize, radius: f64) -> C64 {
    C64::from_polar(radius, (2 * k - 1) as f64 * FRAC_PI_4)
}

/// Jump matrix on ray `k` at `ζ`.
pub fn pc_jump(k: usize, zeta: C64, tau: C64, nu: f64) -> Mat2 {
    let t2 = 1.0 + tau.norm_sqr();
    let down = (-2.0 * I * nu * zeta.ln() + I * zeta * zeta / 2.0).exp();
    match k {
        1 => Mat2::lower(tau * down),
        2 => Mat2::upper(tau.conj() / t2 / down),
        3 => Mat2::lower(tau / t2 * down),
        _ => Mat2::upper(tau.conj() / down),
    }
}

/// Boundary values `(M₊, M₋)` on ray `k`.
pub fn pc_boundary_values(k: usize, zeta: C64, p: &PCModelParams) -> Result<(Mat2, Mat2)> {
    let (plus, minus) = match k {
        1 => (2, 1),
        2 => (2, 3),
        3 => (4, 5),
        _ => (6, 5),
    };
    let upper = k <= 2;
    Ok((pc_model_in(zeta, p, plus, upper)?, pc_model_in(zeta, p, minus, upper)?))
}

/// Largest `‖M₊ - M₋ V‖` over `points` samples per ray with `|ζ| ∈ [r0, r1]`.
pub fn pc_jump_residual(p: &PCModelParams, r0: f64, r1: f64, points: usize) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for k in 1..=4 {
        for j in 0..points {
            let r = r0 + (r1 - r0) * j as f64 / (points.max(2) - 1) as f64;
            let z = pc_ray_point(k, r);
            let (mp, mm) = pc_boundary_values(k, z, p)?;
            let v = pc_jump(k, z, p.tau, p.nu);
            let res = (mp - mm * v).norm_max() / mp.norm_max().max(1.0);
            worst = worst.max(res);
        }
    }
    Ok(worst)
}

/// Largest deviation of `ζ (M(ζ) - I)` from the `1/ζ` coefficient over
/// `points` directions on `|ζ| = radius`, avoiding rays and the real axis.
pub fn pc_residue_error(p: &PCModelParams, radius: f64, points: usize) -> Result<f64> {
    let want = p.residue();
    let mut worst: f64 = 0.0;
    for j in 0..points {
        let theta = 2.0 * PI * (j as f64 + 0.5) / points as f64 + 0.01;
        let z = C64::from_polar(radius, theta);
        let m = pc_model_with(z, p)?;
        let got = (m - Mat2::IDENTITY).scale(z);
        worst = worst.max((got - want).norm_max());
    }
    Ok(worst)
}

/// `ζ (M(ζ) - I)` averaged over `points` directions on `|ζ| = radius`.
pub fn pc_residue_estimate(p: &PCModelParams, radius: f64, points: usize) -> Result<Mat2> {
    let mut acc = Mat2::ZERO;
    for j in 0..points {
        let theta = 2.0 * PI * (j as f64 + 0.5) / points as f64 + 0.01;
        let z = C64::from_polar(radius, theta);
        let m = pc_model_with(z, p)?;
        acc = acc + (m - Mat2::IDENTITY).scale(z);
    }
    Ok(acc.scale(c(1.0 / points as f64, 0.0)))
}

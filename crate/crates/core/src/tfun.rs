//! The scalar function
//!
//! ```text
//! T(λ) = exp( ∫_A ln(1+|r(ζ)|²) dζ / (2πi(ζ-λ)) ) · ∏_{Z⁺} ((λ-λ_l)/(λ-λ̄_l⁻¹))^{α_l}
//! ```
//!
//! with `A` the arc of the unit circle running counterclockwise from `S₂`
//! through `-i` to `S₁`, and `Z⁺` the poles where `Re φ < 0`. Inside the
//! circle `T = T_out (1+|r|²)` on `A`. For `ξ ≤ -1` the arc is the whole
//! circle and for `ξ ≥ 1` it is empty, which continues the region-I
//! definition across the transition rays.

use std::f64::consts::PI;

use crate::phase::{classify_xi, exp_phi, re_phi_scaled};
use crate::quad::integrate;
use crate::scattering::ScatteringModel;
use crate::soliton::NEUTRAL_BAND;
use crate::spectrum::DiscreteSpectrum;
use crate::{Error, RegionData, Result, C64, I};

const ABS_TOL: f64 = 1e-13;
const REL_TOL: f64 = 1e-12;
/// Points closer than this to the arc use the subtracted integrand.
const NEAR_ARC: f64 = 0.25;
/// Boundary values are refused this close (in angle) to `S₁`, `S₂`.
pub const ENDPOINT_GUARD: f64 = 1e-6;

/// Side of the arc for boundary values. `Plus` is the left of the
/// counterclockwise arc, the inside of the circle.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArcSide {
    Plus,
    Minus,
}

pub struct TFunctionContext<'a> {
    model: &'a dyn ScatteringModel,
    pub spectrum: DiscreteSpectrum,
    pub region: RegionData,
    /// Poles with `Re φ < 0` on this ray.
    pub z_plus: DiscreteSpectrum,
    /// Poles on `Re φ = 0`.
    pub z_neutral: DiscreteSpectrum,
    theta_start: f64,
    theta_end: f64,
}

impl<'a> TFunctionContext<'a> {
    pub fn new(model: &'a dyn ScatteringModel, spectrum: DiscreteSpectrum, xi: f64) -> Result<Self> {
        if !xi.is_finite() {
            return Err(Error::invalid("xi must be finite"));
        }
        spectrum.validate()?;
        let region = classify_xi(xi, crate::phase::DELTA_TRANS);
        let (theta_start, theta_end) = if xi <= -1.0 {
            (0.5 * PI, 2.5 * PI)
        } else if xi >= 1.0 {
            (1.5 * PI, 1.5 * PI)
        } else {
            let s = xi.asin();
            (PI + s, 2.0 * PI - s)
        };
        let z_plus = spectrum.filter(|p| re_phi_scaled(p.lambda, xi) < -NEUTRAL_BAND);
        let z_neutral = spectrum.filter(|p| re_phi_scaled(p.lambda, xi).abs() <= NEUTRAL_BAND);
        Ok(TFunctionContext { model, spectrum, region, z_plus, z_neutral, theta_start, theta_end })
    }

    pub fn xi(&self) -> f64 {
        self.region.xi
    }

    pub fn model(&self) -> &dyn ScatteringModel {
        self.model
    }

    /// Angular extent `(θ_start, θ_end)` of the arc, `θ_start ≤ θ_end`.
    pub fn arc(&self) -> (f64, f64) {
        (self.theta_start, self.theta_end)
    }

    pub fn arc_is_empty(&self) -> bool {
        self.theta_end <= self.theta_start
    }

    fn is_full_circle(&self) -> bool {
        self.theta_end - self.theta_start >= 2.0 * PI - 1e-15
    }

    /// Endpoints `(S₂, S₁)` of the arc.
    fn endpoints(&self) -> (C64, C64) {
        (C64::from_polar(1.0, self.theta_start), C64::from_polar(1.0, self.theta_end))
    }

    /// Angle of `λ` lifted into the arc, if it lies in the arc's sector.
    fn angle_in_arc(&self, lambda: C64) -> Option<f64> {
        if self.arc_is_empty() {
            return None;
        }
        let mut th = lambda.arg();
        while th < self.theta_start {
            th += 2.0 * PI;
        }
        if th <= self.theta_end {
            Some(th)
        } else {
            None
        }
    }

    /// `ln(1+|r|²)` at angle `θ`.
    pub fn ell(&self, theta: f64) -> f64 {
        self.model.r(C64::from_polar(1.0, theta)).norm_sqr().ln_1p()
    }

    /// `∏_{Z⁺} ((λ-λ_l)/(λ-λ̄_l⁻¹))^{α_l}`.
    pub fn pole_product(&self, lambda: C64) -> C64 {
        self.z_plus.blaschke(lambda)
    }

    /// `∫_A dζ/(ζ-λ)`: the chord logarithm plus `2πi` inside the lens between
    /// the chord and the arc.
    fn arc_log(&self, lambda: C64) -> C64 {
        if self.arc_is_empty() {
            return C64::default();
        }
        if self.is_full_circle() {
            return if lambda.norm() < 1.0 { 2.0 * PI * I } else { C64::default() };
        }
        let (s2, s1) = self.endpoints();
        let chord = ((s1 - lambda) / (s2 - lambda)).ln();
        let xi = self.xi();
        if lambda.norm() < 1.0 && lambda.im < -xi {
            chord + 2.0 * PI * I
        } else {
            chord
        }
    }

    /// `∫_A (ℓ(ζ) - ℓ_ref) dζ / (2πi(ζ-λ))`, splitting the interval at
    /// `split` when given.
    fn arc_integral(&self, lambda: C64, ell_ref: f64, split: Option<f64>) -> C64 {
        if self.arc_is_empty() {
            return C64::default();
        }
        let f = |th: f64| {
            let z = C64::from_polar(1.0, th);
            (self.ell(th) - ell_ref) * z / (z - lambda) / (2.0 * PI)
        };
        let (a, b) = (self.theta_start, self.theta_end);
        match split {
            Some(s) if s > a && s < b => {
                integrate(f, a, s, ABS_TOL, REL_TOL).value + integrate(f, s, b, ABS_TOL, REL_TOL).value
            }
            _ => integrate(f, a, b, ABS_TOL, REL_TOL).value,
        }
    }

    fn exponent(&self, lambda: C64) -> Result<C64> {
        if self.arc_is_empty() {
            return Ok(C64::default());
        }
        match self.angle_in_arc(lambda) {
            Some(th) if (lambda.norm() - 1.0).abs() < NEAR_ARC => {
                if (lambda.norm() - 1.0).abs() < 1e-13 {
                    return Err(Error::domain("T evaluated on its arc; use t_boundary"));
                }
                let l0 = self.ell(th);
                Ok(self.arc_integral(lambda, l0, Some(th)) + l0 / (2.0 * PI * I) * self.arc_log(lambda))
            }
            _ => Ok(self.arc_integral(lambda, 0.0, None)),
        }
    }

    /// `T(λ)` off the arc and away from the poles of `Z⁺` and their mirrors.
    pub fn t_eval(&self, lambda: C64) -> Result<C64> {
        if !(lambda.re.is_finite() && lambda.im.is_finite()) {
            return Err(Error::domain("non-finite lambda"));
        }
        Ok(self.exponent(lambda)?.exp() * self.pole_product(lambda))
    }

    /// `T(0)`.
    pub fn t_zero(&self) -> Result<C64> {
        self.t_eval(C64::default())
    }

    /// `∏_{Z⁺} |λ_l|^{2α_l} · exp((1/2π) ∫_A ln(1+|r|²) dθ)`, the closed form
    /// of `T(0)`.
    pub fn t_zero_closed_form(&self) -> f64 {
        let poles: f64 = self.z_plus.poles.iter().map(|p| p.lambda.norm().powi(2 * p.order as i32)).product();
        if self.arc_is_empty() {
            return poles;
        }
        let v = integrate(|th| C64::new(self.ell(th), 0.0), self.theta_start, self.theta_end, ABS_TOL, REL_TOL).value;
        poles * (v.re / (2.0 * PI)).exp()
    }

    /// One-sided boundary value of `T` at a point of the arc.
    pub fn t_boundary(&self, lambda: C64, side: ArcSide) -> Result<C64> {
        let th = self
            .angle_in_arc(lambda)
            .filter(|_| (lambda.norm() - 1.0).abs() < 1e-12)
            .ok_or_else(|| Error::domain("t_boundary needs a point on the arc"))?;
        if th - self.theta_start < ENDPOINT_GUARD || self.theta_end - th < ENDPOINT_GUARD {
            return Err(Error::domain("too close to a stationary point; use the local expansion"));
        }
        let l0 = self.ell(th);
        let lam = C64::from_polar(1.0, th);
        let chord = if self.is_full_circle() {
            C64::default()
        } else {
            let (s2, s1) = self.endpoints();
            ((s1 - lam) / (s2 - lam)).ln()
        };
        let log = match side {
            ArcSide::Plus => chord + 2.0 * PI * I,
            ArcSide::Minus => chord,
        };
        let exponent = self.arc_integral(lam, l0, Some(th)) + l0 / (2.0 * PI * I) * log;
        Ok(exponent.exp() * self.pole_product(lam))
    }

    /// `(ν_j, α_j(S_j))` for `j ∈ {1, 2}`.
    pub fn nu_alpha_at(&self, j: u8) -> Result<(f64, C64)> {
        let s = self.stationary(j)?;
        let th = if j == 1 { self.theta_end } else { self.theta_start };
        let lj = self.ell(th);
        Ok((lj / (2.0 * PI), self.arc_integral(s, lj, None)))
    }

    fn stationary(&self, j: u8) -> Result<C64> {
        let s = match j {
            1 => self.region.s1,
            2 => self.region.s2,
            _ => return Err(Error::invalid("j must be 1 or 2")),
        };
        if self.xi().abs() >= 1.0 {
            return Err(Error::domain("stationary points exist only for |xi| < 1"));
        }
        Ok(s.unwrap_or_else(|| {
            let (a, b) = crate::phase::stationary_points(self.xi()).expect("|xi| < 1");
            if j == 1 {
                a
            } else {
                b
            }
        }))
    }

    /// Leading local form `P(S_j) ((λ-S₂)/(λ-S₁))^{iν_j} e^{α_j(S_j)}` of `T`
    /// near `S_j`, with the power taken on the branch of the arc.
    pub fn t_local(&self, j: u8, lambda: C64) -> Result<C64> {
        let s = self.stationary(j)?;
        let (nu, alpha) = self.nu_alpha_at(j)?;
        Ok(self.pole_product(s) * (-I * nu * self.arc_log(lambda) + alpha).exp())
    }

    /// `C_j`: the `t`-dependent constant of the local model at `S_j`, without
    /// the phase `e^{-φ(S_j)/2}`.
    pub fn c_j(&self, j: u8, t: f64) -> Result<C64> {
        let s = self.stationary(j)?;
        let (nu, alpha) = self.nu_alpha_at(j)?;
        let xi = self.xi();
        let x = 2.0 * 2f64.sqrt() * (1.0 - xi * xi).powf(0.75) * t.sqrt();
        let sign = if j == 1 { 1.0 } else { -1.0 };
        let xp = (sign * I * nu * x.ln()).exp();
        let sp = (-sign * I * nu * (I * s).ln()).exp();
        Ok(self.pole_product(s) * xp * sp * alpha.exp())
    }

    /// `T_j = C_j e^{-φ(S_j)/2}` with the principal logarithm in `φ`.
    pub fn t_j_const(&self, j: u8, n: i64, t: f64) -> Result<C64> {
        if !(t > 0.0) {
            return Err(Error::domain("t_j_const needs t > 0"));
        }
        let s = self.stationary(j)?;
        let phi = crate::phase::phi(s, n, t)?;
        Ok(self.c_j(j, t)? * (-0.5 * phi).exp())
    }

    /// `T_j²`, free of the logarithm's branch.
    pub fn t_j_squared(&self, j: u8, n: i64, t: f64) -> Result<C64> {
        if !(t > 0.0) {
            return Err(Error::domain("t_j_squared needs t > 0"));
        }
        let s = self.stationary(j)?;
        let c = self.c_j(j, t)?;
        Ok(c * c * exp_phi(s, n, t, -1)?)
    }
}

//! The phase `φ(λ, n, t) = -i t (λ + λ⁻¹ - 2) + n ln λ`, its derivatives,
//! stationary points and the `(n, t)` region classification.

use serde::{Deserialize, Serialize};

use crate::series::Series;
use crate::{Error, Result, C64, I};

/// Default half-width of the excluded band around `|ξ| = 1`.
pub const DELTA_TRANS: f64 = 0.05;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Region {
    I,
    II,
    III,
    TransitionNeg,
    TransitionPos,
}

impl std::fmt::Display for Region {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Region::I => "I",
            Region::II => "II",
            Region::III => "III",
            Region::TransitionNeg => "TransitionNeg",
            Region::TransitionPos => "TransitionPos",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionData {
    pub xi: f64,
    pub region: Region,
    pub s1: Option<C64>,
    pub s2: Option<C64>,
}

fn check_nonzero(lambda: C64) -> Result<()> {
    if lambda == C64::default() {
        Err(Error::domain("phase evaluated at lambda = 0"))
    } else if !(lambda.re.is_finite() && lambda.im.is_finite()) {
        Err(Error::domain("non-finite lambda"))
    } else {
        Ok(())
    }
}

/// `φ(λ, n, t)` with the principal logarithm.
pub fn phi(lambda: C64, n: i64, t: f64) -> Result<C64> {
    check_nonzero(lambda)?;
    Ok(-I * t * (lambda + lambda.inv() - 2.0) + n as f64 * lambda.ln())
}

/// `e^{sign·φ}` computed with integer powers of `λ`, so it has no branch cut.
pub fn exp_phi(lambda: C64, n: i64, t: f64, sign: i32) -> Result<C64> {
    check_nonzero(lambda)?;
    let s = sign.signum() as f64;
    let osc = (-I * s * t * (lambda + lambda.inv() - 2.0)).exp();
    Ok(osc * pow_i64(lambda, sign.signum() as i64 * n))
}

pub(crate) fn pow_i64(z: C64, p: i64) -> C64 {
    if p >= 0 {
        z.powu(p as u32)
    } else {
        z.inv().powu((-p) as u32)
    }
}

/// `[φ, ∂φ, …, ∂^k φ]` at `λ`.
pub fn phi_derivatives(lambda: C64, n: i64, t: f64, k: usize) -> Result<Vec<C64>> {
    let mut out = Vec::with_capacity(k + 1);
    out.push(phi(lambda, n, t)?);
    let inv = lambda.inv();
    let nf = n as f64;
    if k >= 1 {
        out.push(-I * t * (1.0 - inv * inv) + nf * inv);
    }
    let mut fact = 1.0;
    for j in 2..=k {
        let prev_fact = fact;
        fact *= j as f64;
        let sgn = if j % 2 == 0 { 1.0 } else { -1.0 };
        let d = -I * t * sgn * fact * inv.powu(j as u32 + 1) - nf * sgn * prev_fact * inv.powu(j as u32);
        out.push(d);
    }
    Ok(out)
}

/// Taylor coefficients of `φ(λ + ε) - φ(λ)` in `ε`, truncated to `len` terms.
pub fn phi_increment_series(lambda: C64, n: i64, t: f64, len: usize) -> Result<Series> {
    check_nonzero(lambda)?;
    let inv = lambda.inv();
    let nf = n as f64;
    let mut s = Series::zero(len);
    for j in 1..len {
        // (λ+ε)⁻¹ contributes (-1)^j λ^{-j-1} ε^j; ln(λ+ε) contributes (-1)^{j+1} λ^{-j}/j.
        let sgn = if j % 2 == 0 { 1.0 } else { -1.0 };
        let mut v = -I * t * sgn * inv.powu(j as u32 + 1) - nf * sgn * inv.powu(j as u32) / j as f64;
        if j == 1 {
            v += -I * t;
        }
        s.0[j] = v;
    }
    Ok(s)
}

/// Taylor coefficients of `e^{sign·φ(λ+ε)}` in `ε`.
pub fn exp_phi_series(lambda: C64, n: i64, t: f64, sign: i32, len: usize) -> Result<Series> {
    let base = exp_phi(lambda, n, t, sign)?;
    let inc = phi_increment_series(lambda, n, t, len)?.scale(C64::from(sign.signum() as f64));
    Ok(inc.exp().scale(base))
}

/// `[e^{±φ}, ∂e^{±φ}, …, ∂^k e^{±φ}]`.
pub fn exp_phi_derivatives(lambda: C64, n: i64, t: f64, sign: i32, k: usize) -> Result<Vec<C64>> {
    let s = exp_phi_series(lambda, n, t, sign, k + 1)?;
    let mut fact = 1.0;
    Ok((0..=k)
        .map(|j| {
            if j > 0 {
                fact *= j as f64;
            }
            s.coeff(j) * fact
        })
        .collect())
}

/// Stationary points `S₁ = -iξ + √(1-ξ²)`, `S₂ = -iξ - √(1-ξ²)`.
pub fn stationary_points(xi: f64) -> Result<(C64, C64)> {
    if !(xi.abs() < 1.0) {
        return Err(Error::domain(format!("|xi| = {} has no stationary points on the circle", xi.abs())));
    }
    let r = (1.0 - xi * xi).sqrt();
    Ok((C64::new(r, -xi), C64::new(-r, -xi)))
}

pub fn region_of_xi(xi: f64, delta_trans: f64) -> Region {
    if xi.abs() < 1.0 - delta_trans {
        Region::I
    } else if xi < -1.0 - delta_trans {
        Region::II
    } else if xi > 1.0 + delta_trans {
        Region::III
    } else if xi < 0.0 {
        Region::TransitionNeg
    } else {
        Region::TransitionPos
    }
}

pub fn classify_xi(xi: f64, delta_trans: f64) -> RegionData {
    let region = region_of_xi(xi, delta_trans);
    let (s1, s2) = match region {
        Region::I => match stationary_points(xi) {
            Ok((a, b)) => (Some(a), Some(b)),
            Err(_) => (None, None),
        },
        _ => (None, None),
    };
    RegionData { xi, region, s1, s2 }
}

/// Region of the ray `ξ = n / (2t)`.
pub fn classify_region(n: i64, t: f64, delta_trans: f64) -> Result<RegionData> {
    if !(t > 0.0) {
        return Err(Error::domain("classify_region needs t > 0"));
    }
    Ok(classify_xi(n as f64 / (2.0 * t), delta_trans))
}

/// `Re φ / t` at `λ = ρ e^{iθ}` on the ray `n = 2ξt`.
pub fn re_phi_scaled(lambda: C64, xi: f64) -> f64 {
    let rho = lambda.norm();
    let theta = lambda.arg();
    (rho - rho.recip()) * theta.sin() + 2.0 * xi * rho.ln()
}

/// Sign of `Re φ(λ, 2ξt, t)` for `t > 0`; zero on the unit circle and
/// wherever the value is below rounding level.
pub fn re_phi_sign(lambda: C64, xi: f64) -> Result<i8> {
    check_nonzero(lambda)?;
    let rho = lambda.norm();
    if (rho - 1.0).abs() <= 1e-14 {
        return Ok(0);
    }
    let a = (rho - rho.recip()) * lambda.arg().sin();
    let b = 2.0 * xi * rho.ln();
    let v = a + b;
    let scale = a.abs() + b.abs() + (rho - 1.0).abs();
    if v.abs() <= 1e-13 * scale.max(f64::MIN_POSITIVE) {
        Ok(0)
    } else if v > 0.0 {
        Ok(1)
    } else {
        Ok(-1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c;
    use proptest::prelude::*;

    #[test]
    fn phi_examples() {
        assert!(phi(c(1.0, 0.0), 7, 3.0).unwrap().norm() < 1e-15);
        assert!((phi(c(-1.0, 0.0), 0, 1.0).unwrap() - c(0.0, 4.0)).norm() < 1e-15);
        assert!((phi(c(2.0, 0.0), 0, 1.0).unwrap() - c(0.0, -0.5)).norm() < 1e-15);
        assert!(phi(C64::default(), 0, 1.0).is_err());
    }

    #[test]
    fn derivative_examples() {
        let d = phi_derivatives(c(1.0, 0.0), 3, 0.0, 1).unwrap();
        assert!((d[1] - c(3.0, 0.0)).norm() < 1e-15);
        let (s1, s2) = stationary_points(0.6).unwrap();
        for (j, s) in [(1, s1), (2, s2)] {
            let d = phi_derivatives(s, 12, 10.0, 2).unwrap();
            assert!(d[1].norm() < 1e-12);
            let sign = if j == 1 { -1.0 } else { 1.0 };
            let want = 2.0 * sign * I * 10.0 * 0.8 / (s * s);
            assert!((d[2] - want).norm() < 1e-10 * want.norm());
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let lam = c(1.3, 0.7);
        let (n, t) = (5, 2.5);
        let d = phi_derivatives(lam, n, t, 4).unwrap();
        let h = 1e-3;
        let f = |z: C64| phi(z, n, t).unwrap();
        let fd2 = (f(lam + h) - 2.0 * f(lam) + f(lam - h)) / (h * h);
        assert!((fd2 - d[2]).norm() < 1e-5);
        let e = exp_phi_derivatives(lam, n, t, -1, 3).unwrap();
        let g = |z: C64| exp_phi(z, n, t, -1).unwrap();
        let fd1 = (g(lam + h) - g(lam - h)) / (2.0 * h);
        assert!((fd1 - e[1]).norm() < 1e-5 * e[1].norm().max(1.0));
        let fd3 = (g(lam + 2.0 * h) - 2.0 * g(lam + h) + 2.0 * g(lam - h) - g(lam - 2.0 * h)) / (2.0 * h * h * h);
        assert!((fd3 - e[3]).norm() < 1e-4 * e[3].norm().max(1.0));
    }

    #[test]
    fn exp_phi_is_branch_free() {
        let above = exp_phi(c(-2.0, 1e-12), 3, 1.0, 1).unwrap();
        let below = exp_phi(c(-2.0, -1e-12), 3, 1.0, 1).unwrap();
        assert!((above - below).norm() < 1e-9 * above.norm());
        let direct = phi(c(0.5, 0.4), 3, 1.0).unwrap().exp();
        assert!((exp_phi(c(0.5, 0.4), 3, 1.0, 1).unwrap() - direct).norm() < 1e-13 * direct.norm());
    }

    #[test]
    fn stationary_examples() {
        let (a, b) = stationary_points(0.0).unwrap();
        assert!((a - c(1.0, 0.0)).norm() < 1e-15 && (b - c(-1.0, 0.0)).norm() < 1e-15);
        let (a, b) = stationary_points(0.6).unwrap();
        assert!((a - c(0.8, -0.6)).norm() < 1e-15 && (b - c(-0.8, -0.6)).norm() < 1e-15);
        assert!(stationary_points(1.0).is_err());
    }

    #[test]
    fn region_examples() {
        assert_eq!(classify_region(0, 10.0, DELTA_TRANS).unwrap().region, Region::I);
        assert_eq!(classify_region(-40, 10.0, DELTA_TRANS).unwrap().region, Region::II);
        assert_eq!(classify_region(40, 10.0, DELTA_TRANS).unwrap().region, Region::III);
        assert_eq!(classify_region(20, 10.0, DELTA_TRANS).unwrap().region, Region::TransitionPos);
        assert_eq!(classify_region(-20, 10.0, DELTA_TRANS).unwrap().region, Region::TransitionNeg);
        assert!(classify_region(0, 0.0, DELTA_TRANS).is_err());
    }

    #[test]
    fn sign_examples() {
        assert_eq!(re_phi_sign(C64::from_polar(1.0, 0.3), 0.2).unwrap(), 0);
        assert_eq!(re_phi_sign(c(2.0, 0.0), -2.0).unwrap(), -1);
        // On the real axis at ξ = 0 the phase is purely imaginary.
        assert_eq!(re_phi_sign(c(1.0 + 1e-3, 0.0), 0.0).unwrap(), 0);
        assert_eq!(re_phi_sign(c(0.0, 2.0), 0.0).unwrap(), 1);
        assert_eq!(re_phi_sign(c(0.0, -2.0), 0.0).unwrap(), -1);
    }

    proptest! {
        #[test]
        fn phi_imaginary_on_circle(theta in -3.1f64..3.1, n in -200i64..200, t in 0.0f64..500.0) {
            let v = phi(C64::from_polar(1.0, theta), n, t).unwrap();
            prop_assert!(v.re.abs() < 1e-12);
        }

        #[test]
        fn exp_phi_reflection(re in -3.0f64..3.0, im in -3.0f64..3.0, n in -30i64..30, t in 0.0f64..5.0) {
            let lam = c(re, im);
            prop_assume!(lam.norm() > 0.2);
            let refl = lam.conj().inv();
            let p = exp_phi(refl, n, t, 1).unwrap() * exp_phi(lam, n, t, 1).unwrap().conj();
            prop_assert!((p - 1.0).norm() < 1e-9);
        }

        #[test]
        fn stationary_equation(xi in -0.999f64..0.999) {
            let (a, b) = stationary_points(xi).unwrap();
            for s in [a, b] {
                prop_assert!((s * s + 2.0 * I * xi * s - 1.0).norm() < 1e-14);
                prop_assert!((s.norm() - 1.0).abs() < 1e-15);
            }
            prop_assert!(((a * b).norm() - 1.0).abs() < 1e-14);
        }

        #[test]
        fn sign_is_t_homogeneous(re in -3.0f64..3.0, im in -3.0f64..3.0, xi in -3.0f64..3.0, t in 0.1f64..50.0) {
            let lam = c(re, im);
            prop_assume!(lam.norm() > 0.1 && (lam.norm() - 1.0).abs() > 1e-3);
            let s = re_phi_sign(lam, xi).unwrap();
            let v = exp_phi(lam, 0, t, 1).unwrap().norm().ln() + 2.0 * xi * t * lam.norm().ln();
            if s != 0 {
                prop_assert_eq!(v.signum() as i8, s);
            }
        }
    }
}

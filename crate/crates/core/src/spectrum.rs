//! Discrete spectrum: zeros of `a` outside the unit circle with their
//! orders and norming coefficients.

use serde::{Deserialize, Serialize};

use crate::{Error, Result, C64};

pub const SCHEMA_VERSION: u32 = 1;

/// A zero `λ` of `a` with `|λ| > 1`, its order and the coefficients
/// `β_0, …, β_{order-1}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Pole {
    pub lambda: C64,
    pub order: usize,
    pub betas: Vec<C64>,
}

impl Pole {
    pub fn simple(lambda: C64, beta0: C64) -> Self {
        Pole { lambda, order: 1, betas: vec![beta0] }
    }

    /// The mirror point `1/λ̄` inside the unit circle.
    pub fn mirror(&self) -> C64 {
        self.lambda.conj().inv()
    }

    /// `β` of the mirror pole for a simple pole: `-conj(β₀)`.
    pub fn mirror_beta0(&self) -> C64 {
        -self.betas[0].conj()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DiscreteSpectrum {
    pub poles: Vec<Pole>,
}

impl DiscreteSpectrum {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn new(poles: Vec<Pole>) -> Result<Self> {
        let s = DiscreteSpectrum { poles };
        s.validate()?;
        Ok(s)
    }

    pub fn is_empty(&self) -> bool {
        self.poles.is_empty()
    }

    pub fn len(&self) -> usize {
        self.poles.len()
    }

    pub fn total_order(&self) -> usize {
        self.poles.iter().map(|p| p.order).sum()
    }

    pub fn validate(&self) -> Result<()> {
        for (k, p) in self.poles.iter().enumerate() {
            if !(p.lambda.re.is_finite() && p.lambda.im.is_finite()) || p.lambda.norm() <= 1.0 {
                return Err(Error::invalid(format!("pole {k} at {} is not outside the unit circle", p.lambda)));
            }
            if p.order == 0 {
                return Err(Error::invalid(format!("pole {k} has order 0")));
            }
            if p.betas.len() != p.order {
                return Err(Error::invalid(format!(
                    "pole {k} of order {} carries {} norming coefficients",
                    p.order,
                    p.betas.len()
                )));
            }
            if p.betas[0].norm() == 0.0 {
                return Err(Error::invalid(format!("pole {k} has beta_0 = 0")));
            }
            for q in &self.poles[..k] {
                if (q.lambda - p.lambda).norm() < 1e-12 {
                    return Err(Error::invalid(format!("repeated pole at {}", p.lambda)));
                }
            }
        }
        Ok(())
    }

    /// Subset of poles selected by `keep`.
    pub fn filter(&self, keep: impl Fn(&Pole) -> bool) -> DiscreteSpectrum {
        DiscreteSpectrum { poles: self.poles.iter().filter(|p| keep(p)).cloned().collect() }
    }

    /// The reflectionless `a(λ) = ∏ ((λ - λ_j)/(λ - 1/λ̄_j))^{α_j}`.
    pub fn blaschke(&self, lambda: C64) -> C64 {
        self.poles
            .iter()
            .map(|p| ((lambda - p.lambda) / (lambda - p.mirror())).powu(p.order as u32))
            .product()
    }

    pub fn max_modulus(&self) -> f64 {
        self.poles.iter().map(|p| p.lambda.norm()).fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoleRecord {
    pub re: f64,
    pub im: f64,
    pub order: usize,
    /// `[re, im]` pairs.
    pub betas: Vec<[f64; 2]>,
}

/// JSON sidecar `{schema_version, c_inf, poles: [{re, im, order, betas}]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSidecar {
    #[serde(default = "default_schema")]
    pub schema_version: u32,
    #[serde(default = "default_c_inf")]
    pub c_inf: f64,
    pub poles: Vec<PoleRecord>,
}

fn default_schema() -> u32 {
    SCHEMA_VERSION
}

fn default_c_inf() -> f64 {
    1.0
}

impl SpectrumSidecar {
    pub fn from_spectrum(spec: &DiscreteSpectrum, c_inf: f64) -> Self {
        SpectrumSidecar {
            schema_version: SCHEMA_VERSION,
            c_inf,
            poles: spec
                .poles
                .iter()
                .map(|p| PoleRecord {
                    re: p.lambda.re,
                    im: p.lambda.im,
                    order: p.order,
                    betas: p.betas.iter().map(|b| [b.re, b.im]).collect(),
                })
                .collect(),
        }
    }

    pub fn to_spectrum(&self) -> Result<DiscreteSpectrum> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::invalid(format!("unsupported schema_version {}", self.schema_version)));
        }
        DiscreteSpectrum::new(
            self.poles
                .iter()
                .map(|r| Pole {
                    lambda: C64::new(r.re, r.im),
                    order: r.order,
                    betas: r.betas.iter().map(|b| C64::new(b[0], b[1])).collect(),
                })
                .collect(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c;

    #[test]
    fn validation() {
        assert!(DiscreteSpectrum::new(vec![Pole::simple(c(0.0, 1.5), c(1.0, 0.0))]).is_ok());
        assert!(DiscreteSpectrum::new(vec![Pole::simple(c(0.0, 0.5), c(1.0, 0.0))]).is_err());
        assert!(DiscreteSpectrum::new(vec![Pole::simple(c(0.0, 1.5), C64::default())]).is_err());
        let p = Pole::simple(c(0.0, 1.5), c(1.0, 0.0));
        assert!(DiscreteSpectrum::new(vec![p.clone(), p]).is_err());
        let bad = Pole { lambda: c(2.0, 0.0), order: 2, betas: vec![c(1.0, 0.0)] };
        assert!(DiscreteSpectrum::new(vec![bad]).is_err());
    }

    #[test]
    fn blaschke_zero_and_modulus() {
        let s = DiscreteSpectrum::new(vec![Pole::simple(c(0.3, 1.5), c(1.0, 0.0))]).unwrap();
        assert!(s.blaschke(c(0.3, 1.5)).norm() < 1e-15);
        let on = s.blaschke(C64::from_polar(1.0, 0.7)).norm();
        let m = s.poles[0].lambda.norm();
        assert!((on - m).abs() < 1e-12);
    }

    #[test]
    fn sidecar_round_trip() {
        let s = DiscreteSpectrum::new(vec![Pole {
            lambda: c(0.2, -1.7),
            order: 2,
            betas: vec![c(1.0, 0.5), c(-0.25, 0.0)],
        }])
        .unwrap();
        let js = serde_json::to_string(&SpectrumSidecar::from_spectrum(&s, 1.25)).unwrap();
        let back: SpectrumSidecar = serde_json::from_str(&js).unwrap();
        assert_eq!(back.c_inf, 1.25);
        assert_eq!(back.to_spectrum().unwrap(), s);
    }
}

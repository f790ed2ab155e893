//! Power-law fits `err ≈ C t^p` by least squares in log-log coordinates.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const MIN_FIT_POINTS: usize = 5;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub exponent: f64,
    /// `ln C`.
    pub intercept: f64,
    pub r_squared: f64,
    pub points: usize,
}

/// Least-squares line through `(ln t, ln err)`.
pub fn slope_fit(ts: &[f64], errors: &[f64]) -> Result<SlopeFit> {
    if ts.len() != errors.len() {
        return Err(Error::invalid(format!("{} times but {} errors", ts.len(), errors.len())));
    }
    if ts.len() < MIN_FIT_POINTS {
        return Err(Error::invalid(format!("slope fit needs at least {MIN_FIT_POINTS} points, got {}", ts.len())));
    }
    if let Some(k) = (0..ts.len()).find(|&k| !(ts[k] > 0.0 && ts[k].is_finite())) {
        return Err(Error::invalid(format!("time {} at index {k} is not positive", ts[k])));
    }
    if let Some(k) = (0..errors.len()).find(|&k| !(errors[k] > 0.0 && errors[k].is_finite())) {
        return Err(Error::invalid(format!("error {} at index {k} is not positive", errors[k])));
    }
    let x: Vec<f64> = ts.iter().map(|t| t.ln()).collect();
    let y: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let m = x.len() as f64;
    let xm = x.iter().sum::<f64>() / m;
    let ym = y.iter().sum::<f64>() / m;
    let sxx: f64 = x.iter().map(|v| (v - xm).powi(2)).sum();
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - xm) * (b - ym)).sum();
    let syy: f64 = y.iter().map(|v| (v - ym).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::invalid("slope fit needs at least two distinct times"));
    }
    let exponent = sxy / sxx;
    let intercept = ym - exponent * xm;
    let sse: f64 = x.iter().zip(&y).map(|(a, b)| (b - intercept - exponent * a).powi(2)).sum();
    let r_squared = if syy == 0.0 { 1.0 } else { 1.0 - sse / syy };
    Ok(SlopeFit { exponent, intercept, r_squared, points: x.len() })
}

/// `points` log-spaced values from `start` to `end` inclusive.
pub fn log_grid(start: f64, end: f64, points: usize) -> Result<Vec<f64>> {
    if !(start > 0.0 && end > start) || points < 2 {
        return Err(Error::invalid(format!("bad log grid {start}..{end} with {points} points")));
    }
    let (a, b) = (start.ln(), end.ln());
    Ok((0..points)
        .map(|k| match k {
            0 => start,
            _ if k == points - 1 => end,
            _ => (a + (b - a) * k as f64 / (points - 1) as f64).exp(),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn exact_power_laws() {
        let ts = log_grid(50.0, 800.0, 20).unwrap();
        let e: Vec<f64> = ts.iter().map(|t| 3.0 / t).collect();
        let f = slope_fit(&ts, &e).unwrap();
        assert!((f.exponent + 1.0).abs() < 1e-12);
        assert!((f.intercept - 3f64.ln()).abs() < 1e-10);
        assert!((f.r_squared - 1.0).abs() < 1e-12);
        let e: Vec<f64> = ts.iter().map(|t| 0.5 * t.powf(-0.75)).collect();
        assert!((slope_fit(&ts, &e).unwrap().exponent + 0.75).abs() < 1e-12);
    }

    #[test]
    fn two_term_model() {
        // Local slope of c/t + d/t² runs from -1 - d/(ct+d) at t = 50 to -1 at infinity.
        let ts = log_grid(50.0, 800.0, 20).unwrap();
        for (c, d) in [(1.0, 10.0), (1.0, 30.0), (3.0, 20.0)] {
            let e: Vec<f64> = ts.iter().map(|t| c / t + d / (t * t)).collect();
            let f = slope_fit(&ts, &e).unwrap();
            assert!(f.exponent > -1.3 && f.exponent < -0.9, "{c} {d} {f:?}");
        }
    }

    #[test]
    fn rejects_bad_input() {
        let ts = [1.0, 2.0, 3.0, 4.0];
        assert!(slope_fit(&ts, &[1.0; 4]).is_err());
        let ts = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert!(slope_fit(&ts, &[1.0, 1.0, 0.0, 1.0, 1.0]).is_err());
        assert!(slope_fit(&[1.0, 2.0, -3.0, 4.0, 5.0], &[1.0; 5]).is_err());
        assert!(slope_fit(&[2.0; 5], &[1.0; 5]).is_err());
        assert!(slope_fit(&ts, &[1.0; 4]).is_err());
    }

    #[test]
    fn log_grid_endpoints() {
        let g = log_grid(50.0, 400.0, 7).unwrap();
        assert_eq!((g[0], g[6]), (50.0, 400.0));
        assert!(g.windows(2).all(|w| w[1] > w[0]));
        assert!(log_grid(0.0, 1.0, 5).is_err());
    }

    proptest! {
        #[test]
        fn recovers_any_exponent(p in -3.0f64..1.0, c in 0.01f64..100.0) {
            let ts = log_grid(1.0, 1000.0, 9).unwrap();
            let e: Vec<f64> = ts.iter().map(|t| c * t.powf(p)).collect();
            let f = slope_fit(&ts, &e).unwrap();
            prop_assert!((f.exponent - p).abs() < 1e-10);
        }
    }
}

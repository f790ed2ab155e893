//! Scenario files: initial data, time grid, rays and the checks to run.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::fit::log_grid;
use super::io;
use crate::asympt::IndexShift;
use crate::phase::DELTA_TRANS;
use crate::soliton::soliton_state;
use crate::spectrum::{DiscreteSpectrum, PoleRecord, SpectrumSidecar, SCHEMA_VERSION};
use crate::{c, Error, LatticeState, Result};

fn schema() -> u32 {
    SCHEMA_VERSION
}

fn default_dt() -> f64 {
    1e-3
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialData {
    /// `n,re,im` file, resolved relative to the scenario file.
    Csv { path: PathBuf },
    /// Reflectionless field at `t = 0` on `n_min..=n_max`.
    Soliton { poles: Vec<PoleRecord>, n_min: i64, n_max: i64 },
    /// `A e^{-(n/w)²}`, on `|n| ≤ half_window` if given, otherwise sized
    /// from the time grid and rays.
    Pulse {
        amplitude: f64,
        width: f64,
        #[serde(default)]
        half_window: Option<i64>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TGrid {
    Linear { start: f64, end: f64, points: usize },
    Log { start: f64, end: f64, points: usize },
    Explicit { values: Vec<f64> },
}

impl TGrid {
    pub fn values(&self) -> Result<Vec<f64>> {
        let v = match self {
            TGrid::Linear { start, end, points } => {
                if *points < 2 {
                    return Err(Error::invalid("linear grid needs two points"));
                }
                (0..*points).map(|k| start + (end - start) * k as f64 / (*points - 1) as f64).collect()
            }
            TGrid::Log { start, end, points } => log_grid(*start, *end, *points)?,
            TGrid::Explicit { values } => values.clone(),
        };
        if v.is_empty() {
            return Err(Error::invalid("empty time grid"));
        }
        if v.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
            return Err(Error::invalid("time grid values must be finite and non-negative"));
        }
        if v.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("time grid must be strictly increasing"));
        }
        Ok(v)
    }
}

/// Which prediction the residual is taken against.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Assembly {
    /// `P (q^{Z_ξ} + t^{-1/2} q^{Osc})`.
    #[default]
    Prefactored,
    /// `q^{Z_ξ} + P t^{-1/2} q^{Osc}`.
    Bare,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Check {
    /// Relative drift of `c₋∞` over the time grid.
    Conservation { tol: f64 },
    /// `max ||a|²+|b|² - c₋∞|` on a uniform circle grid.
    ScatteringIdentity { grid_points: usize, tol: f64 },
    /// `q₀ = 1` gives `a = 1`, `b = r = -λ`.
    SingleSite { grid_points: usize, tol: f64 },
    /// Centered time difference of the formula against the lattice right-hand
    /// side, and lattice integration against the formula at the last grid time.
    SolitonConsistency { residual_dt: f64, tol_residual: f64, tol_sup: f64 },
    /// Re-extract the spectrum of the synthesized soliton.
    RoundTrip { r_in: f64, r_out: f64, tol: f64 },
    /// Three-circle solve against the reflectionless formula.
    BealsCoifman { n_max: i64, times: Vec<f64>, modes: usize, tol: f64 },
    /// Jump ratio on the arc, reflection symmetry off it and `T(∞)`.
    TFunction { xi: f64, points: usize, tol_jump: f64, tol_symmetry: f64, tol_infinity: f64 },
    /// Closed-form confluent Vandermonde determinant against elimination.
    Vandermonde { instances: usize, max_order: usize, seed: u64, tol: f64 },
    /// `1/ζ` coefficient of the parabolic-cylinder model and `|γ₁|²`.
    PcModel { tau: [f64; 2], radius: f64, points: usize, tol_coeff: f64, tol_gamma: f64 },
    /// Power-law decay of the residual along every ray.
    Decay {
        max_exponent: f64,
        min_r_squared: f64,
        #[serde(default)]
        assembly: Assembly,
        #[serde(default)]
        index_shift: IndexShift,
    },
    /// Decay of the residual plus agreement of the `t^{-1/2}` term with the
    /// simulated amplitude at `envelope_t`.
    Residual {
        max_exponent: f64,
        envelope_t: f64,
        envelope_tol: f64,
        #[serde(default)]
        assembly: Assembly,
        #[serde(default)]
        index_shift: IndexShift,
    },
}

impl Check {
    pub fn name(&self) -> &'static str {
        match self {
            Check::Conservation { .. } => "conservation",
            Check::ScatteringIdentity { .. } => "scattering_identity",
            Check::SingleSite { .. } => "single_site",
            Check::SolitonConsistency { .. } => "soliton_consistency",
            Check::RoundTrip { .. } => "round_trip",
            Check::BealsCoifman { .. } => "beals_coifman",
            Check::TFunction { .. } => "t_function",
            Check::Vandermonde { .. } => "vandermonde",
            Check::PcModel { .. } => "pc_model",
            Check::Decay { .. } => "decay",
            Check::Residual { .. } => "residual",
        }
    }

    fn needs_rays(&self) -> bool {
        matches!(self, Check::Decay { .. } | Check::Residual { .. })
    }
}

/// Which CSV files to write besides the JSON report.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    #[serde(default)]
    pub initial: bool,
    #[serde(default)]
    pub observables: bool,
    #[serde(default)]
    pub scattering: bool,
    #[serde(default)]
    pub rays: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default = "schema")]
    pub schema_version: u32,
    pub name: String,
    #[serde(default)]
    pub initial: Option<InitialData>,
    #[serde(default)]
    pub t_grid: Option<TGrid>,
    #[serde(default)]
    pub rays: Vec<f64>,
    #[serde(default = "default_dt")]
    pub dt: f64,
    pub checks: Vec<Check>,
    #[serde(default)]
    pub outputs: Outputs,
    /// Directory that relative CSV paths are resolved against.
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self> {
        let s: Scenario = serde_json::from_str(text)?;
        s.validate()?;
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let mut s: Scenario = io::read_json(io::open(path)?)?;
        s.base_dir = path.parent().map(Path::to_path_buf);
        s.validate().map_err(|e| e.in_scenario(&s.name))?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::invalid(format!("unsupported schema_version {}", self.schema_version)));
        }
        if self.name.is_empty() || !self.name.chars().all(|ch| ch.is_ascii_alphanumeric() || ch == '_' || ch == '-') {
            return Err(Error::invalid(format!("scenario name {:?} must be non-empty [A-Za-z0-9_-]", self.name)));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::invalid("dt must be positive"));
        }
        if let Some(g) = &self.t_grid {
            g.values()?;
        }
        for &xi in &self.rays {
            if !xi.is_finite() || ((xi.abs() - 1.0).abs() <= DELTA_TRANS) {
                return Err(Error::invalid(format!("ray xi = {xi} lies in the transition buffer |xi| = 1 ± {DELTA_TRANS}")));
            }
        }
        if self.checks.is_empty() {
            return Err(Error::invalid("scenario has no checks"));
        }
        for ch in &self.checks {
            if ch.needs_rays() {
                if self.rays.is_empty() {
                    return Err(Error::invalid(format!("check {} needs rays", ch.name())));
                }
                match &self.t_grid {
                    Some(g) if g.values()?.len() >= super::fit::MIN_FIT_POINTS && g.values()?[0] > 0.0 => {}
                    _ => return Err(Error::invalid(format!("check {} needs a positive time grid of at least 5 points", ch.name()))),
                }
            }
            let needs_initial = matches!(
                ch,
                Check::Conservation { .. }
                    | Check::ScatteringIdentity { .. }
                    | Check::SolitonConsistency { .. }
                    | Check::RoundTrip { .. }
                    | Check::BealsCoifman { .. }
                    | Check::TFunction { .. }
                    | Check::Decay { .. }
                    | Check::Residual { .. }
            );
            if needs_initial && self.initial.is_none() {
                return Err(Error::invalid(format!("check {} needs initial data", ch.name())));
            }
            let needs_soliton = matches!(ch, Check::SolitonConsistency { .. } | Check::RoundTrip { .. } | Check::BealsCoifman { .. });
            if needs_soliton && !matches!(self.initial, Some(InitialData::Soliton { .. })) {
                return Err(Error::invalid(format!("check {} needs soliton initial data", ch.name())));
            }
            if matches!(ch, Check::Conservation { .. } | Check::SolitonConsistency { .. }) && self.t_final().is_none() {
                return Err(Error::invalid(format!("check {} needs a time grid", ch.name())));
            }
        }
        if let Some(InitialData::Pulse { amplitude, width, half_window }) = &self.initial {
            if !(amplitude.is_finite() && *width > 0.0) || half_window.is_some_and(|h| h < 0) {
                return Err(Error::invalid("pulse needs finite amplitude, positive width and non-negative window"));
            }
        }
        Ok(())
    }

    pub fn times(&self) -> Result<Vec<f64>> {
        match &self.t_grid {
            Some(g) => g.values(),
            None => Ok(Vec::new()),
        }
    }

    pub fn t_final(&self) -> Option<f64> {
        self.times().ok().and_then(|v| v.last().copied()).filter(|t| *t > 0.0)
    }

    /// Spectrum of soliton initial data.
    pub fn soliton_spectrum(&self) -> Result<Option<DiscreteSpectrum>> {
        match &self.initial {
            Some(InitialData::Soliton { poles, .. }) => {
                let side = SpectrumSidecar { schema_version: SCHEMA_VERSION, c_inf: 1.0, poles: poles.clone() };
                Ok(Some(side.to_spectrum()?))
            }
            _ => Ok(None),
        }
    }

    /// The initial field on the window the evolution needs.
    pub fn initial_state(&self) -> Result<LatticeState> {
        let t_max = self.t_final().unwrap_or(0.0);
        let xi_max = self.rays.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        match self.initial.as_ref().ok_or_else(|| Error::invalid("scenario has no initial data"))? {
            InitialData::Csv { path } => {
                let p = match &self.base_dir {
                    Some(b) if path.is_relative() => b.join(path),
                    _ => path.clone(),
                };
                let s = io::read_state(io::open(&p)?)?;
                if xi_max == 0.0 && t_max == 0.0 {
                    return Ok(s);
                }
                let w = ((s.n_max() - s.n0) as f64 / 2.0).max(1.0);
                let h = window_half_width(t_max, w, xi_max);
                let center = (s.n0 + s.n_max()).div_euclid(2);
                pad(&s, center - h, center + h)
            }
            InitialData::Soliton { n_min, n_max, .. } => {
                let spec = self.soliton_spectrum()?.expect("soliton data");
                soliton_state(&spec, *n_min, *n_max, 0.0)
            }
            InitialData::Pulse { amplitude, width, half_window } => {
                let h = half_window.unwrap_or_else(|| window_half_width(t_max, *width, xi_max));
                gaussian_pulse(*amplitude, *width, h)
            }
        }
    }
}

/// `|n| ≤ max(2, 2|ξ|) t_max + 4w + 32`.
pub fn window_half_width(t_max: f64, width: f64, xi_max: f64) -> i64 {
    ((2.0f64).max(2.0 * xi_max) * t_max + 4.0 * width + 32.0).ceil() as i64
}

/// `A e^{-(n/w)²}` on `|n| ≤ half_window`.
pub fn gaussian_pulse(amplitude: f64, width: f64, half_window: i64) -> Result<LatticeState> {
    if !(width > 0.0) {
        return Err(Error::invalid("pulse width must be positive"));
    }
    LatticeState::from_fn(-half_window, half_window, 0.0, |n| c(amplitude * (-(n as f64 / width).powi(2)).exp(), 0.0))
}

/// Extend `s` by zeros to cover `lo..=hi`.
pub fn pad(s: &LatticeState, lo: i64, hi: i64) -> Result<LatticeState> {
    let (lo, hi) = (lo.min(s.n0), hi.max(s.n_max()));
    LatticeState::from_fn(lo, hi, s.t, |n| s.at(n))
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{"name": "z", "checks": [{"kind": "single_site", "grid_points": 8, "tol": 1e-12}]}"#;

    #[test]
    fn minimal_scenario_parses() {
        let s = Scenario::from_json(MINIMAL).unwrap();
        assert_eq!(s.schema_version, 1);
        assert_eq!(s.dt, 1e-3);
        assert!(s.initial.is_none());
    }

    #[test]
    fn validation() {
        let bad_grid = r#"{"name": "z", "t_grid": {"kind": "explicit", "values": [1, 1]},
            "checks": [{"kind": "single_site", "grid_points": 8, "tol": 1e-12}]}"#;
        assert!(Scenario::from_json(bad_grid).is_err());
        let transition = r#"{"name": "z", "rays": [1.02], "t_grid": {"kind": "log", "start": 1, "end": 9, "points": 5},
            "initial": {"kind": "pulse", "amplitude": 0.1, "width": 4},
            "checks": [{"kind": "decay", "max_exponent": -0.7, "min_r_squared": 0.9}]}"#;
        assert!(Scenario::from_json(transition).is_err());
        let ok = transition.replace("1.02", "1.5");
        assert!(Scenario::from_json(&ok).is_ok());
        let unknown = MINIMAL.replace("\"tol\"", "\"tolerance\"");
        assert!(Scenario::from_json(&unknown).is_err());
        let no_initial = r#"{"name": "z", "t_grid": {"kind": "linear", "start": 0, "end": 1, "points": 3},
            "checks": [{"kind": "conservation", "tol": 1e-8}]}"#;
        assert!(Scenario::from_json(no_initial).is_err());
        assert!(Scenario::from_json(&MINIMAL.replace("\"z\"", "\"../x\"")).is_err());
    }

    #[test]
    fn window_rule() {
        assert_eq!(window_half_width(400.0, 4.0, 0.3), 848);
        assert_eq!(window_half_width(800.0, 4.0, 1.5), 2448);
        let s = gaussian_pulse(0.3, 8.0, 128).unwrap();
        assert_eq!((s.n0, s.n_max()), (-128, 128));
        assert_eq!(s.at(0).re, 0.3);
        assert!((s.at(8).re - 0.3 / std::f64::consts::E).abs() < 1e-16);
    }
}

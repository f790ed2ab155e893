use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("non-finite amplitude at site {site}")]
    NonFinite { site: i64 },
    #[error("overflow during step at t = {t}")]
    Overflow { t: f64 },
    #[error("conservation drift {drift:e} exceeds tolerance at step {step}")]
    ConservationDrift { step: usize, drift: f64 },
    #[error("spectral singularity: a vanishes near theta = {theta}")]
    SpectralSingularity { theta: f64 },
    #[error("winding count inconsistent in cell {cell}")]
    Winding { cell: String },
    #[error("singular linear system (condition estimate {cond:e})")]
    Singular { cond: f64 },
    #[error("no convergence: {0}")]
    Convergence(String),
    #[error("inconsistent spectral data: {0}")]
    Inconsistent(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("scenario {name}: {source}")]
    Scenario { name: String, source: Box<Error> },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// Attach a scenario name to an error.
    pub fn in_scenario(self, name: &str) -> Self {
        match self {
            e @ Error::Scenario { .. } => e,
            e => Error::Scenario { name: name.to_string(), source: Box::new(e) },
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }
}

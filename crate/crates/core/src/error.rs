use thiserror::Error;

/// Errors raised by the map, solver and sweep layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("point left the domain of {map} at step {step}")]
    Escape { map: &'static str, step: usize },

    #[error("point outside the domain of {0}")]
    OutsideDomain(&'static str),

    #[error("no real preimage: point lies outside the image of the global map")]
    NoRealPreimage,

    #[error("map has no inverse rule")]
    NoInverse,

    #[error("singular Jacobian")]
    SingularJacobian,

    #[error("iteration did not converge after {iterations} steps (residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("monitor function has no sign change on [{lo}, {hi}]")]
    NoSignChange { lo: f64, hi: f64 },

    #[error("tracked orbit lost near parameter {last_good}")]
    OrbitLost { last_good: f64 },

    #[error("{excluded} of {total} grid points excluded")]
    TooManyExclusions { excluded: usize, total: usize },

    #[error("unsupported: {0}")]
    Unsupported(&'static str),

    #[error("config: {0}")]
    Config(String),

    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

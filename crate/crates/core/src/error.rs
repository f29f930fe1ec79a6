use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("grid too small: {n_points} points, need at least {min}")]
    GridTooSmall { n_points: usize, min: usize },

    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("CFL violation: dt = {dt} exceeds cfl * dx = {cfl} * {dx}")]
    Cfl { dt: f64, dx: f64, cfl: f64 },

    #[error("non-finite field values at t = {t}")]
    NonFinite { t: f64 },

    #[error("mode index {n} out of range (highest discrete mode is {max})")]
    ModeOutOfRange { n: usize, max: usize },

    #[error("no threshold in [{lo}, {hi}]: both ends give {outcome}")]
    NoThreshold { lo: String, hi: String, outcome: String },

    #[error("too few oscillations: found {found} sign changes, need {needed}; use a longer window")]
    TooFewOscillations { found: usize, needed: usize },

    #[error("signal is not exponential over the window (R^2 = {r2:.5})")]
    NotExponential { r2: f64 },

    #[error("config error in {field}: {reason}")]
    Config { field: String, reason: String },

    #[error("missing input: {0}")]
    MissingInput(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}

impl Error {
    /// Process exit status: 2 for bad input, 1 for failures during a run.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. } | Error::InvalidParameter { .. } | Error::Cfl { .. } | Error::GridTooSmall { .. } => 2,
            _ => 1,
        }
    }
}

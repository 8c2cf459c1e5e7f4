use thiserror::Error;

/// Errors raised by the model, filter, schedulers and simulator.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got} ({what})")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("sensor index {index} out of range 1..={n_sensors}")]
    SensorOutOfRange { index: usize, n_sensors: usize },

    #[error("{what} is not positive definite")]
    NotPositiveDefinite { what: &'static str },

    #[error("innovation variance {value} for sensor {sensor} is below the numeric floor")]
    DegenerateInnovation { sensor: usize, value: f64 },

    #[error("non-finite value in {what}")]
    NonFinite { what: String },

    #[error("belief is in the {got:?} phase, expected {expected:?}")]
    WrongPhase {
        expected: crate::kalman::Phase,
        got: crate::kalman::Phase,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("model failed validation:\n{0}")]
    InvalidModel(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    /// True for errors caused by user input rather than by the run itself.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            Error::Config(_) | Error::InvalidModel(_) | Error::InvalidArgument(_)
        )
    }
}

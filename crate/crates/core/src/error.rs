use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{name} = {value} is outside its domain ({expected})")]
    Domain {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },

    #[error("division by zero: {0}")]
    ZeroDivision(&'static str),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("density is not normalized: integral = {0}")]
    NotNormalized(f64),

    #[error("finite-difference step underflow (step = {0:e})")]
    StepUnderflow(f64),

    #[error("aliasing: component at {frequency} Hz needs a sample rate above {needed} Hz, got {rate} Hz")]
    Aliasing { frequency: f64, needed: f64, rate: f64 },

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("insufficient points: need at least {need}, got {got}")]
    InsufficientPoints { need: usize, got: usize },

    #[error("degenerate configuration: {0}")]
    Degenerate(String),

    #[error("config error at `{path}` (line {line}, column {column}): {message}")]
    Config {
        path: String,
        line: usize,
        column: usize,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(name: &'static str, value: f64, expected: &'static str) -> Self {
        Error::Domain { name, value, expected }
    }

    /// Plain configuration error without a source position.
    pub fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            line: 0,
            column: 0,
            message: message.into(),
        }
    }

    pub fn is_config(&self) -> bool {
        matches!(self, Error::Config { .. })
    }
}

use thiserror::Error;

/// Errors raised by path operations, statistics and the experiment harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid path: {0}")]
    InvalidPath(String),

    #[error("left limit requested at t = {0}; left limits need t > 0")]
    LeftLimitAtZero(f64),

    #[error("clock integral requested up to s = {s}, beyond the zero-set exit {exit}")]
    SingularClock { s: f64, exit: f64 },

    #[error("horizon must be positive, got {0}")]
    NonPositiveHorizon(f64),

    #[error("time {t} exceeds the ensemble horizon {horizon}")]
    BeyondHorizon { t: f64, horizon: f64 },

    #[error("statistic needs at least {needed} paths, got {got}")]
    TooFewPaths { needed: usize, got: usize },

    #[error("statistic is vacuous: {dead} of {total} paths are at the cemetery before s = {s}")]
    Vacuous { dead: usize, total: usize, s: f64 },

    #[error("generator is not bounded on the probe grid (|g| reached {0:e})")]
    UnboundedGenerator(f64),

    #[error("conditioning bin received {hits} hits, at least {needed} are required")]
    SparseBin { hits: usize, needed: usize },

    #[error("invalid initial law: {0}")]
    InvalidLaw(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("csv parse error at line {line}: {msg}")]
    Csv { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid probability table: {0}")]
    InvalidProbability(String),

    #[error("marginals depend on the remote setting (deviation {deviation:.3e} > {tol:.1e})")]
    SignalingDetected { deviation: f64, tol: f64 },

    #[error("correlators do not describe a nonnegative behavior (min reconstructed probability {min_probability:.3e})")]
    InfeasibleCorrelators { min_probability: f64 },

    #[error("scenario mismatch: expected {expected}, got {found}")]
    ScenarioMismatch { expected: String, found: String },

    #[error("tau = {0} is outside [1, 3/2]")]
    OutOfRangeTau(f64),

    #[error("chained inequality needs n >= 2, got {0}")]
    InvalidN(usize),

    #[error("too many settings for exact enumeration: {0}")]
    TooManySettings(String),

    #[error("operator is not a valid dichotomic observable: {0}")]
    InvalidObservable(String),

    #[error("invalid quantum state: {0}")]
    InvalidState(String),

    #[error("invalid measurement setting: {0}")]
    InvalidSetting(String),

    #[error("input behavior is signaling (deviation {0:.3e})")]
    SignalingInput(f64),

    #[error("linear program failed: {0}")]
    LpFailure(String),

    #[error("count record is missing setting pair ({x}, {y})")]
    MissingSettings { x: usize, y: usize },

    #[error("setting pair ({x}, {y}) has no coincidences")]
    EmptySettingPair { x: usize, y: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("unknown functional `{0}`")]
    UnknownFunctional(String),

    #[error("fixture error: {0}")]
    Fixture(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

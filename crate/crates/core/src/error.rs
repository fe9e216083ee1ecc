use thiserror::Error;

/// Errors raised by the fairness post-processing pipeline.
#[derive(Debug, Error)]
pub enum FairError {
    #[error("empty sample")]
    EmptySample,

    #[error("invalid score {value} at position {index}: scores must be finite")]
    InvalidScore { index: usize, value: f64 },

    #[error("invalid probability {0}")]
    InvalidProbability(f64),

    #[error("size mismatch: {left} vs {right}")]
    SizeMismatch { left: usize, right: usize },

    #[error("group `{group}` has {count} observation(s); at least 2 are required")]
    DegenerateGroup { group: String, count: usize },

    #[error("unknown group `{group}`{}", .index.map(|i| format!(" at row {i}")).unwrap_or_default())]
    UnknownGroup { group: String, index: Option<usize> },

    #[error("numerical domain error: {0}")]
    NumericalDomain(String),

    #[error("optimizer did not converge on any of {restarts} restart(s) (best objective {best_objective})")]
    ConvergenceFailure { restarts: usize, best_objective: f64 },

    #[error("support violation: {0}")]
    SupportViolation(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid input: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, FairError>;

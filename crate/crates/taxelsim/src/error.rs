//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid rotation: {0}")]
    InvalidRotation(String),

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("model mismatch: expected {expected}, got {got}")]
    ModelMismatch { expected: usize, got: usize },

    #[error("invalid shape: {0}")]
    InvalidShape(String),

    #[error("config error at {path}: {message}")]
    Config { path: String, message: String },

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("poisoned state at step {step}: {detail}")]
    PoisonedState { step: usize, detail: String },

    #[error("episode already terminated at step {0}")]
    EpisodeTerminated(usize),

    #[error("policy error at step {step}: {source}")]
    Policy {
        step: usize,
        #[source]
        source: Box<dyn std::error::Error + Send + Sync>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl SimError {
    pub fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        SimError::Config {
            path: path.into(),
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, SimError>;

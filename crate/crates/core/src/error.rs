use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("scenario lists {got} HAPS positions, expected {expected}")]
    ScenarioLength { expected: usize, got: usize },
    #[error("unknown scenario `{0}` (expected 1..4 or \"random\")")]
    InvalidScenario(String),
    #[error("action {index} out of bounds: angle {angle}, distance {distance}")]
    ActionOutOfBounds { index: usize, angle: f64, distance: f64 },
    #[error("expected {expected} actions, got {got}")]
    ActionCount { expected: usize, got: usize },
    #[error("step called after the episode finished")]
    StepAfterDone,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("numerical abort: {0}")]
    Numerical(String),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error("unknown baseline `{0}`")]
    UnknownBaseline(String),
    #[error("evaluation needs at least one episode")]
    EmptyEvaluation,
    #[error("metrics: {0}")]
    Metrics(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, SimError>;

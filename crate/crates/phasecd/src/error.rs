use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("real embedding length must be even, got {0}")]
    OddEmbeddingLength(usize),
    #[error("coordinate index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },
    #[error("reference signal has zero norm")]
    ZeroReference,
    #[error("polynomial is identically zero")]
    IdenticallyZero,
    #[error("polynomial is unbounded below; no finite minimizer")]
    Unbounded,
    #[error("empty interval: lo {lo} > hi {hi}")]
    EmptyInterval { lo: f64, hi: f64 },
    #[error("all intensities are zero; spectral initialization is degenerate")]
    DegenerateSpectral,
    #[error("objective increased for {0} consecutive fixed-step iterations; run aborted")]
    Diverged(usize),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("not enough samples: need at least {need}, got {got}")]
    NotEnoughSamples { need: usize, got: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("serialization failed: {0}")]
    Serialize(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

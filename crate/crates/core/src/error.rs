use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("scale too coarse for support: index set is empty at j = {scale}")]
    EmptyIndexSet { scale: u32 },

    #[error(
        "cascade did not converge after {iterations} iterations (sup-norm change {change:.3e})"
    )]
    CascadeDidNotConverge { iterations: usize, change: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("zero sample variance in dimension {dim}")]
    ZeroVariance { dim: usize },

    #[error("non-positive density {value} at point {index}")]
    NonPositiveDensity { index: usize, value: f64 },

    #[error("point {index} lies outside [0,1]^d")]
    OutOfDomain { index: usize },

    #[error("feature matrix has numerical rank 0")]
    ZeroRank,

    #[error("kernel diagonal vanishes at sample point {index}")]
    ZeroDiagonal { index: usize },

    #[error("residual diagonal {value:.3e} below the negative clamp threshold")]
    NegativeResidual { value: f64 },

    #[error("rejection envelope violated at step {step}: density {density:.4e} exceeds bound {bound:.4e} (grid too coarse)")]
    EnvelopeViolated {
        step: usize,
        density: f64,
        bound: f64,
    },

    #[error("more than {limit} rejections while drawing point {step}")]
    TooManyRejections { step: usize, limit: usize },

    #[error("index {index} out of range for {len} items")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("cost guard exceeded: {0}")]
    CostGuard(String),

    #[error("supports differ between the two distributions")]
    SupportMismatch,

    #[error("unknown test function `{0}`")]
    UnknownFunction(String),

    #[error("unknown sampler `{0}`")]
    UnknownSampler(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("malformed file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

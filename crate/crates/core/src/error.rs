use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("tau must be positive, got {0}")]
    NonPositiveTau(f64),
    #[error("kernel derivatives are undefined at tau = 0")]
    ZeroTau,
    #[error("matrix is not positive definite ({0})")]
    SingularMatrix(String),
    #[error("quadrature did not reach tolerance: {0}")]
    QuadratureFailure(String),
    #[error("grid too coarse: {0}")]
    GridTooCoarse(String),
    #[error("padding too small: relative boundary leakage {leakage:.3e} exceeds {limit:.1e}")]
    PaddingTooSmall { leakage: f64, limit: f64 },
    #[error("truncation radius {epsilon} is below the grid resolution {step}")]
    EpsilonBelowGrid { epsilon: f64, step: f64 },
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("ball radius {radius} is below the grid resolution {step}")]
    RadiusBelowGrid { radius: f64, step: f64 },
    #[error("weight is not integrable on a sampled ball: {0}")]
    NonIntegrableWeight(String),
    #[error("invalid coefficient field: {0}")]
    InvalidField(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("malformed field file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

use thiserror::Error;

pub type Result<T> = std::result::Result<T, HarnessError>;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("family member {index} has a zero denominator")]
    DegenerateDenominator { index: usize },
    #[error("the function family is empty")]
    EmptyFamily,
    #[error(transparent)]
    Core(#[from] parabolic_core::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

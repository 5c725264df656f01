use jetidf_core::AlgebraError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LabError {
    #[error("invalid truncation: {0}")]
    Spec(String),
    #[error("unbounded slice: {0}")]
    Unbounded(String),
    #[error("image escapes the target slice: {0}")]
    Escapes(String),
    #[error("not a complex: {0}")]
    NotComplex(String),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

pub type Result<T> = std::result::Result<T, LabError>;

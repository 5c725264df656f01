use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlgebraError {
    #[error("invalid bundle configuration: {0}")]
    InvalidConfig(String),
    #[error("operands built against different bundle configurations ({0} vs {1})")]
    MixedConfig(String, String),
    #[error("slot {slot} exceeds k={k}")]
    SlotOutOfRange { slot: usize, k: usize },
    #[error("coordinate out of range: {0}")]
    CoordinateOutOfRange(String),
    #[error("input outside the operation's domain: {0}")]
    Domain(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("not evolutionary: {0}")]
    NotEvolutionary(String),
    #[error("operator order exceeds the probe bound {0}")]
    OrderBound(u32),
}

pub type Result<T> = std::result::Result<T, AlgebraError>;

use thiserror::Error;

/// A configuration value that violates a documented invariant.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid specification: {0}")]
pub struct SpecError(pub String);

impl SpecError {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Self(msg.into())
    }
}

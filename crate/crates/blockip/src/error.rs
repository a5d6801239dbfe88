use thiserror::Error;

/// Errors shared by every solver component.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("index mismatch: expected [{expected}], found [{found}]")]
    IndexMismatch { expected: String, found: String },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("resource limit reached: {0}")]
    ResourceLimit(String),
    #[error("internal inconsistency: {0}")]
    Internal(String),
    #[error("line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn is_resource_limit(&self) -> bool {
        matches!(self, Error::ResourceLimit(_))
    }
}

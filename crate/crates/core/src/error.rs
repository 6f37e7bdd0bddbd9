use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A numerical procedure failed to reach its tolerance.
    #[error("numeric error: {0}")]
    Numeric(String),

    /// An input function violates an assumption the bound relies on.
    #[error("model assumption violated: {0}")]
    ModelAssumption(String),

    #[error("configuration error: {0}")]
    Config(String),

    /// A subensemble that must hold events is empty.
    #[error("empty subensemble: {0}")]
    EmptySubensemble(String),

    /// Cells or bins hold fewer events than required.
    #[error("insufficient data in {}: {}", .what, .offending.join(", "))]
    InsufficientData { what: String, offending: Vec<String> },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

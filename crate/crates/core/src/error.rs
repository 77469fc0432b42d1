use thiserror::Error;

/// Errors raised by every module of the toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum DapError {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A document could not be parsed.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// A parsed entry violates a type invariant.
    #[error("invalid field `{field}` in `{entry}`: {message}")]
    Field {
        entry: String,
        field: String,
        message: String,
    },

    /// A request would exceed a configured size limit.
    #[error("resource limit: {0}")]
    Resource(String),

    /// A least-squares design matrix has insufficient rank.
    #[error("rank deficient fit: {0}")]
    Rank(String),

    /// Two inputs that must share structure do not.
    #[error("structural mismatch: {0}")]
    Structural(String),

    /// A named item is missing from a table.
    #[error("lookup failed: {0}")]
    Lookup(String),

    /// A truncated sum or grid captured too little weight.
    #[error("truncation: {0}")]
    Truncation(String),

    /// Input data are internally inconsistent.
    #[error("consistency: {0}")]
    Consistency(String),
}

impl DapError {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        DapError::Domain(msg.into())
    }

    pub(crate) fn field(entry: &str, field: &str, msg: impl Into<String>) -> Self {
        DapError::Field {
            entry: entry.to_string(),
            field: field.to_string(),
            message: msg.into(),
        }
    }

    /// Short machine-readable tag for the error variant.
    pub fn kind(&self) -> &'static str {
        match self {
            DapError::Domain(_) => "domain",
            DapError::Parse { .. } => "parse",
            DapError::Field { .. } => "field",
            DapError::Resource(_) => "resource",
            DapError::Rank(_) => "rank",
            DapError::Structural(_) => "structural",
            DapError::Lookup(_) => "lookup",
            DapError::Truncation(_) => "truncation",
            DapError::Consistency(_) => "consistency",
        }
    }
}

pub type Result<T> = std::result::Result<T, DapError>;

/// Rejects non-finite or non-positive values.
pub(crate) fn require_positive(name: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(DapError::domain(format!("{name} must be positive and finite, got {value}")))
    }
}

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid element: {0}")]
    InvalidElement(String),

    #[error("sets belong to different groups")]
    ContextMismatch,

    #[error("empty set where a non-empty set is required: {0}")]
    EmptySet(&'static str),

    #[error("parameter out of range: {0}")]
    ParameterRange(String),

    #[error("subset violation: {0}")]
    SubsetViolation(String),

    #[error("resource budget exceeded: {what} needs {needed} pairs, budget is {budget}")]
    ResourceExceeded {
        what: &'static str,
        needed: u128,
        budget: u64,
    },

    #[error("invalid group: {0}")]
    InvalidGroup(String),

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("malformed certificate: {0}")]
    MalformedCertificate(String),

    /// A proven inequality failed at run time. Always a bug.
    #[error("invariant violated: {0}")]
    InvariantViolated(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Short machine-readable tag used in structured error output.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidElement(_) => "invalid_element",
            Error::ContextMismatch => "context_mismatch",
            Error::EmptySet(_) => "empty_set",
            Error::ParameterRange(_) => "parameter_range",
            Error::SubsetViolation(_) => "subset_violation",
            Error::ResourceExceeded { .. } => "resource_exceeded",
            Error::InvalidGroup(_) => "invalid_group",
            Error::InvalidInstance(_) => "invalid_instance",
            Error::MalformedCertificate(_) => "malformed_certificate",
            Error::InvariantViolated(_) => "invariant_violated",
            Error::Json(_) => "json",
            Error::Io(_) => "io",
        }
    }

    pub fn is_resource(&self) -> bool {
        matches!(self, Error::ResourceExceeded { .. })
    }
}

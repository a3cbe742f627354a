use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain where the quantity is defined.
    #[error("{0}")]
    Domain(String),

    /// The two-site generator is (numerically) defective; the closed form
    /// has a removable singularity there.
    #[error("exceptional point: |Omega| = {abs_omega:e} is within the coalescence tolerance; use ep_limit")]
    ExceptionalPoint { abs_omega: f64 },

    /// A decay channel required by a closed-form expression is shut.
    #[error("channel closed: {0}; use the time-domain branching oracle")]
    ChannelClosed(String),

    /// A numerical method could not certify the requested accuracy.
    #[error("{message} (recommended: {recommended:e})")]
    Accuracy { message: String, recommended: f64 },

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid `{key}`: requires {constraint}")]
    Validation { key: String, constraint: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn validation(key: impl Into<String>, constraint: impl Into<String>) -> Self {
        Error::Validation {
            key: key.into(),
            constraint: constraint.into(),
        }
    }

    /// Stable machine-readable tag for the error class.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::ExceptionalPoint { .. } => "exceptional_point",
            Error::ChannelClosed(_) => "channel_closed",
            Error::Accuracy { .. } => "accuracy",
            Error::Parse { .. } => "parse",
            Error::Validation { .. } => "validation",
            Error::Io(_) => "io",
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        }
    }
}

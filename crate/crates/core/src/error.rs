use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    Parameter { name: String, reason: String },

    /// Every Y value is tied, so `sum L_i (n - L_i)` is zero.
    #[error("degenerate denominator: all Y values are tied")]
    DegenerateDenominator,

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("oracle failed to converge: {0}")]
    Oracle(String),

    #[error("{path}:{line}: {reason}")]
    Parse {
        path: String,
        line: u64,
        reason: String,
    },

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn param(name: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Parameter {
            name: name.into(),
            reason: reason.into(),
        }
    }
}

use thiserror::Error;

/// Crate-wide error type. Each variant maps to one CLI exit code.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed input file or argument.
    #[error("parse error: {0}")]
    Parse(String),

    /// An enumeration/size guard would be exceeded.
    #[error("budget exceeded: {0}")]
    Budget(String),

    /// A mathematical precondition of the requested operation is violated.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// A parameter declared normalized/multiplicative has a negative
    /// inclusion-exclusion transform, certifying it is not a density limit.
    #[error("negative dagger value {value:e} at graph {graph}")]
    NegativeDagger { graph: String, value: f64 },

    /// An identity the library maintains internally failed to hold.
    #[error("invariant breach: {0}")]
    Invariant(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code for the CLI: 2 parse, 3 budget, 4 math
    /// precondition, 5 internal invariant.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse(_) | Error::Io(_) => 2,
            Error::Budget(_) => 3,
            Error::Precondition(_) | Error::NegativeDagger { .. } => 4,
            Error::Invariant(_) => 5,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

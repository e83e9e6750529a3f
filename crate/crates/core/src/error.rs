use thiserror::Error;

pub type Result<T, E = FrocError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum FrocError {
    /// Malformed input file; `line` is 1-based and counts the header.
    #[error("{file} line {line}: {message}")]
    Parse {
        file: String,
        line: u64,
        message: String,
    },

    #[error("invalid data: {0}")]
    InvalidData(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// An estimate sits on the boundary of the parameter space.
    #[error("boundary estimate; CI theory inapplicable: {0}")]
    Boundary(String),

    #[error("singular matrix: {0}")]
    Singular(String),

    #[error("no convergence: {0}")]
    NoConvergence(String),

    /// A requested operating point lies outside what the fitted model can attain.
    #[error("out of range: {0}")]
    OutOfRange(String),

    /// A simulation scenario fails too often to report coverage.
    #[error("ill-posed scenario: {0}")]
    IllPosed(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Coarse classification used for CLI exit codes and C error codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Data,
    Numerical,
}

impl FrocError {
    pub fn class(&self) -> ErrorClass {
        match self {
            FrocError::Boundary(_)
            | FrocError::Singular(_)
            | FrocError::NoConvergence(_)
            | FrocError::OutOfRange(_)
            | FrocError::IllPosed(_) => ErrorClass::Numerical,
            _ => ErrorClass::Data,
        }
    }

    /// Short machine-readable tag.
    pub fn kind(&self) -> &'static str {
        match self {
            FrocError::Parse { .. } => "parse",
            FrocError::InvalidData(_) => "invalid_data",
            FrocError::InvalidArgument(_) => "invalid_argument",
            FrocError::Boundary(_) => "boundary_estimate",
            FrocError::Singular(_) => "singular",
            FrocError::NoConvergence(_) => "no_convergence",
            FrocError::OutOfRange(_) => "out_of_range",
            FrocError::IllPosed(_) => "ill_posed",
            FrocError::Io(_) => "io",
            FrocError::Json(_) => "json",
        }
    }
}

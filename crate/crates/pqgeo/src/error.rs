use thiserror::Error;

/// Errors raised by the toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("malformed form: {0}")]
    MalformedForm(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("zero vector")]
    ZeroVector,
    #[error("linearly dependent basis (rank {rank} < {len})")]
    DependentBasis { rank: usize, len: usize },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("wrong sheet: b(x, y) = {0:e} > 0")]
    WrongSheet(f64),
    #[error("empty input: {0}")]
    Empty(&'static str),
    #[error("unbounded: {0}")]
    Unbounded(String),
    #[error("sample set is not closed under the antipodal map")]
    NotAntipodal,
    #[error("unsupported diagram: {0}")]
    UnsupportedDiagram(String),
    #[error("no solution (deficit {deficit:e})")]
    NoSolution { deficit: f64 },
    #[error("singular matrix")]
    Singular,
    #[error("matrix does not preserve the form (residual {0:e})")]
    NotFormPreserving(f64),
    #[error("direction does not centralize the edge group (residual {0:e})")]
    NotCentralizing(f64),
    #[error("index {index} out of range (limit {limit})")]
    OutOfRange { index: usize, limit: usize },
    #[error("no convergence after {0} iterations")]
    NoConvergence(usize),
    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },
}

impl Error {
    /// True when the error comes from bad input rather than a numerical failure.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::MalformedForm(_)
                | Error::DimensionMismatch { .. }
                | Error::ZeroVector
                | Error::DependentBasis { .. }
                | Error::Precondition(_)
                | Error::WrongSheet(_)
                | Error::Empty(_)
                | Error::NotAntipodal
                | Error::UnsupportedDiagram(_)
                | Error::OutOfRange { .. }
                | Error::Parse { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;

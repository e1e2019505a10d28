use thiserror::Error;

use crate::groupoid::ValidationReport;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown element `{0}`")]
    UnknownElement(String),
    #[error("element index {0} out of range")]
    ElementOutOfRange(usize),
    #[error("algebra elements belong to different contexts")]
    ContextMismatch,
    #[error("expected a monomial element (support must be a bisection)")]
    NotMonomial,
    #[error("expected a diagonal element (support must lie in the unit space)")]
    NotDiagonal,
    #[error("element is not a member of the ultrafilter at `{0}`")]
    NotInUltrafilter(String),
    #[error("invalid domination witness: {0}")]
    InvalidWitness(String),
    #[error("no domination: {0}")]
    NotDominated(String),
    #[error("oracle disagreement: {0}")]
    OracleDisagreement(String),
    #[error("semigroup is not a Cartan semigroup: {0}")]
    NotCartan(String),
    #[error("invalid bisection basis: {0}")]
    InvalidBasis(String),
    #[error("invalid groupoid:\n{0}")]
    Invalid(ValidationReport),
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("{0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse { line: e.line(), column: e.column(), message: e.to_string() }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

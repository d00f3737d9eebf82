use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("unknown generator `{0}`")]
    UnknownGenerator(String),
    #[error("elements belong to different graded contexts")]
    ContextMismatch,
    #[error("context has no differential for `{0}`")]
    MissingDifferential(String),
    #[error("degree mismatch: {0}")]
    DegreeMismatch(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("3-form is not closed: dH = {0}")]
    NotClosed(String),
    #[error("frame is rank deficient: {0}")]
    RankDeficient(String),
    #[error("non-polynomial result: {0}")]
    NonPolynomial(String),
    #[error("internal consistency failure: {0}")]
    Inconsistent(String),
    #[error("non-exact remainder: {0}")]
    NotExact(String),
    #[error("unknown format `{0}`")]
    UnknownFormat(String),
}

pub type Result<T> = std::result::Result<T, Error>;

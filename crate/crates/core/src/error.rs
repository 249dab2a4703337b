use thiserror::Error;

use crate::convexity::Verdict;
use crate::expr::{DiffError, EvalError, ParseError};
use crate::quad::{QuadError, RectError};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Diff(#[from] DiffError),
    #[error(transparent)]
    Quad(#[from] QuadError),
    #[error(transparent)]
    Rect(#[from] RectError),
    /// An inequality's hypothesis could not be established; callers report a skip.
    #[error("hypothesis not established: {hypothesis}")]
    HypothesisViolated { hypothesis: String, verdict: Box<Verdict> },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

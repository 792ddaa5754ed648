use thiserror::Error;

use crate::ids::UserId;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid split: {0}")]
    Validation(String),

    #[error("user {0:?} has no posts")]
    EmptyUser(UserId),

    #[error("{what} index {index} out of range (bound {bound})")]
    OutOfRange {
        what: &'static str,
        index: usize,
        bound: usize,
    },

    #[error("ranked list is invalid: {0}")]
    Ranking(String),

    #[error("candidate list is empty")]
    EmptyCandidates,

    #[error("true tag set is empty")]
    EmptyTruth,

    #[error("corrupt snapshot: {0}")]
    Snapshot(String),

    #[error("corrupt model file: {0}")]
    Model(String),

    #[error("reports are not comparable: {0}")]
    Incomparable(String),
}

pub type Result<T> = std::result::Result<T, Error>;

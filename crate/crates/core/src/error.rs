use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("letter {letter:?} is not in the {alphabet} alphabet")]
    UnknownLetter {
        letter: String,
        alphabet: &'static str,
    },
    #[error("invalid system: {0}")]
    InvalidSystem(String),
    #[error("step budget of {0} substitutions exceeded")]
    StepBudget(usize),
    #[error("budget exceeded: {0}")]
    Budget(String),
    #[error("conflicting rules for left-hand side {lhs}: {first} vs {second}")]
    Conflict {
        lhs: String,
        first: String,
        second: String,
    },
    #[error("alphabets overlap on {0}")]
    AlphabetOverlap(String),
    #[error("parameters rejected: {0}")]
    Params(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

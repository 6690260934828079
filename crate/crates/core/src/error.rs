use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid alphabet: {0}")]
    InvalidAlphabet(String),

    #[error("invalid word source: {0}")]
    InvalidSource(String),

    #[error("generator exhausted: needed {needed} symbols, only {available} available")]
    GeneratorExhausted { needed: usize, available: usize },

    #[error("the full shift is enumerative and has no single word; use the slice API")]
    Enumerative,

    #[error("window length {n} is not in 1..={len}")]
    WindowLength { n: usize, len: usize },

    #[error("factorial consistency violated at n={n}: {witness}")]
    Inconsistent { n: usize, witness: String },

    #[error("letter {0:?} already belongs to the alphabet")]
    LetterInAlphabet(char),

    #[error("depth {depth} exceeds schedule length {len}")]
    DepthExceedsSchedule { depth: usize, len: usize },

    #[error("vertex count {vertices} exceeds eigensolver cap {cap}")]
    CapExceeded { vertices: usize, cap: usize },

    #[error("empty spectrum")]
    EmptySpectrum,

    #[error("not materializable: {0}")]
    NotMaterializable(String),

    #[error("truncation guard: n={n} exceeds prefix length {prefix_len} / {ratio}")]
    TruncationGuard { n: usize, prefix_len: usize, ratio: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code: 2 for configuration problems, 3 for data and
    /// consistency problems.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidAlphabet(_)
            | Error::InvalidSource(_)
            | Error::Enumerative
            | Error::LetterInAlphabet(_)
            | Error::DepthExceedsSchedule { .. }
            | Error::TruncationGuard { .. }
            | Error::CapExceeded { .. }
            | Error::Parse(_)
            | Error::Config(_) => 2,
            _ => 3,
        }
    }
}

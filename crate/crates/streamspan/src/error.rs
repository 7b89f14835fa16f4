//! Error type shared by every module.

use thiserror::Error;

/// Everything that can go wrong in the toolkit.
///
/// Sketch-level `FAIL`/`OVERFLOW` outcomes are ordinary return values; they only
/// become errors once an algorithm has exhausted its retries.
#[derive(Debug, Error)]
pub enum Error {
    #[error("vertex {vertex} out of range for n = {n}")]
    VertexOutOfRange { vertex: u64, n: usize },
    #[error("self-loop on vertex {0}")]
    SelfLoop(u32),
    #[error("subgraph violation: edge ({0}, {1}) is not in the base graph")]
    SubgraphViolation(u32, u32),
    #[error("vertex counts differ: {0} vs {1}")]
    SizeMismatch(usize, usize),
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("coordinate {coord} out of range for dimension {dim}")]
    CoordOutOfRange { coord: u64, dim: u64 },
    #[error("incompatible sketches: {0}")]
    IncompatibleSketch(String),
    #[error("malformed sketch encoding: {0}")]
    Decode(String),
    #[error("stream usage error: {0}")]
    Usage(String),
    #[error("invalid stream: {0}")]
    InvalidStream(String),
    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("generation failed: {0}")]
    Generation(String),
    #[error("sketch failure: {0}")]
    SketchFailure(String),
    #[error("randomness exhausted after {attempts} attempts: {last}")]
    RandomnessExhausted { attempts: u32, last: String },
    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code used by the command-line harness.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::SketchFailure(_)
            | Error::RandomnessExhausted { .. }
            | Error::BudgetExceeded(_) => 3,
            Error::Io(_) => 1,
            _ => 2,
        }
    }

    /// True for outcomes that a fresh draw of randomness may cure.
    pub fn is_retryable(&self) -> bool {
        matches!(self, Error::SketchFailure(_) | Error::BudgetExceeded(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;

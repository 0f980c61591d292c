use std::path::PathBuf;

use crate::model::ModelKind;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    Dimension { expected: usize, actual: usize },

    #[error("vectors must have at least one component")]
    EmptyVector,

    #[error("non-finite component at index {index}")]
    NonFinite { index: usize },

    /// The input has no real pre-image (or violates the packed layout precondition).
    #[error("spectrum is not conjugate symmetric: deviation {deviation:.3e} exceeds {bound:.3e}")]
    NotSymmetric { deviation: f64, bound: f64 },

    #[error("model kind mismatch: expected {expected}, found {found}")]
    KindMismatch { expected: ModelKind, found: ModelKind },

    #[error("unknown entity `{0}`")]
    UnknownEntity(String),

    #[error("unknown relation `{0}`")]
    UnknownRelation(String),

    #[error("id {id} out of range for vocabulary of size {len}")]
    IdOutOfRange { id: usize, len: usize },

    #[error("{}:{line}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{}: no triples", .0.display())]
    EmptyDataset(PathBuf),

    #[error("corrupt model file at byte {offset}: {message}")]
    CorruptFile { offset: u64, message: String },

    #[error("training diverged: non-finite parameters at epoch {epoch}")]
    Diverged { epoch: usize },

    #[error("inconclusive: {0}")]
    Inconclusive(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

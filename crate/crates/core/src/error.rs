use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("singular {size}x{size} matrix: rank {rank}, deficit {}", size - rank)]
    Singular { size: usize, rank: usize },

    #[error("matrix is not full row rank: rank {rank}, {rows} rows")]
    RankDeficient { rows: usize, rank: usize },

    #[error("invalid scheme: {0}")]
    Validation(String),

    #[error("perpendicularity violated: A_{i} B_{j}^t != 0")]
    Perpendicularity { i: usize, j: usize },

    #[error(
        "generation failed after {attempts} attempts (best rank A {best_rank_a}/{rows_a}, B {best_rank_b}/{rows_b})"
    )]
    Generation {
        attempts: usize,
        rows_a: usize,
        rows_b: usize,
        best_rank_a: usize,
        best_rank_b: usize,
    },

    #[error("resource limit: {0}")]
    Resource(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn shape(msg: impl Into<String>) -> Error {
    Error::Shape(msg.into())
}

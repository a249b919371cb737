use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix must be nonempty")]
    EmptyMatrix,

    #[error("entry count {got} does not match {rows}x{cols}")]
    BadEntryCount { rows: usize, cols: usize, got: usize },

    #[error("dimension mismatch in {context}: expected {expected:?}, found {found:?}")]
    DimensionMismatch {
        context: &'static str,
        expected: (usize, usize),
        found: (usize, usize),
    },

    #[error("matrix has negative entry at ({row},{col})")]
    NegativeEntry { row: usize, col: usize },

    #[error("matrix is identically zero in {0}")]
    ZeroMatrix(&'static str),

    #[error("matrix is not symmetric")]
    Asymmetric,

    #[error("rank-deficient system: {0}")]
    RankDeficient(String),

    #[error("iteration cap exceeded{}", column.map(|c| format!(" on column {c}")).unwrap_or_default())]
    IterationCap { column: Option<usize> },

    #[error("column {0} failed: {1}")]
    Column(usize, Box<Error>),

    #[error("zero column at index {0}")]
    ZeroColumn(usize),

    #[error("isolated point at index {0} (zero kernel row sum)")]
    IsolatedPoint(usize),

    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

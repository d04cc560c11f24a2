use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("input table is empty (needs a header row and at least one data row)")]
    EmptyTable,
    #[error("row {row}, column {col}: {msg}")]
    Parse { row: usize, col: usize, msg: String },
    #[error("row {row}, column {col}: negative gross return {value}")]
    NegativeReturn { row: usize, col: usize, value: f64 },
    #[error("row {row}: every gross return is zero")]
    AllZeroRow { row: usize },
    #[error("row {row}: expected {expected} columns, found {found}")]
    RaggedRow {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("invalid return vector: {0}")]
    InvalidReturnVector(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid strategy weights: {0}")]
    InvalidWeights(String),
    #[error("order must be at least 1")]
    InvalidOrder,
    #[error("first-half ruin: x'B1 = 0, second-half portfolio undefined")]
    FirstHalfRuin,
    #[error("half-period {half} is not a unit basis vector; history is not a Kelly sequence")]
    NotKellySequence { half: usize },
    #[error("Kelly counts are empty (T = 0)")]
    EmptyCounts,
    #[error("hindsight problem infeasible: every candidate strategy is ruined")]
    Infeasible,
    #[error("universal ruin in period {period}: every strategy in the average has zero wealth")]
    UniversalRuin { period: usize },
    #[error("invalid prior: {0}")]
    InvalidPrior(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("invalid comparison: {0}")]
    InvalidComparison(String),
}

pub type Result<T> = std::result::Result<T, Error>;

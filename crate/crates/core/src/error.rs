use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dataset is empty")]
    EmptyDataset,

    #[error("dataset has zero dimensions")]
    ZeroDimensions,

    #[error("row {row} has {found} coordinates, expected {expected}")]
    RaggedRow {
        row: usize,
        expected: usize,
        found: usize,
    },

    #[error("coordinate {dim} of row {row} is not finite")]
    NonFiniteCoordinate { row: usize, dim: usize },

    #[error("query has {found} intervals but the database has {expected} dimensions")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("interval for dimension {dim} is inverted: [{lower}, {upper}]")]
    InvertedInterval { dim: usize, lower: f64, upper: f64 },

    #[error("bound for dimension {dim} is not finite")]
    NonFiniteBound { dim: usize },

    #[error("sub-database count {n_db} must be in 1..={n}")]
    SubDatabaseCount { n_db: usize, n: usize },

    #[error("k-vector size must be at least 2, got {0}")]
    GridTooSmall(usize),

    #[error("value range [{lo}, {hi}] is degenerate for a mapping line")]
    DegenerateDimension { lo: f64, hi: f64 },

    #[error("value range [{lo}, {hi}] overflows the mapping line")]
    RangeOverflow { lo: f64, hi: f64 },

    #[error("operation requires {0}, which this structure was built without")]
    MissingAuxiliary(&'static str),

    #[error("{path}:{line}: {message}")]
    Csv {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("bad magic number {0:?}")]
    BadMagic([u8; 4]),

    #[error("unsupported format version {0}")]
    UnsupportedVersion(u32),

    #[error("file is truncated: {0}")]
    Truncated(&'static str),

    #[error("inconsistent structure file: {0}")]
    Inconsistent(String),

    #[error("{algo} returned {found} ids, expected {expected} ({context})")]
    ResultMismatch {
        algo: String,
        expected: usize,
        found: usize,
        context: String,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        match e.into_kind() {
            csv::ErrorKind::Io(e) => Error::Io(e),
            other => Error::InvalidArgument(format!("csv: {other:?}")),
        }
    }
}

use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("schema error: {0}")]
    Schema(String),

    #[error("ingestion error at row {row}, column `{column}`: {message}")]
    Ingestion {
        /// 1-based data row (the header is row 0).
        row: usize,
        column: String,
        message: String,
    },

    #[error("column `{0}` has zero variance")]
    DegenerateColumn(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("no positive kernel weight at evaluation point {index} (t = {t})")]
    EmptyNeighborhood { index: usize, t: f64 },

    #[error("invalid penalty: {0}")]
    Penalty(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("degenerate lambda grid: {0}")]
    DegenerateGrid(String),

    #[error("cross-validation plan error: {0}")]
    Plan(String),

    #[error("group-effect bound undefined: {0}")]
    BoundUndefined(String),

    #[error("linear solve failed: {0}")]
    Numerical(String),

    #[error("too many failed replicates: {failed} of {total}")]
    ExperimentFailed { failed: usize, total: usize },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

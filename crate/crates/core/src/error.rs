use std::path::PathBuf;

/// Errors produced anywhere in the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("dataset: {0}")]
    Dataset(String),

    #[error("row {row}, column `{column}`: {message}")]
    Cell {
        row: usize,
        column: String,
        message: String,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("config: {0}")]
    Config(String),

    #[error("unknown loss `{0}`")]
    UnknownLoss(String),

    #[error("non-finite training loss at round {round}")]
    NonFiniteLoss { round: usize },

    #[error("non-finite loss value at row {row}")]
    NonFiniteRow { row: usize },

    #[error("feature arity mismatch: expected {expected} features ({names}), got {got}")]
    Arity {
        expected: usize,
        got: usize,
        names: String,
    },

    #[error("model file: {0}")]
    ModelFormat(String),

    #[error("unsupported model format_version {found} (supported: {supported})")]
    Version { found: i64, supported: i64 },

    #[error("malformed tree: {0}")]
    Structure(String),

    #[error("evaluation: {0}")]
    Eval(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code used by the command-line front end.
    ///
    /// 2 = validation, 3 = runtime/numeric, 4 = I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io { .. } => 4,
            Error::NonFiniteLoss { .. } | Error::NonFiniteRow { .. } => 3,
            _ => 2,
        }
    }
}

use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("line {line}: expected {expected} fields, found {found}")]
    Arity {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("model file line {line}: {message}")]
    ModelFormat { line: usize, message: String },
    #[error("unsupported model format version {found}; this build reads version {supported}")]
    UnsupportedVersion { found: String, supported: u32 },
    #[error("model checksum mismatch: {0}")]
    Checksum(String),
    #[error(transparent)]
    Core(#[from] abcboost_core::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

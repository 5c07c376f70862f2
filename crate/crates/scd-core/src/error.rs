use std::path::PathBuf;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}:{line}: malformed line: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("{path}:{line}: unknown tag `{tag}` (expected B, I or O)")]
    UnknownTag {
        path: PathBuf,
        line: usize,
        tag: String,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("token index {index} out of vocabulary range (size {size})")]
    IndexOutOfRange { index: usize, size: usize },

    #[error("misaligned inputs: {0}")]
    Alignment(String),

    #[error("training diverged at epoch {epoch}: loss = {loss}")]
    Diverged { epoch: usize, loss: f64 },

    #[error("corrupt checkpoint: {0}")]
    Checkpoint(String),

    #[error("corrupt log file {path}: {msg}")]
    CorruptLog { path: PathBuf, msg: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

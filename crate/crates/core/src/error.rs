use std::path::PathBuf;

/// Errors produced anywhere in the workbench.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid task: {0}")]
    InvalidTask(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("action index {index} out of range for {len} actions")]
    ActionOutOfRange { index: usize, len: usize },

    #[error("episode already finished; call reset before stepping again")]
    EpisodeFinished,

    #[error("invalid config: {0}")]
    Config(String),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("unsupported format version {found} (this build reads version {supported})")]
    Version { found: u32, supported: u32 },

    #[error("incompatible: {0}")]
    Incompatible(String),

    // wrapped errors live in the message, not in `source()`
    #[error("{path}: {error}")]
    Io { path: PathBuf, error: std::io::Error },

    #[error("malformed JSON: {0}")]
    Json(serde_json::Error),

    #[error("csv: {0}")]
    Csv(csv::Error),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e)
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Csv(e)
    }
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            error: source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("ingest error{}: {message}", line.map(|l| format!(" at line {l}")).unwrap_or_default())]
    Ingest { line: Option<u64>, message: String },

    #[error("type error: {0}")]
    Type(String),

    #[error("schema error: {0}")]
    Schema(String),

    #[error("fit error: {0}")]
    Fit(String),

    #[error("predict error: {0}")]
    Predict(String),

    #[error("persist error ({}): {message}", path.display())]
    Persist { path: PathBuf, message: String },

    #[error("engine error: {0}")]
    Engine(String),

    #[error("argument error: {0}")]
    Arg(String),

    #[error("Υ undefined: the model makes constant predictions")]
    DegenerateModel,

    #[error("emit error: {0}")]
    Emit(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn ingest(line: Option<u64>, message: impl Into<String>) -> Self {
        Error::Ingest {
            line,
            message: message.into(),
        }
    }
}

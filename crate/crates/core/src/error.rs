use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed record: {0}")]
    MalformedRecord(String),

    #[error("line {line}: {message}")]
    Load { line: usize, message: String },

    #[error("corpus has no {0} records")]
    MissingClass(&'static str),

    #[error("model file line {line}: {message}")]
    ModelFormat { line: usize, message: String },

    #[error("metric undefined: {0}")]
    MetricUndefined(String),

    #[error("cannot split: {0}")]
    Split(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// A raw set score that cannot come out of a finished volleyball set.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("illegal set score {home}-{away} in set {set_index}: {reason}")]
pub struct IllegalSetScore {
    pub set_index: u8,
    pub home: u32,
    pub away: u32,
    pub reason: &'static str,
}

/// Argument outside the support of a distribution.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("domain error: {0}")]
pub struct DomainError(pub String);

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    IllegalSet(#[from] IllegalSetScore),

    #[error(transparent)]
    Domain(#[from] DomainError),

    #[error("line {line}: {message}")]
    MalformedRow { line: u64, message: String },

    #[error("game {game_id}: {message}")]
    InconsistentMatch { game_id: u32, message: String },

    #[error("no rows")]
    NoRows,

    #[error("data error: {0}")]
    Data(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("sampler initialisation failed: non-finite {component}")]
    Initialization { component: String },

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
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Whether the error comes from user-supplied data or configuration,
    /// as opposed to the sampler.
    pub fn is_validation(&self) -> bool {
        !matches!(self, Error::Initialization { .. })
    }
}

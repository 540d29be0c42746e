use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("feasibility precondition violated: {0}")]
    Infeasible(String),

    #[error("search space too large: {candidates} threshold sets exceed the cap of {cap}")]
    SearchTooLarge { candidates: u128, cap: u128 },

    #[error("empty network: no alive nodes")]
    EmptyNetwork,

    #[error("node {0} is dead")]
    DeadNode(usize),

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error on {path}: {source}")]
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

    /// True for errors caused by user input (config files, parameters).
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::Config(_) | Error::InvalidParameter(_) | Error::Infeasible(_)
        )
    }
}

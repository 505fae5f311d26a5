use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },

    #[error("{path}: {source}")]
    Json { path: PathBuf, source: serde_json::Error },

    #[error("{0}")]
    Input(String),

    #[error("{context}: {source}")]
    Compute { context: String, source: contraction_lab::Error },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error("writing output: {0}")]
    Write(#[from] std::io::Error),
}

impl Error {
    /// Every error is an input or parsing problem from the user's point of view.
    pub fn exit_code(&self) -> u8 {
        2
    }
}

impl Error {
    /// The reader went away (e.g. `| head`); not worth reporting.
    pub fn is_broken_pipe(&self) -> bool {
        let io = match self {
            Error::Write(e) => Some(e),
            Error::Csv(e) => match e.kind() {
                csv::ErrorKind::Io(e) => Some(e),
                _ => None,
            },
            _ => None,
        };
        io.is_some_and(|e| e.kind() == std::io::ErrorKind::BrokenPipe)
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub trait Context<T> {
    fn context(self, what: impl Into<String>) -> Result<T>;
}

impl<T> Context<T> for contraction_lab::Result<T> {
    fn context(self, what: impl Into<String>) -> Result<T> {
        self.map_err(|source| Error::Compute { context: what.into(), source })
    }
}

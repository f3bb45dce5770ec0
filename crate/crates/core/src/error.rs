use std::io;

use thiserror::Error;

/// Errors raised across the toolkit.
///
/// Validation failures (bad input, inadmissible exponents, unresolvable
/// grids) are distinguished from environment failures (I/O, parsing) so the
/// command line front end can map them onto exit codes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("inadmissible exponents: {0}")]
    Exponents(String),
    #[error("resolution: {0}")]
    Resolution(String),
    #[error("node budget exceeded: {nodes} nodes requested, budget is {budget}")]
    Budget { nodes: usize, budget: usize },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("domain is disconnected: {0} components under 8-connectivity")]
    Disconnected(usize),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

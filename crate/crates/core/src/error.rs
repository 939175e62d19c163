use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A value lies outside what the configured component can answer.
    #[error("value {value} out of supported range ({what})")]
    Range { value: u64, what: &'static str },

    /// A request would exceed the configured memory budget.
    #[error("{what} needs {needed} bytes, budget is {budget} bytes")]
    Resource {
        what: &'static str,
        needed: u64,
        budget: u64,
    },

    #[error("residue {residue} is not a reduced class modulo {modulus}")]
    InvalidClass { modulus: u64, residue: u64 },

    #[error("precondition violated: {0}")]
    Contract(String),

    #[error("invalid input: {0}")]
    Input(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("cannot load checkpoint {}: {reason}", path.display())]
    Checkpoint { path: PathBuf, reason: String },

    #[error("I/O error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

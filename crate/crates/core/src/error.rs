use thiserror::Error;

/// Errors raised by the simulator.
#[derive(Debug, Error)]
pub enum Error {
    /// The experiment configuration is inconsistent or out of range.
    #[error("configuration error: {0}")]
    Config(String),

    /// An operation received inputs outside its mathematical domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// A numerical invariant was violated internally.
    #[error("internal error: {0}")]
    Internal(String),

    #[error("drop {drop}: {source}")]
    Drop {
        drop: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// Attach the Monte Carlo drop index to an error.
    pub fn in_drop(self, drop: usize) -> Self {
        match self {
            e @ Error::Drop { .. } => e,
            e => Error::Drop {
                drop,
                source: Box::new(e),
            },
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{what} is not {property} (deviation {deviation:.3e})")]
    NotPhysical {
        what: String,
        property: &'static str,
        deviation: f64,
    },

    #[error("scenario mismatch: {0}")]
    Scenario(String),

    #[error("monomial {0} is not covered by the moment basis")]
    Coverage(String),

    #[error("inconsistent equality constraints (residual {0:.3e})")]
    Inconsistent(f64),

    #[error("no certificate: solver status {0}")]
    NoCertificate(String),

    #[error("solver failure: {0}")]
    Solver(String),

    #[error("SDPA parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("config error: {0}")]
    Config(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("internal consistency failure: {0}")]
    Internal(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

use thiserror::Error;

/// Crate-wide error type. The CLI maps variants onto process exit codes:
/// invalid configuration -> 1, numerical failure -> 2, IO -> 3.
#[derive(Error, Debug)]
pub enum Error {
    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("{what} did not converge within {iterations} iterations")]
    NonConvergence { what: String, iterations: usize },

    #[error("{what} diverges (no finite fixed point)")]
    Divergence { what: String },

    #[error("coordinate descent hit the sweep cap (kkt_gap = {kkt_gap:.3e})")]
    LassoMaxIterations {
        kkt_gap: f64,
        /// Best iterate found before giving up.
        solution: Box<crate::lasso::LassoSolution>,
    },

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidConfig(msg.into())
    }

    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for the CLI contract.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidConfig(_) => 1,
            Error::NonConvergence { .. }
            | Error::Divergence { .. }
            | Error::LassoMaxIterations { .. } => 2,
            Error::Io { .. } => 3,
        }
    }
}

use std::path::PathBuf;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("invalid parameters: {0}")]
    Domain(String),

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error(
        "eigensolver did not converge after {restarts} restarts (last residual {residual:.3e})"
    )]
    Convergence { restarts: usize, residual: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("propagator substep underflow at t = {0}")]
    Stiffness(f64),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code for the CLI: 1 usage/config, 2 numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Domain(_) | Error::Capacity(_) | Error::Config(_) => 1,
            Error::Io { .. } => 1,
            _ => 2,
        }
    }
}

use std::path::PathBuf;

/// Errors raised anywhere in the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An unsupported or inconsistent configuration (family/stage count, degree, bounds).
    #[error("configuration error: {0}")]
    Config(String),

    /// An argument outside the domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Interpolation nodes are repeated, so the interpolation problem has no unique solution.
    #[error("degenerate interpolation: {0}")]
    DegenerateInterpolation(String),

    /// LU factorization hit a pivot that is zero to working precision.
    #[error("singular matrix: zero pivot in column {column}")]
    SingularMatrix { column: usize },

    /// A nonlinearity was evaluated outside its domain (e.g. the logarithmic potential at |c| >= 1).
    #[error("singularity: {0}")]
    Singularity(String),

    /// The nonlinear solver stopped without meeting its tolerance.
    #[error("nonlinear solve did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

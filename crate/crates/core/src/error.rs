use thiserror::Error;

/// Errors raised by the numerical routines in this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is numerically singular (log|det| = {log_det:.3e} below threshold {threshold:.3e})")]
    SingularMatrix { log_det: f64, threshold: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimMismatch { expected: usize, found: usize },

    #[error("bad order: {0}")]
    BadOrder(String),

    #[error("theta must lie in (0, 1], got {0}")]
    BadTheta(f64),

    #[error("paired measures must have the same number of atoms ({0} vs {1})")]
    IndexMismatch(usize, usize),

    #[error("Lyapunov gap must be positive, got {0}; use the log-Hölder package (regime flag) instead")]
    DegenerateGap(f64),

    #[error("eccentricity must exceed 1, got {0}")]
    BadEccentricity(f64),

    #[error("contraction coefficient must lie in (0, 1), got {0}")]
    BadTau(f64),

    #[error("chain spectral radius must lie in [0, 1), got {0}")]
    BadRho(f64),

    #[error("transition matrix is not irreducible")]
    NotIrreducible,

    #[error("transition matrix is irreducible but periodic")]
    NotAperiodic,

    #[error("invalid grid: {0}")]
    BadGrid(String),

    #[error("evaluation window too close to the grid edge: {0}")]
    BadWindow(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid configuration: {0}")]
    BadConfig(String),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    /// True for errors caused by malformed user input rather than numerical breakdown.
    pub fn is_input_error(&self) -> bool {
        !matches!(self, Error::Numerical(_) | Error::SingularMatrix { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;

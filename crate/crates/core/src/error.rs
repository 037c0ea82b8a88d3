use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("Fock truncation: {0}")]
    Truncation(String),

    /// A single Laguerre step lost more norm than the trace tolerance allows.
    /// Recoverable by the caller with a smaller step.
    #[error("step too large: norm error {norm_error:.3e} exceeds {tolerance:.3e}")]
    StepTooLarge { norm_error: f64, tolerance: f64 },

    #[error("propagation diverged near t={t}: norm error {norm_error:.3e} after {halvings} step halvings")]
    Divergence { t: f64, norm_error: f64, halvings: u32 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("thermal cutoff too small: trace deficit {deficit:.3e} exceeds {limit:.3e}")]
    CutoffTooSmall { deficit: f64, limit: f64 },

    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit status used by the command-line runner.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. } | Error::InvalidInput(_) | Error::Truncation(_) => 2,
            Error::StepTooLarge { .. } | Error::Divergence { .. } => 3,
            Error::Io(_) => 4,
            Error::Numerical(_) | Error::CutoffTooSmall { .. } => 3,
        }
    }
}

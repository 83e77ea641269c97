use thiserror::Error;

/// Errors raised by the simulator.
#[derive(Debug, Error)]
pub enum Error {
    #[error("truncation inadequate: {0}")]
    Truncation(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("operator is not Hermitian (max entry deviation {0:e})")]
    NonHermitian(f64),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("degenerate mass: {0}")]
    DegenerateMass(String),

    #[error("Dirac Hamiltonian is singular: mass_energy must be positive")]
    SingularH,

    #[error("Wigner grid too small: boundary |W| = {0:e} exceeds 1e-4")]
    GridTooSmall(f64),

    #[error("no spectral peak: {0}")]
    NoPeak(String),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid configuration: {0}")]
    Validation(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit status used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse { .. } | Error::Validation(_) | Error::Config(_) => 2,
            Error::Io(_) => 1,
            _ => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

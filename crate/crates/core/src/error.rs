use thiserror::Error;

/// Everything that can go wrong in the toolkit.
///
/// Some variants (`ResonantFrequency`, `LatticeResonance`) are diagnostic
/// outcomes rather than failures: they carry the frequencies or modes at
/// which the shifted generator was found to be numerically singular.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid model spec: {0}")]
    InvalidSpec(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("generator is numerically singular (0 lies in the spectrum)")]
    SingularGenerator,

    #[error("resonant frequency s = {s}: i*s is numerically in the spectrum (sigma_min = {sigma_min:e})")]
    ResonantFrequency { s: f64, sigma_min: f64 },

    #[error("lattice resonance at modes {modes:?}: i*n*omega is numerically in the spectrum")]
    LatticeResonance { modes: Vec<i64> },

    #[error("unstable growth: non-finite state or norm at t = {t}")]
    UnstableGrowth { t: f64 },

    #[error("too few points: need at least {need}, got {got}")]
    TooFewPoints { need: usize, got: usize },

    #[error("step too large: dt = {dt} exceeds the limit {limit}")]
    StepTooLarge { dt: f64, limit: f64 },

    #[error("no eigenvalue within {tol:e} of the imaginary axis")]
    NoImaginaryEigenvalue { tol: f64 },

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        }
    }
}

/// Exit code for a usage error (unknown flag, missing `--seed`, ...).
pub const EXIT_USAGE: i32 = 2;

impl Error {
    /// Distinct nonzero process exit code per variant.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidSpec(_) => 10,
            Error::InvalidInput(_) => 11,
            Error::DimensionMismatch { .. } => 12,
            Error::SingularGenerator => 13,
            Error::ResonantFrequency { .. } => 14,
            Error::LatticeResonance { .. } => 15,
            Error::UnstableGrowth { .. } => 16,
            Error::TooFewPoints { .. } => 17,
            Error::StepTooLarge { .. } => 18,
            Error::NoImaginaryEigenvalue { .. } => 19,
            Error::Parse { .. } => 20,
            Error::Io(_) => 21,
        }
    }
}

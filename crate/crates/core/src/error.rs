use thiserror::Error;

use crate::grid::SampledField;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("invalid multiplier `{name}`: non-finite symbol at lattice index {index}")]
    InvalidMultiplier { name: String, index: usize },

    #[error("non-finite field value at index {0}")]
    NonFinite(usize),

    #[error("snapshot format: bad magic line")]
    BadMagic,

    #[error("snapshot format: malformed header: {0}")]
    BadHeader(String),

    #[error("snapshot format: size mismatch: {0}")]
    SizeMismatch(String),

    #[error("snapshot format: truncated payload ({found} of {expected} bytes)")]
    Truncated { expected: usize, found: usize },

    #[error("I/O: {0}")]
    Io(#[from] std::io::Error),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("undefined ratio: {0}")]
    UndefinedRatio(String),

    #[error("empty fit window: {0}")]
    EmptyWindow(String),

    #[error("guard window violated at t = {t}: mass fraction {fraction:.3e} outside |x| <= L/2")]
    GuardViolated { t: f64, fraction: f64 },

    #[error("solution blew up (non-finite values) at t = {t} after {steps} steps")]
    BlowUp {
        t: f64,
        steps: usize,
        last_good: Box<SampledField<f64>>,
    },

    #[error("Picard iteration is not contracting after {iterations} iterations (difference {difference:.3e}); use smaller data or a larger horizon")]
    Divergence { iterations: usize, difference: f64 },
}

impl Error {
    /// Stable machine-readable code, surfaced by the CLI.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidGrid(_) => "E_GRID",
            Error::GridMismatch(_) => "E_GRID_MISMATCH",
            Error::InvalidMultiplier { .. } => "E_MULTIPLIER",
            Error::NonFinite(_) => "E_NONFINITE",
            Error::BadMagic => "E_SNAPSHOT_MAGIC",
            Error::BadHeader(_) => "E_SNAPSHOT_HEADER",
            Error::SizeMismatch(_) => "E_SNAPSHOT_SIZE",
            Error::Truncated { .. } => "E_SNAPSHOT_TRUNCATED",
            Error::Io(_) => "E_IO",
            Error::Config(_) => "E_CONFIG",
            Error::Precondition(_) => "E_PRECONDITION",
            Error::UndefinedRatio(_) => "E_UNDEFINED_RATIO",
            Error::EmptyWindow(_) => "E_EMPTY_WINDOW",
            Error::GuardViolated { .. } => "E_GUARD",
            Error::BlowUp { .. } => "E_BLOWUP",
            Error::Divergence { .. } => "E_DIVERGENCE",
        }
    }
}

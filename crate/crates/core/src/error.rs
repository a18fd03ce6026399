use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("distribution has an infinite mean (Pareto index {alpha} <= 1)")]
    InfiniteMean { alpha: f64 },

    #[error("ensemble must contain at least one urn and at least one ball")]
    EmptyEnsemble,

    #[error("rank {rank} has zero likelihood under every candidate")]
    ImpossibleObservation { rank: u64 },

    #[error("no Monte Carlo trial produced rank {rank} ({trials} trials)")]
    InsufficientSamples { rank: u64, trials: u64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("prior is improper: {0}")]
    ImproperPrior(String),

    #[error("quadrature did not converge on [{lower}, {upper}]: estimate {estimate}, error {error}")]
    QuadratureNotConverged {
        lower: f64,
        upper: f64,
        estimate: f64,
        error: f64,
    },

    #[error("root finder failed: {0}")]
    NoRoot(String),

    #[error("empty table")]
    EmptyTable,

    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl Error {
    /// Stable snake_case name of the variant, for machine-readable output.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidParameter(_) => "invalid_parameter",
            Error::InfiniteMean { .. } => "infinite_mean",
            Error::EmptyEnsemble => "empty_ensemble",
            Error::ImpossibleObservation { .. } => "impossible_observation",
            Error::InsufficientSamples { .. } => "insufficient_samples",
            Error::Precondition(_) => "precondition",
            Error::ImproperPrior(_) => "improper_prior",
            Error::QuadratureNotConverged { .. } => "quadrature_not_converged",
            Error::NoRoot(_) => "no_root",
            Error::EmptyTable => "empty_table",
            Error::Parse { .. } => "parse",
            Error::Io(_) => "io",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

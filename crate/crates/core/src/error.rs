use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("degenerate band: [{lo}, {hi}] has zero width")]
    DegenerateBand { lo: f64, hi: f64 },

    #[error("expected-cost series diverges: {0}")]
    Divergence(String),

    #[error("baseline flavor mismatch: {0}")]
    FlavorMismatch(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("staircase mixture decomposition failed: relative residual {residual:e}")]
    DecompositionFailure { residual: f64 },

    #[error("not a distribution function: {0}")]
    NotMonotone(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Stable machine-readable tag, used by the CLI error JSON.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::InvalidParameter(_) => "invalid_parameter",
            Error::DegenerateBand { .. } => "degenerate_band",
            Error::Divergence(_) => "divergence",
            Error::FlavorMismatch(_) => "flavor_mismatch",
            Error::Precondition(_) => "precondition",
            Error::DecompositionFailure { .. } => "decomposition_failure",
            Error::NotMonotone(_) => "not_monotone",
            Error::Io(_) => "io",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("theta must be nonzero")]
    ThetaZero,
    #[error("exact backend requires Gaussian-rational theta")]
    ExactNeedsGaussian,
    #[error("parse error at column {column}: {message}")]
    Parse { column: usize, message: String },
    #[error("unknown symbol '{0}'")]
    UnknownSymbol(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("presentation regime mismatch: {left:?} vs {right:?}")]
    RegimeMismatch {
        left: crate::fp_algebra::Regime,
        right: crate::fp_algebra::Regime,
    },
    #[error("character value chi(g) must be nonzero")]
    ZeroCharacter,
    #[error("chi(z) must be +1 or -1")]
    InvalidCharacterZ,
    #[error("invalid Gram matrix: {0}")]
    InvalidGram(String),
    #[error("invalid frame: {0}")]
    InvalidFrame(String),
    #[error("channel is not trace preserving (residual {residual:e})")]
    NotTracePreserving { residual: f64 },
    #[error("invalid channel: {0}")]
    InvalidChannel(String),
    #[error("degenerate random element after {attempts} attempts")]
    DegenerateRandomElement { attempts: usize },
    #[error("minimal polynomial does not split over the Gaussian rationals")]
    NoExactSplitting,
}

pub type Result<T> = std::result::Result<T, Error>;

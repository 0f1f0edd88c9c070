use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("normalization {0:e} is not positive")]
    NonPositiveNorm(f64),

    #[error("imaginary residual {residual:e} of the Wigner sum exceeds tolerance")]
    NonHermitianAccumulation { residual: f64 },

    #[error("|G| = {boundary:e} at the quadrature cutoff; increase L")]
    CutoffTooSmall { boundary: f64 },

    #[error("negative mixture weight {0}")]
    NegativeWeight(f64),

    #[error("truncation dimension {dim} too small, need at least {required}")]
    TruncationTooSmall { dim: usize, required: usize },

    #[error("argument {0} outside |x| <= 700")]
    OverflowRange(f64),

    #[error("radius {r} outside the validity window R < {limit}")]
    OutsideValidityWindow { r: f64, limit: f64 },

    #[error("coherence {delta} does not exceed the critical value {critical}")]
    NotNegative { delta: f64, critical: f64 },

    #[error("minimum {value:e} found on the search box boundary at ({x}, {p})")]
    BoxTooSmall { x: f64, p: f64, value: f64 },

    #[error("minimum of W has the same sign at delta = 0 and delta = 1")]
    NoSignChange,

    #[error("family is not monotone in negativity: min W({lo}) < 0 but min W({hi}) >= 0")]
    NonMonotoneFamily { lo: f64, hi: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

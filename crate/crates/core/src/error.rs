use thiserror::Error;

/// Errors raised by the library. Numerical outcomes that are legitimate
/// answers (an `Unknown` verdict, an empty orbit search) are values, not
/// errors.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("the zero polynomial has no well-defined roots")]
    ZeroPolynomial,

    #[error("polynomial of degree 0 has no roots")]
    ConstantPolynomial,

    #[error("matrix is not square ({rows}x{cols})")]
    NonSquare { rows: usize, cols: usize },

    #[error("matrix is singular (|det| = {det:e})")]
    Singular { det: f64 },

    #[error("point is not fixed by the map (residual {residual:e} exceeds {tolerance:e})")]
    NotFixedPoint { residual: f64, tolerance: f64 },

    #[error("orbit residual {residual:e} exceeds {tolerance:e}")]
    OrbitResidual { residual: f64, tolerance: f64 },

    #[error("below-grade leakage {leakage:e} exceeds {tolerance:e}; the filtration is not preserved")]
    BlockLeakage { leakage: f64, tolerance: f64 },

    #[error("invalid space descriptor: {0}")]
    InvalidDescriptor(String),

    #[error("point lies outside the domain of the space: {0}")]
    OutsideDomain(String),

    #[error("descriptor is not a Hilbert space; use monomial ratio witnesses instead")]
    NotHilbert,

    #[error("operation requires a power-series descriptor")]
    NotPowerSeries,

    #[error("degree {degree}^{period} exceeds the solver guard {limit}")]
    DegreeOverflow { degree: usize, period: usize, limit: usize },

    #[error("period {0} outside the supported range")]
    InvalidPeriod(usize),

    #[error("affine map has no guaranteed periodic structure to search")]
    AffineInput,

    #[error("invalid automorphism word: {0}")]
    InvalidWord(String),

    #[error("unsupported map shape: {0}")]
    UnsupportedMap(String),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<V> = std::result::Result<V, Error>;

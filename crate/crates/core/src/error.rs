use thiserror::Error;

#[derive(Debug, Error)]
pub enum DppError {
    #[error("duplicate point {0:?} (points closer than the coincidence threshold)")]
    DuplicatePoint(Vec<f64>),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid window: {0}")]
    InvalidWindow(String),

    #[error("non-finite coordinate in point {0:?}")]
    NonFinite(Vec<f64>),

    #[error("kernel has no closed-form interaction kernel J")]
    NoClosedForm,

    #[error("kernel has no finite interaction range")]
    NoFiniteRange,

    #[error("parameter out of range: {0}")]
    ParameterOutOfRange(String),

    #[error("spectrum reaches 1: largest eigenvalue {0} >= 1 - 1e-8")]
    SpectrumAtOne(f64),

    #[error("operators are built on different quadratures")]
    QuadratureMismatch,

    #[error("operator is singular or not positive: smallest eigenvalue {0}")]
    SingularOperator(f64),

    #[error("matrix is not positive semidefinite: smallest eigenvalue {0}")]
    NotPsd(f64),

    #[error("conditioning block is singular (condition number {0:e})")]
    SingularBlock(f64),

    #[error("zero denominator in conditional kernel")]
    ZeroDenominator,

    #[error("numerical breakdown: {0}")]
    NumericalBreakdown(String),

    #[error("intensity bound violated: z(x) = {value} > z_max = {bound}")]
    BadBound { value: f64, bound: f64 },

    #[error("domain error: {0}")]
    DomainError(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, DppError>;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid factor dimensions: {0}")]
    InvalidDims(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("index {index} out of range (limit {limit})")]
    IndexOutOfRange { index: usize, limit: usize },

    #[error("operator is not Hermitian (max deviation {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("operator is not positive semi-definite (min eigenvalue {min_eigenvalue:e})")]
    NotPsd { min_eigenvalue: f64 },

    #[error("non-finite entry at position {0}")]
    NonFinite(usize),

    #[error("zero vector cannot be normalized")]
    ZeroNorm,

    #[error("invalid measurement: {0}")]
    InvalidMeasurement(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("probability {0} outside [0, 1]")]
    ProbabilityOutOfRange(f64),

    #[error("invalid cut: {0}")]
    InvalidCut(String),

    #[error("element is PPT across the cut (min partial-transpose eigenvalue {min_eigenvalue:e}); no witness from this recipe")]
    PptElement { min_eigenvalue: f64 },

    #[error("tomographic set is not complete: {0}")]
    SingularGram(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("witness has no beta coefficients")]
    MissingBeta,

    #[error("scenario too large for enumeration: {size} deterministic strategies")]
    ScenarioTooLarge { size: u128 },

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("not covered: {0}")]
    NotCovered(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

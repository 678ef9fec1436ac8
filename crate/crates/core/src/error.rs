use thiserror::Error;

/// Errors raised by engine operations.
///
/// Every variant maps to a stable machine-readable code (see [`Error::code`])
/// that is echoed in CLI and HTTP error documents.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("cell ({alternative}, {criterion}) is not crisp")]
    NonCrispCell {
        alternative: String,
        criterion: String,
    },
    #[error("cell ({alternative}, {criterion}) is not an intuitionistic fuzzy value")]
    NonIfsCell {
        alternative: String,
        criterion: String,
    },
    #[error("cell ({alternative}, {criterion}) is neither crisp nor a distribution")]
    NonStochasticCell {
        alternative: String,
        criterion: String,
    },
    #[error("makers disagree on the cell kind at ({alternative}, {criterion})")]
    MixedCellKinds {
        alternative: String,
        criterion: String,
    },
    #[error("weights sum to zero")]
    AllZeroWeights,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid thresholds: {0}")]
    BadThresholds(String),
    #[error("scale factor must be positive, got {0}")]
    BadLambda(f64),
    #[error("outcome {value} lies outside [{lo}, {hi}]")]
    OutOfRange { value: f64, lo: f64, hi: f64 },
    #[error("range [{lo}, {hi}] is empty")]
    BadRange { lo: f64, hi: f64 },
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("invalid intuitionistic fuzzy value ({mu}, {nu})")]
    InvalidIfv { mu: f64, nu: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("unknown object {0}")]
    UnknownObject(String),
    #[error("unknown criterion {0}")]
    UnknownCriterion(String),
    #[error("unknown method {0}")]
    UnknownMethod(String),
    #[error("orders do not rank the same set of alternatives")]
    NotSameSet,
    #[error("weight {weight} for criterion {criterion} falls outside [0, 1]")]
    WeightOutOfRange { criterion: String, weight: f64 },
    #[error("problem failed validation")]
    ValidationFailed,
    #[error("method {method} is not applicable: {reason}")]
    MethodInapplicable { method: String, reason: String },
}

impl Error {
    pub fn code(&self) -> &'static str {
        match self {
            Error::NonCrispCell { .. } => "NON_CRISP_CELL",
            Error::NonIfsCell { .. } => "NON_IFS_CELL",
            Error::NonStochasticCell { .. } => "NON_STOCHASTIC_CELL",
            Error::MixedCellKinds { .. } => "MIXED_CELL_KINDS",
            Error::AllZeroWeights => "ALL_ZERO_WEIGHTS",
            Error::DimensionMismatch(_) => "DIMENSION_MISMATCH",
            Error::BadThresholds(_) => "BAD_THRESHOLDS",
            Error::BadLambda(_) => "BAD_LAMBDA",
            Error::OutOfRange { .. } => "OUT_OF_RANGE",
            Error::BadRange { .. } => "BAD_RANGE",
            Error::InvalidDistribution(_) => "INVALID_DISTRIBUTION",
            Error::InvalidIfv { .. } => "INVALID_IFV",
            Error::InvalidParameter(_) => "INVALID_PARAMETER",
            Error::UnknownObject(_) => "UNKNOWN_OBJECT",
            Error::UnknownCriterion(_) => "UNKNOWN_CRITERION",
            Error::UnknownMethod(_) => "UNKNOWN_METHOD",
            Error::NotSameSet => "NOT_SAME_SET",
            Error::WeightOutOfRange { .. } => "WEIGHT_OUT_OF_RANGE",
            Error::ValidationFailed => "VALIDATION_FAILED",
            Error::MethodInapplicable { .. } => "METHOD_INAPPLICABLE",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

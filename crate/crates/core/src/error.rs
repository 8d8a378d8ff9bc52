use thiserror::Error;

/// Errors raised by the plotting engine.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum AdpError {
    #[error("direction has no nonzero weight")]
    ZeroVector,
    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },
    #[error("rotation indices must differ (got {0} twice)")]
    EqualIndices(usize),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("scorer failure: {0}")]
    ScorerFailure(String),
    #[error("could not generate a model after {attempts} attempts")]
    GenerationFailure { attempts: usize },
    #[error("degenerate data: {0}")]
    DegenerateData(String),
    #[error("transform parameter {value} outside [0, 1]")]
    ParameterOutOfRange { value: f64 },
    #[error("target lies outside the plot box")]
    EmptyInterval,
    #[error("plot interval [{a}, {b}] is degenerate")]
    DegenerateInterval { a: f64, b: f64 },
    #[error("target lies outside the high-density region (distance {distance} > threshold {threshold})")]
    TargetOutsideDensity { distance: f64, threshold: f64 },
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("lipschitz fit did not converge (projected gradient norm {gradient_norm:e})")]
    NonConvergence { gradient_norm: f64 },
    #[error("unsupported combination: {0}")]
    UnsupportedCombination(String),
    #[error("every axis produced a degenerate plot interval")]
    AllAxesDegenerate,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("recovery check failed: {0}")]
    AssertionFailure(String),
}

impl AdpError {
    /// Stable machine-readable name of the error variant.
    pub fn kind(&self) -> &'static str {
        match self {
            AdpError::ZeroVector => "ZeroVector",
            AdpError::IndexOutOfRange { .. } => "IndexOutOfRange",
            AdpError::EqualIndices(_) => "EqualIndices",
            AdpError::DimensionMismatch { .. } => "DimensionMismatch",
            AdpError::ScorerFailure(_) => "ScorerFailure",
            AdpError::GenerationFailure { .. } => "GenerationFailure",
            AdpError::DegenerateData(_) => "DegenerateData",
            AdpError::ParameterOutOfRange { .. } => "ParameterOutOfRange",
            AdpError::EmptyInterval => "EmptyInterval",
            AdpError::DegenerateInterval { .. } => "DegenerateInterval",
            AdpError::TargetOutsideDensity { .. } => "TargetOutsideDensity",
            AdpError::LengthMismatch(..) => "LengthMismatch",
            AdpError::NonConvergence { .. } => "NonConvergence",
            AdpError::UnsupportedCombination(_) => "UnsupportedCombination",
            AdpError::AllAxesDegenerate => "AllAxesDegenerate",
            AdpError::InvalidArgument(_) => "InvalidArgument",
            AdpError::AssertionFailure(_) => "AssertionFailure",
        }
    }

    /// Interval errors are skipped by the optimizer instead of aborting it.
    pub fn is_interval_error(&self) -> bool {
        matches!(
            self,
            AdpError::EmptyInterval
                | AdpError::DegenerateInterval { .. }
                | AdpError::TargetOutsideDensity { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, AdpError>;

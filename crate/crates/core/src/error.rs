use thiserror::Error;

use crate::ids::FactorId;

pub type Result<T, E = SetError> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SetError {
    #[error("dimension mismatch in {op}: expected {expected}, found {found}")]
    DimensionMismatch {
        op: &'static str,
        expected: String,
        found: String,
    },

    #[error("invalid set: {0}")]
    Invalid(String),

    #[error("factor {0} has no assigned value")]
    MissingFactor(FactorId),

    #[error("factor {id} value {value} lies outside [-1, 1]")]
    FactorOutOfRange { id: FactorId, value: f64 },

    #[error("cannot reshape a vector of length {len} into {rows} rows; keep the vectorized form")]
    NotDivisible { len: usize, rows: usize },

    /// The data matrix `[X-; U-]` does not have full row rank.
    #[error("data matrix [X-; U-] has rank {rank}; it must have full row rank {required}")]
    RankDeficient { rank: usize, required: usize },

    #[error("constraints are infeasible (best residual {residual:e})")]
    Infeasible { residual: f64 },

    #[error("generator count {count} exceeds the configured ceiling {limit}")]
    GeneratorOverflow { count: usize, limit: usize },

    #[error("invalid configuration: {0}")]
    Config(String),
}

impl SetError {
    pub(crate) fn dims(op: &'static str, expected: impl ToString, found: impl ToString) -> Self {
        SetError::DimensionMismatch {
            op,
            expected: expected.to_string(),
            found: found.to_string(),
        }
    }

    /// Stable machine-readable tag used by the CLI's error JSON.
    pub fn kind(&self) -> &'static str {
        match self {
            SetError::DimensionMismatch { .. } => "dimension_mismatch",
            SetError::Invalid(_) => "invalid_set",
            SetError::MissingFactor(_) => "missing_factor",
            SetError::FactorOutOfRange { .. } => "factor_out_of_range",
            SetError::NotDivisible { .. } => "not_divisible",
            SetError::RankDeficient { .. } => "rank_deficient",
            SetError::Infeasible { .. } => "infeasible",
            SetError::GeneratorOverflow { .. } => "generator_overflow",
            SetError::Config(_) => "config",
        }
    }
}

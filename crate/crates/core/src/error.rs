use chrono::NaiveDate;

/// Errors raised by the forecasting core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("matrix is not positive definite (after jitter escalation)")]
    NotPositiveDefinite,
    #[error("design is rank deficient: normal equations are not positive definite")]
    RankDeficient,
    #[error("objective is not finite at the initial point")]
    NonFiniteObjective,
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
    #[error("term grid must be non-empty and strictly increasing")]
    InvalidGrid,
    #[error("curve dated {date} does not match the series grid")]
    GridMismatch { date: NaiveDate },
    #[error("yield {value} for {date} outside sanity bounds")]
    YieldOutOfBounds { date: NaiveDate, value: f64 },
    #[error("dates must be strictly increasing ({prev} then {next})")]
    UnorderedDates { prev: NaiveDate, next: NaiveDate },
    #[error("range {start}..{start}+{len} outside series of {available}")]
    OutOfRange { start: usize, len: usize, available: usize },
    #[error("insufficient data: need more than {needed} observations, have {available}")]
    InsufficientData { needed: usize, available: usize },
    #[error("no forecast records")]
    EmptyRecords,
    #[error("reports cover different evaluation ranges")]
    MismatchedRanges,
    #[error("posterior variance {0:e} is negative beyond clamping tolerance")]
    NegativeVariance(f64),
}

pub type Result<T, E = Error> = core::result::Result<T, E>;

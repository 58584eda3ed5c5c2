use thiserror::Error;

/// Errors raised by the solvers, oracles and the types they share.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("entry {index} is {value}, below the strict-positivity floor")]
    NonPositiveSupport { index: usize, value: f64 },

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("row {row} sums to {sum}")]
    RowNotStochastic { row: usize, sum: f64 },

    #[error("entry ({row}, {col}) is {value}, outside [0, 1]")]
    EntryOutOfRange { row: usize, col: usize, value: f64 },

    #[error("invalid mechanism: {0}")]
    InvalidMechanism(String),

    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("hypotheses coincide (p1 = p2)")]
    DegenerateHypotheses,

    #[error("alphabet of size {0} is too small for this solver")]
    AlphabetTooSmall(usize),

    #[error("leakage budget {bits} bits outside [{min}, {max}]")]
    BudgetOutOfRange { bits: f64, min: f64, max: f64 },

    #[error("anchor w0 vanishes at coordinate {0} where (p1 - p2)W is nonzero")]
    DivisionByZeroSupport(usize),

    #[error("l = {bits} bits is below the high-utility regime l >= log2(M-1) = {threshold}; pass force_regime to override")]
    OutsideRegime { bits: f64, threshold: f64 },

    #[error("linear program is infeasible")]
    Infeasible,

    #[error("linear program is unbounded")]
    Unbounded,

    #[error("simplex iteration limit {0} exceeded")]
    IterationLimitExceeded(usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("internal consistency failure: {0}")]
    Consistency(String),
}

pub type Result<T> = std::result::Result<T, Error>;

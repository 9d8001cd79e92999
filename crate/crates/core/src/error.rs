use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix width {cols} exceeds the 63-column limit")]
    TooManyColumns { cols: usize },

    #[error("row {row} has a set bit at or beyond column {cols}")]
    RowOutOfRange { row: usize, cols: usize },

    #[error("invalid shape parameters: {0}")]
    InvalidShape(String),

    #[error("index {idx} is out of range for a {bits}-bit search space")]
    IndexOutOfRange { idx: u64, bits: u32 },

    #[error("search space too large: n(k+1) = {bits} bits exceeds the budget of {cap} bits{hint}")]
    SearchSpaceTooLarge { bits: u32, cap: u32, hint: &'static str },

    #[error("worker count must be at least 1")]
    NoWorkers,

    #[error("distribution mismatch: {0}")]
    Mismatch(String),

    #[error("operation requires an exact distribution, got a sampled one")]
    SampledDistribution,

    #[error("{family} rank {i} at k = {k} is below the validity range (k >= {k_min})")]
    BelowValidityRange { family: String, i: usize, k: u32, k_min: u32 },

    #[error("{family} has no closed form for rank {i}")]
    NoClosedForm { family: String, i: usize },

    #[error("non-integral value {value} for {context}")]
    NonIntegral { context: String, value: String },

    #[error("degree bound violated: {0}")]
    DegreeViolation(String),

    #[error("brute-force budget exceeded: {needed} bits > {cap}")]
    BudgetExceeded { needed: u32, cap: u32 },

    #[error("inconsistent system: equations {equations:?} reduce to 0 = nonzero")]
    Inconsistent { equations: Vec<usize> },

    #[error("underdetermined system: rank {rank} < {unknowns} unknowns")]
    Underdetermined { rank: usize, unknowns: usize },

    #[error("cache entry {path} is corrupt: {reason}")]
    CorruptCache { path: String, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

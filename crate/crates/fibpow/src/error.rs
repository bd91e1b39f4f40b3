use thiserror::Error;

/// Errors shared across the whole pipeline.
///
/// The two precision-related variants have distinct roles: `NotSeparated`
/// means "this comparison/floor/division could not be decided at the current
/// working precision" and is caught internally to trigger escalation, while
/// `PrecisionExhausted` means escalation ran all the way to the policy
/// maximum without a decision and is surfaced to the caller.
#[derive(Debug, Error)]
pub enum Error {
    #[error("precision exhausted at {bits} bits: {context}")]
    PrecisionExhausted { bits: u32, context: String },

    #[error("not separated at current precision: {context}")]
    NotSeparated { context: String },

    #[error("index {n} below definition range of the order-{k} sequence (first index is {first})")]
    IndexBelowDefinition { k: u64, n: i64, first: i64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid linear-form instance: {0}")]
    InvalidInstance(String),

    #[error("bound chain broken at stage {stage}: {detail}")]
    ChainBroken { stage: String, detail: String },

    #[error("no convergent index in [{start}, {end}] certifies a positive epsilon for cell (m={m}, k={k})")]
    NoPositiveEpsilon { m: u64, k: u64, start: usize, end: usize },

    #[error("search window too large: estimated {estimated} elementary steps exceed budget {budget}")]
    WindowTooLarge { estimated: u128, budget: u128 },

    #[error("magnitude overflow: {0}")]
    MagnitudeOverflow(String),

    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// True for errors that a higher-precision retry could resolve.
    pub fn is_retryable(&self) -> bool {
        matches!(self, Error::NotSeparated { .. })
    }
}

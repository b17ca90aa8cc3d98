use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("self co-occurrence for word id {0}")]
    SelfPair(u32),
    #[error("co-occurrence weight must be positive, got {0}")]
    NonPositiveWeight(f64),
    #[error("id {id} out of range for size {size}")]
    IdOutOfRange { id: u32, size: usize },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("co-occurrence count must be positive, got {0}")]
    NonPositiveCount(f64),
    #[error("record {index}: {reason}")]
    Record { index: u64, reason: String },
    #[error("dump mode mismatch: expected {expected}, found {found}")]
    ModeMismatch {
        expected: &'static str,
        found: &'static str,
    },
    #[error("lexicon: {0}")]
    Lexicon(String),
    #[error("word '{0}' is missing from the subword lexicon")]
    MissingFromLexicon(String),
    #[error("non-finite parameter after update of record {record}")]
    NonFinite { record: u64 },
    #[error("similarity undefined for a zero vector")]
    ZeroVector,
    #[error("correlation undefined for a constant sequence")]
    ZeroVariance,
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("need at least 2 values, got {0}")]
    TooShort(usize),
    #[error("only {covered} of {total} pairs covered by the vocabulary")]
    InsufficientCoverage { covered: usize, total: usize },
}

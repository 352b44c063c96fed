use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid discrete law: {0}")]
    InvalidLaw(String),

    #[error("invalid value map: {0}")]
    InvalidValueMap(String),

    #[error("invalid index set: {0}")]
    InvalidIndexSet(String),

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("enumeration budget exceeded: {what} = {states} states > budget {budget}")]
    BudgetExceeded {
        what: String,
        states: String,
        budget: u64,
    },

    #[error("empty family: {0}")]
    EmptyFamily(String),

    #[error("threshold profile precondition violated: {0}")]
    PreconditionViolation(String),

    #[error("malformed cover entry: {0}")]
    MalformedEntry(String),

    #[error("survival function increased between {at} and {to}")]
    SurvivalNotMonotone { at: String, to: String },

    #[error("no truncation level up to n_max={n_max} brings the tail mass below 1/4")]
    NoTruncationLevel { n_max: u32 },

    #[error("configuration error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("bandit needs at least one arm")]
    EmptyBandit,

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    Dimension { expected: usize, actual: usize },

    #[error("no selectable input; seed the corpus first")]
    EmptyCorpus,

    #[error("hit count must be at least 1")]
    ZeroHitCount,

    #[error("invalid target: {0}")]
    InvalidTarget(String),

    #[error("{what} needs at least {needed} samples, got {got}")]
    TooFewSamples {
        what: &'static str,
        needed: usize,
        got: usize,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unknown scheduler `{0}`")]
    UnknownScheduler(String),

    #[error("snapshot version mismatch: expected {expected}, found {found}")]
    SnapshotVersion { expected: String, found: String },

    #[error("corrupt snapshot: {0}")]
    CorruptSnapshot(String),

    #[error("malformed posterior record: {0}")]
    MalformedPosterior(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

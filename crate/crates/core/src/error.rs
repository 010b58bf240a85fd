use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("unreadable stream: {0}")]
    Stream(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("unknown entry id `{0}`")]
    UnknownEntry(String),

    #[error("entry `{0}` is not a thread root")]
    NotARoot(String),

    #[error("invalid time partition: {0}")]
    Partition(String),

    #[error("invalid probability {0}: must lie in [0, 1]")]
    Probability(f64),

    #[error("not enough eligible users for weak labeling: {found} < {required}")]
    TooFewEligible { found: usize, required: usize },

    #[error("class {0} has no training documents")]
    EmptyClass(String),

    #[error("user `{user}` is not active in period {period}")]
    InactiveUser { user: String, period: usize },

    #[error("no stance for user `{user}` in period {period}; labeling must run first")]
    MissingStance { user: String, period: usize },

    #[error("feature vectors do not describe the same user-period: {0}")]
    Mismatch(String),

    #[error("training set must contain at least two classes")]
    SingleClass,

    #[error("non-finite feature value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("fold hygiene violated: {0}")]
    Leakage(String),

    #[error("missing stage artifact {0}; run the `{1}` stage first")]
    MissingArtifact(PathBuf, &'static str),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

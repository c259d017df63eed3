use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("schema error: {0}")]
    Schema(String),

    #[error("missing required column `{column}` (accepted headers: {accepted})")]
    MissingColumn { column: String, accepted: String },

    #[error("duplicate row for ({country}, {year})")]
    DuplicateKey { country: String, year: i32 },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("variable `{0}` has no observed value anywhere; cannot impute")]
    ImputationImpossible(String),

    #[error("split error: {0}")]
    Split(String),

    #[error("invalid value for `{variable}`: {value}")]
    InvalidValue { variable: String, value: f64 },

    #[error("predictor `{0}` is constant over the training rows")]
    DegenerateFeature(String),

    #[error("parameter error: {0}")]
    Parameter(String),

    #[error("singular normal equations (rank-deficient design); use a ridge penalty > 0")]
    SingularSystem,

    #[error("R² undefined: actual values have zero variance")]
    R2Undefined,

    #[error("graph error: {0}")]
    Graph(String),

    #[error("assignment is missing variable `{0}`")]
    IncompleteAssignment(String),

    #[error("evidence has probability zero under the network")]
    ZeroEvidence,

    #[error("enumeration over {0} variables exceeds the supported maximum of {1}")]
    Capacity(usize, usize),

    #[error("format error: {0}")]
    Format(String),

    #[error("usage error: {0}")]
    Usage(String),

    #[error("config error: {0}")]
    Config(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit status: 1 usage/config, 2 data/schema, 3 numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io { .. }
            | Error::Parameter(_)
            | Error::Usage(_)
            | Error::Config(_) => 1,
            Error::Csv(_)
            | Error::Schema(_)
            | Error::MissingColumn { .. }
            | Error::DuplicateKey { .. }
            | Error::Parse { .. }
            | Error::ImputationImpossible(_)
            | Error::Split(_)
            | Error::InvalidValue { .. }
            | Error::DegenerateFeature(_)
            | Error::Graph(_)
            | Error::IncompleteAssignment(_)
            | Error::Format(_) => 2,
            Error::SingularSystem
            | Error::R2Undefined
            | Error::ZeroEvidence
            | Error::Capacity(..) => 3,
        }
    }
}

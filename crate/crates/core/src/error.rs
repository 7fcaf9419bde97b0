use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("configuration error: {0}")]
    Configuration(String),

    #[error("generation exhausted: {0}")]
    GenerationExhausted(String),

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("infeasible instance: {0}")]
    InfeasibleInstance(String),

    #[error("invalid solution: {0}")]
    InvalidSolution(String),

    #[error("improvement operator failed at epoch {epoch}: {source}")]
    OperatorFailure {
        epoch: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("operator error: {0}")]
    Operator(String),

    #[error("contract violation: {0}")]
    ContractViolation(String),

    #[error("degenerate sample: {0}")]
    DegenerateSample(String),

    #[error("protocol error: {0}")]
    Protocol(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

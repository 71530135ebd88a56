use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("value {value} outside fixed-point range (|x| < {bound})")]
    Range { value: f64, bound: f64 },

    #[error("replicated shares disagree for party {party} at index {index}")]
    Integrity { party: usize, index: usize },

    #[error("dealer pool exhausted: {kind} (need {needed}, have {available})")]
    RandomnessExhausted {
        kind: &'static str,
        needed: usize,
        available: usize,
    },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("undefined result: {0}")]
    Undefined(String),

    #[error("undefined metric: {0}")]
    UndefinedMetric(String),

    #[error("cross-device violation: client {client} holds samples from both groups")]
    CrossDevice { client: u64 },

    #[error("training diverged at round {round}: non-finite loss")]
    Divergence { round: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("io: {0}")]
    Io(String),

    #[error("csv: {0}")]
    Csv(String),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Csv(e.to_string())
    }
}

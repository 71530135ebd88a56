use std::fmt;

use thiserror::Error;

/// Pipeline stage an error came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Phase {
    Data,
    Reweigh,
    Train,
    Roc,
    Evaluate,
    Bench,
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Phase::Data => "data",
            Phase::Reweigh => "reweigh",
            Phase::Train => "train",
            Phase::Roc => "roc",
            Phase::Evaluate => "evaluate",
            Phase::Bench => "bench",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config: {0}")]
    Config(String),

    #[error("{phase}: {source}")]
    Phase {
        phase: Phase,
        #[source]
        source: fairmpc::Error,
    },

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("privacy audit failed: {0}")]
    Privacy(String),
}

impl HarnessError {
    pub fn config(msg: impl Into<String>) -> Self {
        HarnessError::Config(msg.into())
    }

    /// Process exit code for this error's category.
    pub fn exit_code(&self) -> i32 {
        use fairmpc::Error as E;
        match self {
            HarnessError::Config(_) => 2,
            HarnessError::Io(_) => 3,
            HarnessError::Phase { source, .. } => match source {
                E::Io(_) | E::Csv(_) | E::CrossDevice { .. } | E::Dimension { .. } => 3,
                E::UndefinedMetric(_) => 5,
                _ => 4,
            },
            HarnessError::Privacy(_) => 6,
        }
    }
}

pub type HarnessResult<T> = Result<T, HarnessError>;

/// Attaches a phase label to core errors.
pub trait InPhase<T> {
    fn in_phase(self, phase: Phase) -> HarnessResult<T>;
}

impl<T> InPhase<T> for fairmpc::Result<T> {
    fn in_phase(self, phase: Phase) -> HarnessResult<T> {
        self.map_err(|source| HarnessError::Phase { phase, source })
    }
}

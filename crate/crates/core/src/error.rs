use std::path::PathBuf;

use crate::domain::StateId;

/// Errors raised anywhere in the pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unsupported parameter: {0}")]
    UnsupportedParameter(String),

    #[error("ambiguous joint actions at state {state}: ({a1}, {b1}) and ({a2}, {b2}) both lead to state {successor}")]
    AmbiguousActions {
        state: StateId,
        a1: String,
        b1: String,
        a2: String,
        b2: String,
        successor: StateId,
    },

    #[error("nondeterministic joint action ({a}, {b}) at state {state}")]
    Nondeterministic { state: StateId, a: String, b: String },

    #[error("no plan from {from} to {to}")]
    NoPlan { from: StateId, to: StateId },

    #[error("more than {cap} optimal plans from {from} to {to}")]
    PlanSetTooLarge { cap: usize, from: StateId, to: StateId },

    #[error("separation violated: states {0} and {1} conflict but share a block")]
    SeparationViolation(StateId, StateId),

    #[error("parse error in {context}: {message}")]
    Parse { context: String, message: String },

    #[error("i/o error on {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn parse(context: impl Into<String>, message: impl ToString) -> Self {
        Error::Parse {
            context: context.into(),
            message: message.to_string(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

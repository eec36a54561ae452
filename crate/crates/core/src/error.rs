//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    /// Two fields were combined that do not share a grid layout.
    #[error("fields live on different grids")]
    GridMismatch,

    /// The stage fixed-point iteration stalled above its tolerance.
    #[error("fixed-point iteration did not converge: residual {residual:.3e} after {iterations} iterations")]
    StepDiverged { iterations: usize, residual: f64 },

    /// Non-finite values appeared in the iterates.
    #[error("numerical blowup: non-finite values in solver iterates")]
    NumericalBlowup,

    /// A step-level failure tagged with the step index it occurred at.
    #[error("step {step} failed")]
    AtStep {
        step: u64,
        #[source]
        source: Box<Error>,
    },

    #[error("config error: {0}")]
    Config(String),

    #[error("snapshot format error: {0}")]
    Format(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn at_step(self, step: u64) -> Error {
        Error::AtStep {
            step,
            source: Box::new(self),
        }
    }

    /// Innermost error in an `AtStep` chain.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtStep { source, .. } => source.root(),
            other => other,
        }
    }
}

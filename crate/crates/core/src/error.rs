use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{name} = {value} is outside {range}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("degenerate step law: {0}")]
    DegenerateLaw(String),

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("walk left the labelled horizon of radius {horizon} at step {step}")]
    HorizonExceeded { step: u64, horizon: u32 },

    #[error("vertex {target} is unreachable from {from}")]
    Unreachable { from: u32, target: u32 },

    #[error("graph is disconnected")]
    Disconnected,

    #[error("solver did not converge after {iterations} iterations (relative residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("malformed file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}

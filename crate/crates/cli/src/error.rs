use std::io;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Every problem found in one pass over the input.
    #[error("{}", .0.join("\n"))]
    Validation(Vec<String>),

    #[error(transparent)]
    Core(#[from] mcrt_core::Error),

    #[error("{0}")]
    Runtime(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl CliError {
    /// 1 for bad input, 2 for failures while running.
    pub fn exit_code(&self) -> i32 {
        use mcrt_core::Error as E;
        match self {
            CliError::Validation(_) => 1,
            CliError::Core(E::InvalidArgument(_) | E::OutOfRange { .. } | E::DegenerateLaw(_)) => 1,
            _ => 2,
        }
    }
}

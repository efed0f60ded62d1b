use std::io;

use creature_core::Error;

/// Failures that stop a command, each mapped to an exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("bad input: {0}")]
    BadInput(String),
    #[error("budget exceeded: {0}")]
    Budget(String),
    #[error("step {step}: {source}")]
    Step { step: usize, source: Box<CliError> },
}

impl CliError {
    /// 2 for bad input, 3 for exhausted budgets.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::BadInput(_) => 2,
            CliError::Budget(_) => 3,
            CliError::Step { source, .. } => source.exit_code(),
        }
    }

    pub fn at_step(self, step: usize) -> CliError {
        CliError::Step { step, source: Box::new(self) }
    }
}

impl From<Error> for CliError {
    fn from(err: Error) -> Self {
        match err {
            Error::BudgetExceeded(_) | Error::DepthExceeded(_) | Error::SparePoolExhausted => {
                CliError::Budget(err.to_string())
            }
            other => CliError::BadInput(other.to_string()),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(err: io::Error) -> Self {
        CliError::BadInput(err.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(err: serde_json::Error) -> Self {
        CliError::BadInput(err.to_string())
    }
}

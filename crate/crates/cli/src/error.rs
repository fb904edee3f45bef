use thiserror::Error;

/// CLI failures, each mapped to a process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("config error in {path}: {source}")]
    Parse {
        path: String,
        #[source]
        source: serde_json::Error,
    },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("{0}")]
    Numeric(udw_core::Error),

    #[error("{failed} of {total} acceptance criteria failed")]
    ValidationFailed { failed: usize, total: usize },

    #[error("{failed} of {total} grid points failed")]
    PointsFailed { failed: usize, total: usize },
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    /// 0 success, 1 validation failure, 2 config error, 3 numeric failure.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::ValidationFailed { .. } => 1,
            CliError::Config(_) | CliError::Parse { .. } => 2,
            CliError::Numeric(e) => match e {
                udw_core::Error::Convergence { .. } | udw_core::Error::IllConditioned(_) => 3,
                _ => 2,
            },
            CliError::PointsFailed { .. } => 3,
            CliError::Io(_) | CliError::Csv(_) | CliError::Json(_) => 2,
        }
    }
}

impl From<udw_core::Error> for CliError {
    fn from(e: udw_core::Error) -> Self {
        CliError::Numeric(e)
    }
}

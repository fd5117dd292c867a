use std::path::PathBuf;

use trivopt_core::Error as CoreError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    /// 2 for anything caused by the configuration, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Core(e) => match e {
                CoreError::Domain { .. }
                | CoreError::InvalidArgument(_)
                | CoreError::InvalidPoint(_)
                | CoreError::InvalidTangent(_)
                | CoreError::Unsupported { .. } => 2,
                _ => 1,
            },
            CliError::Io { .. } => 1,
        }
    }
}

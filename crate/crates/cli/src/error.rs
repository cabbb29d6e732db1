use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("solver error: {0}")]
    Solver(#[from] nonlocal_heat::Error),

    #[error("malformed report: {0}")]
    Report(String),
}

impl CliError {
    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Self::Io { path: path.as_ref().display().to_string(), source }
    }

    /// Process exit code for an error that aborted a command.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) | Self::Report(_) => 2,
            Self::Solver(_) => 3,
            Self::Io { .. } => 1,
        }
    }
}

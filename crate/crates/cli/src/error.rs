/// Exit status 2 covers usage and configuration problems; 1 covers failed
/// checks and numerical failures inside an experiment.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] platelab_core::Error),
}

impl CliError {
    pub fn config(path: impl Into<String>, message: impl ToString) -> Self {
        CliError::Config { path: path.into(), message: message.to_string() }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config { .. } | CliError::Usage(_) => 2,
            CliError::Core(e) if matches!(e.id(), "usage" | "parse" | "io") => 2,
            CliError::Core(_) => 1,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

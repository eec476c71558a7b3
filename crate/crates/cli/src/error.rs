use std::path::PathBuf;

use rodshape::PipelineError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("cannot parse {}: {message}", .path.display())]
    Parse { path: PathBuf, message: String },
    #[error("forward solver failed: {0}")]
    Forward(rodshape::Error),
    #[error("inversion aborted: {0}")]
    Pipeline(PipelineError),
    #[error("i/o error on {}: {source}", .path.display())]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Parse { .. } => 2,
            CliError::Forward(_) => 3,
            CliError::Pipeline(_) => 4,
            CliError::Io { .. } => 1,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> CliError {
        let path = path.into();
        move |source| CliError::Io { path, source }
    }
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        CliError::Pipeline(e)
    }
}

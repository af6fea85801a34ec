use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("cannot read {path}: {source}", path = .0.display(), source = .1)]
    Input(PathBuf, #[source] std::io::Error),

    #[error("cannot write {path}: {source}", path = .0.display(), source = .1)]
    Output(PathBuf, #[source] std::io::Error),

    #[error("data error: {0}")]
    Data(#[from] hfmargin::Error),
}

impl CliError {
    /// 1 for usage and configuration problems, 2 for data problems.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 1,
            CliError::Input(..) | CliError::Output(..) | CliError::Data(_) => 2,
        }
    }
}

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] rggclt_core::Error),

    #[error("cannot write {path}: {source}")]
    Output {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    /// 2 for an infeasible run, 1 for everything else.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(rggclt_core::Error::Feasibility { .. }) => 2,
            _ => 1,
        }
    }
}

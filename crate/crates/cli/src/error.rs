use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("cannot evaluate: {0}")]
    Compute(#[from] cohframe::Error),
    #[error("cannot write output: {0}")]
    Output(String),
}

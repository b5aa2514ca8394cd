use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error at `{path}`: {message}")]
    Schema { path: String, message: String },
    #[error("invalid config: {0}")]
    Invalid(String),
    #[error(transparent)]
    Germ(#[from] germlens::GermError),
    #[error(transparent)]
    Puiseux(#[from] germlens_puiseux::PuiseuxError),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, CliError>;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Numeric(#[from] topophase::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_GUARD: u8 = 3;
pub const EXIT_THRESHOLD: u8 = 4;
pub const EXIT_IO: u8 = 1;

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Numeric(e) => match e {
                topophase::Error::InvalidArgument(_) | topophase::Error::DimensionMismatch { .. } => EXIT_CONFIG,
                _ => EXIT_GUARD,
            },
            CliError::Io(_) | CliError::Csv(_) | CliError::Json(_) => EXIT_IO,
        }
    }
}

use dce_core::DceError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] DceError),

    #[error("invalid sweep: {0}")]
    Spec(String),

    #[error("grid point {index} ({variable} = {value}) failed: {source}")]
    Point {
        index: usize,
        variable: String,
        value: String,
        #[source]
        source: DceError,
    },

    #[error("unknown figure '{0}' (expected fig1a, fig1b, fig2 or fig3)")]
    UnknownFigure(String),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, CliError>;

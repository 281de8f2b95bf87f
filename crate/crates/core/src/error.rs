use thiserror::Error;

/// Errors raised by the simulation and analysis routines.
#[derive(Debug, Error)]
pub enum DceError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(
        "scattering row at {omega:.6e} rad/s did not converge up to truncation {truncation} \
         (defect history: {defects:?})"
    )]
    NotConverged {
        omega: f64,
        truncation: usize,
        defects: Vec<f64>,
    },

    #[error("singular ladder system at row {0}")]
    Singular(usize),

    #[error("invalid covariance matrix: {0}")]
    InvalidCovariance(String),

    #[error("degenerate data: {0}")]
    DegenerateData(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, DceError>;

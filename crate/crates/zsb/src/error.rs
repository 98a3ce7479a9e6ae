use thiserror::Error;

pub type Result<T> = std::result::Result<T, ZsbError>;

#[derive(Debug, Error)]
pub enum ZsbError {
    #[error("invalid input: {0}")]
    Input(String),
    #[error("integration failed at lambda = {lambda}: {reason}")]
    Integration { lambda: String, reason: String },
    #[error("eigen-solver failure: {0}")]
    Eigen(String),
    #[error("localization failed for n = {n}: {reason}")]
    Localization { n: i64, reason: String },
    #[error("Newton iteration did not converge ({context}), residual {residual:e}")]
    Newton { context: String, residual: f64 },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("accuracy error: {0}")]
    Accuracy(String),
    #[error("path error: {0}")]
    Path(String),
    #[error("geometry error: {0}")]
    Geometry(String),
    #[error("solver stagnated for n = {n}; residual history {history:?}")]
    Stagnation { n: i64, history: Vec<f64> },
    #[error("ill-conditioned system: {0}")]
    Conditioning(String),
    #[error("evolution unstable at t = {t}: norm grew from {from:e} to {to:e}")]
    Instability { t: f64, from: f64, to: f64 },
    #[error("divergence: {0}")]
    Divergence(String),
    #[error("config error at line {line}: {msg}")]
    Config { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("infeasible parameters: could not place {what} after {attempts} attempts")]
    Infeasible { what: String, attempts: u32 },

    #[error("safety violation at t={t}: drones {i} and {j} overlap (signed clearance {signed})")]
    SafetyViolation { t: f64, i: u32, j: u32, signed: f64 },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}

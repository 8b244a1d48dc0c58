use thiserror::Error;

/// Errors raised anywhere in the shape-optimization pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    Geometry(String),

    #[error("inconsistent connectivity at facet {facet}: {reason}")]
    Connectivity { facet: usize, reason: String },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("singular system: {0}")]
    Singular(String),

    #[error("linear solve failed at {frequency_hz} Hz: {reason}")]
    Solver { frequency_hz: f64, reason: String },

    #[error("degenerate objective point: {0}")]
    DegenerateObjective(String),

    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    /// True for failures of the numerical solvers, as opposed to bad input.
    pub fn is_solver_failure(&self) -> bool {
        matches!(self, Error::Singular(_) | Error::Solver { .. } | Error::DegenerateObjective(_))
    }
}

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("map is not completely positive (min Choi eigenvalue {min_eig:.3e})")]
    NotCp { min_eig: f64 },

    #[error("map is not trace preserving (violation {violation:.3e})")]
    NotTp { violation: f64 },

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("parameter out of range: {0}")]
    Parameter(String),

    #[error("unknown subsystem label `{0}`")]
    UnknownLabel(String),

    #[error("dimension budget exceeded: {needed} > {budget}")]
    Budget { needed: usize, budget: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("SDP solver failed: {0}")]
    Solver(String),

    #[error("unsound bound report: {0}")]
    Report(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors caused by malformed or out-of-range input, as opposed
    /// to numerical failures.
    pub fn is_validation(&self) -> bool {
        !matches!(self, Error::Solver(_) | Error::Report(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;

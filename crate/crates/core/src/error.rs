use thiserror::Error;

/// Errors raised by model construction and the solvers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("invalid strategy: {0}")]
    InvalidStrategy(String),

    #[error("unknown element `{0}`")]
    UnknownElement(String),

    #[error("element index {index} out of range for ground set of size {size}")]
    ElementOutOfRange { index: usize, size: usize },

    #[error("{what}: size {actual} exceeds limit {limit}")]
    SizeLimit {
        what: &'static str,
        limit: usize,
        actual: usize,
    },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("point lies outside the polytope: violates {coeffs:?}·x <= {rhs} by {violation}")]
    OutsidePolytope { coeffs: Vec<f64>, rhs: f64, violation: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("solver failure: {0}")]
    SolverFailure(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// `true` for errors caused by the input model rather than by a solver
    /// breaking down.
    pub fn is_model_error(&self) -> bool {
        !matches!(self, Error::SolverFailure(_) | Error::Io(_))
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

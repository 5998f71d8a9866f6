use thiserror::Error;

/// Errors raised across the toolkit.
///
/// The variants line up with the exit-code classes of the command line
/// front end: input problems, infeasibility, unsupported requests and
/// solver breakdowns.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),
    #[error("invalid problem specification: {0}")]
    InvalidSpec(String),
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),
    #[error("pair ({0}, {0}) is vacuous")]
    VacuousPair(String),
    #[error("symbol not available on this Gram layout: {0}")]
    LayoutMismatch(String),
    #[error("incompatible specification: {0}")]
    Incompatible(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("unbounded: {0}")]
    Unbounded(String),
    #[error("solver failure: {0}")]
    Solver(String),
    #[error("malformed input: {0}")]
    Parse(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

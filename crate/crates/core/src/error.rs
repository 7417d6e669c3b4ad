use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("reaction term rejected: {0}")]
    Reaction(String),

    #[error("inconsistent reaction data: {0}")]
    Inconsistent(String),

    #[error("quadrature did not converge (estimate {estimate:e}, error {error:e})")]
    Quadrature { estimate: f64, error: f64 },

    #[error("no sign change on [{lo}, {hi}]")]
    Bracketing { lo: f64, hi: f64 },

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("trial function outside admissible class: {0}")]
    ClassViolation(String),

    #[error("speed classification is not monotone across the bracket:\n{table}")]
    NonMonotone { table: String },

    #[error("sandwich violated: {0}")]
    Sandwich(String),

    #[error("simulation blew up at cell {cell} (t = {time})")]
    BlowUp { cell: usize, time: f64 },

    #[error("front reached the far boundary at t = {time}; increase the domain length")]
    FrontAtBoundary { time: f64 },

    #[error("simulation inconclusive: {0}")]
    Inconclusive(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::InvalidParams(_) | Error::Domain(_) | Error::Precondition(_) | Error::Io(_) => 1,
            Error::Sandwich(_) => 2,
            _ => 3,
        }
    }
}

use thiserror::Error;

/// Errors raised by the simulation library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("matrix is not Hermitian (deviation {deviation:.3e}, allowed {allowed:.3e})")]
    NotHermitian { deviation: f64, allowed: f64 },

    #[error("linear system is singular or ill-conditioned (condition estimate {condition:.3e})")]
    Singular { condition: f64 },

    #[error("steady state is not unique (bordered Liouvillian condition estimate {condition:.3e})")]
    NonUniqueSteadyState { condition: f64 },

    #[error("state invariant violated at t = {t}: {what} = {value:.3e} (dt = {dt:.3e}; try a smaller step)")]
    InvariantViolation {
        t: f64,
        what: &'static str,
        value: f64,
        dt: f64,
    },

    #[error("dynamical map at t = {t} is near-singular (condition number {condition:.3e})")]
    SingularMap { t: f64, condition: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code for the CLI: 2 for configuration problems, 3 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::InvalidParameter(_) | Error::Io(_) => 2,
            _ => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

use thiserror::Error;

/// Everything that can go wrong before or during a computation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    /// `T(u) <= 2S`: no dilation of `u` reaches the action level.
    #[error("infeasible dilation: T = {kinetic} does not exceed 2S = {}", 2.0 * .level)]
    InfeasibleDilation { kinetic: f64, level: f64 },

    #[error("degenerate input: {0}")]
    Degenerate(&'static str),

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("value outside the admissible range: {0}")]
    OutOfDomain(String),

    #[error("blow-up detected at t = {time}: non-finite or overflowing state")]
    BlowUp { time: f64 },

    #[error("solver did not converge: {0}")]
    NotConverged(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn config<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Config(msg.into()))
}

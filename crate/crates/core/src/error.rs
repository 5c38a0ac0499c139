use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unsupported exponent λ = {0} (only λ < 0 is implemented)")]
    UnsupportedExponent(f64),

    #[error("grid mismatch: ({0}, {1}) vs ({2}, {3})")]
    GridMismatch(f64, usize, f64, usize),

    #[error("iteration {iteration} diverged: {detail}")]
    Divergence { iteration: usize, detail: String },

    #[error("evaluation at a singular point: {0}")]
    SingularPoint(String),

    #[error("finite-difference step h = {h} too coarse for r = {r} (need r > 10h)")]
    StepTooCoarse { r: f64, h: f64 },

    #[error("infeasible parameters: {0}")]
    Infeasible(String),

    #[error("partial track: no singular point found at t = {0}")]
    PartialTrack(f64),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}

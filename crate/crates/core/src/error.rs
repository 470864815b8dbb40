use thiserror::Error;

/// Errors raised by the toolkit.
///
/// Validation problems (bad input) and numerical failures are kept apart so
/// that front ends can map them to different exit codes.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("no stationary state: {0}")]
    StationarityViolation(String),

    #[error("point ({y1}, {y2}) is not a fixed point (residual {residual:e})")]
    NotAFixedPoint { y1: f64, y2: f64, residual: f64 },

    #[error("fixed-point iteration did not converge from seed ({0}, {1})")]
    NonConvergence(f64, f64),

    #[error("no local minimum found at alpha = ({0}, {1})")]
    NoMinimum(f64, f64),

    #[error("numerical blowup at step {step}: |p| = {momentum:e} exceeds bound")]
    NumericalBlowup { step: u64, momentum: f64 },

    #[error("insufficient samples: have {have}, need {need}")]
    InsufficientSamples { have: usize, need: usize },

    #[error("energy per particle {epsilon} is below the potential floor {floor}")]
    Infeasible { epsilon: f64, floor: f64 },

    #[error("could not rescale momenta to reach the target energy: {0}")]
    RescaleFailure(String),

    #[error("quadrature did not converge after {0} nodes")]
    Quadrature(usize),
}

impl Error {
    /// True for errors caused by the caller's input rather than by numerics.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidArgument(_) | Error::StationarityViolation(_) | Error::Infeasible { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{quantity} is infinite for this law")]
    InfiniteMoment { quantity: &'static str },

    #[error("no stationary version: mean step is infinite")]
    NoStationaryVersion,

    #[error("quadrature did not converge on [{lo}, {hi}] (estimate error {err:e})")]
    Quadrature { lo: f64, hi: f64, err: f64 },

    #[error("invalid kernel row {state}: {reason}")]
    InvalidKernel { state: u64, reason: String },

    #[error("trial exceeded {0} rounds without absorption")]
    RoundCap(u64),

    #[error("n = {n} exceeds the direct simulator bound {max}")]
    TooManyBalls { n: u64, max: u64 },

    #[error("regime {0} is not covered by a limit theorem (open case)")]
    OpenRegime(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("not enough observations: {got} < {need}")]
    TooFewObservations { got: usize, need: usize },

    #[error("empty sample")]
    EmptySample,
}

pub type Result<T> = std::result::Result<T, Error>;

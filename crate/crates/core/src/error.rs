use thiserror::Error;

/// Errors produced by the channel-learning and planning routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("angle is not finite: {0}")]
    NonFiniteAngle(f64),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("unknown channel model `{0}`")]
    UnknownChannelModel(String),

    #[error("CRLB unbounded: {0}")]
    CrlbUnbounded(&'static str),

    #[error("degenerate feedback: weighted RSSI sums vanish (beta is effectively zero)")]
    DegenerateFeedback,

    #[error("degenerate feedback in pair slot {slot}")]
    DegenerateSlot { slot: usize },

    #[error("phase set is not equally spaced from zero (expected {expected:?})")]
    NotEquallySpaced { expected: Vec<f64> },

    #[error("grid step {0} rad is too coarse (must be in (0, pi/2])")]
    GridTooCoarse(f64),

    #[error("infeasible N = {n}: training time {training} >= block length {block}")]
    InfeasibleTraining { n: usize, training: f64, block: f64 },

    #[error("block too short to harvest: E_total(N=3) = {0}")]
    BlockTooShort(f64),

    #[error("no feasible training length in [3, {max}]")]
    EmptySearchRange { max: usize },

    #[error(transparent)]
    Trace(#[from] crate::replay::TraceError),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

//! Error type shared by every module of the crate.

use thiserror::Error;

/// Errors raised by table construction, transforms and I/O.
#[derive(Debug, Error)]
pub enum QwpError {
    #[error("spline order {0} outside the supported range 2..=20")]
    InvalidOrder(usize),

    #[error("period length {n} invalid: {reason}")]
    InvalidPeriod { n: usize, reason: &'static str },

    #[error("depth {depth} not admissible for period {n}: need 2^depth | N and N/2^depth >= 4")]
    DepthTooDeep { depth: usize, n: usize },

    #[error("length {got} does not match expected {expected}")]
    LengthMismatch { got: usize, expected: usize },

    #[error("length {0} must be even")]
    OddLength(usize),

    #[error("subband {band} out of range at level {level}")]
    InvalidSubband { level: usize, band: usize },

    #[error("selection is not a disjoint cover: {0}")]
    InvalidCover(String),

    #[error("threshold must be non-negative")]
    NegativeThreshold,

    #[error("image must be square, got {rows}x{cols}")]
    NonSquareImage { rows: usize, cols: usize },

    #[error("image {rows}x{cols} too small, need at least 8x8")]
    DegenerateImage { rows: usize, cols: usize },

    #[error("waveform has zero energy")]
    ZeroEnergyWaveform,

    #[error("vanishing moments are defined for band subbands only (l != 0)")]
    LowpassSubband,

    #[error("coefficient container malformed: {0}")]
    Container(String),

    #[error("image file malformed: {0}")]
    ImageFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, QwpError>;

use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("transform length {0} is not a positive power of two")]
    NotPowerOfTwo(usize),

    #[error("invalid kernel: {0}")]
    InvalidKernel(String),

    #[error("mesh size h = {0} must lie in (0, 1)")]
    InvalidMesh(f64),

    #[error("kernel class s = {0} is outside the continuum-limit range s > 1/2")]
    ClassOutOfRange(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("non-finite value at index {0}")]
    NonFinite(usize),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("spectrum not resolved on the fine grid: tail/peak ratio {ratio:e} exceeds {limit:e}")]
    Aliasing { ratio: f64, limit: f64 },

    #[error("datum not contained in the box: edge mass fraction {fraction:e} exceeds {limit:e}")]
    NotContained { fraction: f64, limit: f64 },

    #[error("blow-up detected at t = {time}: sup norm {sup_norm:e} (initial {initial:e})")]
    BlowUp { time: f64, sup_norm: f64, initial: f64 },

    #[error("series sum n^2 J_n diverges for the declared kernel class")]
    SeriesDiverges,
}

use thiserror::Error;

/// Errors produced by the simulator library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Channel statistics that violate a model precondition.
    #[error("invalid channel statistics: {0}")]
    InvalidStats(String),
    /// A parameter outside its admissible range.
    #[error("parameter out of range: {0}")]
    OutOfRange(String),
    /// Operand sizes that do not agree.
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    /// A request whose memory or search cost exceeds a configured cap.
    #[error("resource cap exceeded: {what} = {requested} > cap {cap}")]
    ResourceCap {
        what: &'static str,
        requested: u64,
        cap: u64,
    },
    /// An operation that is not defined for the given channel model.
    #[error("unsupported: {0}")]
    Unsupported(String),
    /// Direction quantization of the all-zero vector.
    #[error("cannot quantize the direction of a zero vector")]
    ZeroVector,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

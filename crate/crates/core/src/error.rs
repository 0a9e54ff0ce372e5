use thiserror::Error;

pub type Result<T, E = BelError> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BelError {
    #[error("invalid level count {levels}: need at least {min}")]
    InvalidLevels { levels: usize, min: usize },

    #[error("value {value} outside range [{lo}, {hi}]")]
    OutOfRange { value: f64, lo: f64, hi: f64 },

    #[error("invalid quantization range [{a}, {b}] with {levels} levels")]
    InvalidQuantization { a: f64, b: f64, levels: usize },

    #[error("shape mismatch: expected length {expected}, got {found}")]
    ShapeMismatch { expected: usize, found: usize },

    #[error("level {level} outside 1..={levels}")]
    InvalidLevel { level: usize, levels: usize },

    #[error("target {target} outside [1, {levels}]")]
    InvalidTarget { target: f64, levels: usize },

    #[error("sigma must be positive, got {0}")]
    InvalidSigma(f64),

    #[error("scale r must be non-negative and finite, got {0}")]
    InvalidScale(f64),

    #[error("error probability {prob} > 1 for classifier {classifier} at y = {y}")]
    InvalidModel {
        classifier: usize,
        y: f64,
        prob: f64,
    },

    #[error("convention mismatch: {0}")]
    InvalidConvention(String),

    #[error("decoder {decoder} does not support {kind} codes")]
    UnsupportedDecoder { kind: String, decoder: String },

    #[error("unknown {what}: {name}")]
    Unknown { what: &'static str, name: String },

    #[error("invalid config: {0}")]
    InvalidConfig(String),
}

use thiserror::Error;

/// Errors raised by the harmony engine.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum HarmonyError {
    #[error("empty palette")]
    EmptyPalette,
    #[error("{field} = {value} is outside [{min}, {max}]")]
    OutOfRange {
        field: &'static str,
        value: f64,
        min: f64,
        max: f64,
    },
    #[error("{0} must be finite")]
    NonFinite(&'static str),
    #[error("invalid parameter {name}: {reason}")]
    InvalidParam { name: &'static str, reason: String },
    #[error("degenerate fit: all points coincide")]
    DegenerateFit,
    #[error("singular covariance")]
    SingularCovariance,
    #[error("mismatched input lengths: {0} points, {1} weights")]
    LengthMismatch(usize, usize),
    #[error("palette generation requires k >= 2, got {0}")]
    TooFewColors(usize),
}

pub type Result<T> = std::result::Result<T, HarmonyError>;

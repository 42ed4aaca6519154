use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("parse error at position {position}: {message}")]
    Parse { position: usize, message: String },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("grid of {points} points exceeds the cap of {cap} points")]
    GridTooLarge { points: u128, cap: u128 },

    #[error("expression swell: {terms} terms exceeds the cap of {cap}")]
    ExpressionSwell { terms: usize, cap: usize },

    #[error("not invertible in l1: {0}")]
    NotInvertible(String),

    #[error("invertibility could not be certified (verdict Unknown); increase the grid size")]
    NotCertified,

    #[error("tolerance {tol:e} unreachable within radius cap {radius_cap}; best residual {best:e}")]
    ToleranceUnreachable { tol: f64, radius_cap: usize, best: f64 },

    #[error("constant term not a unit")]
    ConstantNotUnit,

    #[error("invalid module: {0}")]
    InvalidModule(String),

    #[error("cap exceeded: {0}")]
    CapExceeded(String),

    #[error("blocks too close: neighbourhoods of blocks {first} and {second} overlap at gap radius {radius}")]
    BlocksTooClose { first: usize, second: usize, radius: i64 },

    #[error("periodic domain too small for the block neighbourhoods at gap radius {radius}")]
    DomainTooSmall { radius: i64 },

    #[error("support exceeds verification window")]
    SupportExceedsWindow,

    #[error("no interaction set: tail bound {tail:e} never drops below {eps}")]
    NoInteractionSet { tail: f64, eps: f64 },

    #[error("point is not in X_A: annihilation defect {defect:e}")]
    NotInGroup { defect: f64 },

    #[error("integer overflow in {0}")]
    Overflow(&'static str),
}

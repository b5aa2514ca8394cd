use thiserror::Error;

use crate::geom::Point;

#[derive(Debug, Error)]
pub enum GermError {
    #[error("expression error at byte {pos}: {msg}")]
    Expr { pos: usize, msg: String },
    #[error("empty germ `{0}`: no points found on any shell of the schedule")]
    EmptyGerm(String),
    #[error("invalid germ specification: {0}")]
    Spec(String),
    #[error("gauge evaluated at |t| = {t}, beyond its domain t_max = {t_max}")]
    GaugeDomain { t: f64, t_max: f64 },
    #[error("invalid gauge: {0}")]
    InvalidGauge(String),
    #[error("Lipschitz bound {bound} violated: quotient {quotient} between {x:?} and {y:?}")]
    ConstantViolation { x: Point, y: Point, quotient: f64, bound: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("too few points: need {need}, got {got}")]
    TooFewPoints { need: usize, got: usize },
    #[error("invalid parameter: {0}")]
    Param(String),
    #[error("unknown {what} `{name}`")]
    Unknown { what: &'static str, name: String },
}

pub type Result<T> = std::result::Result<T, GermError>;

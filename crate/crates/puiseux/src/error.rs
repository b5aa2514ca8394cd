use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PuiseuxError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("comparison undecidable at the current truncation order")]
    Indeterminate,
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("exponent overflow")]
    ExponentOverflow,
    #[error("invalid cell: {0}")]
    InvalidCell(String),
    #[error("cell is not a constant-width strip")]
    NotAStrip,
    #[error("empty input set")]
    EmptySet,
}

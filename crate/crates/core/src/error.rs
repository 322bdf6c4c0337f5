//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,

    #[error("invalid numeric context: {0}")]
    InvalidContext(String),

    #[error("syntax error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("theta function zero at z = {z} (z = -q^{k})")]
    ThetaZero { z: String, k: i64 },

    #[error("infinite product diverges: base modulus {modulus} >= 1")]
    DivergentProduct { modulus: f64 },

    #[error("evaluation failed: {0}")]
    Eval(String),

    #[error("ambiguous resonance: roots {a} and {b} match both q^{m1} and q^{m2} within tolerance")]
    ResonanceAmbiguous { a: String, b: String, m1: i64, m2: i64 },

    #[error("recurrence pivot vanished at index {index}: characteristic root at q^{index} beyond declared shifts (max_shift too small?)")]
    UnexpectedResonance { index: i64 },

    #[error("solver error: {0}")]
    Solve(String),

    #[error("too few coefficients for growth classification: need at least 8 nonzero, found {0}")]
    TooFewCoefficients(usize),

    #[error("characteristic data requested for a non-horizontal segment (slope {slope}); apply the theta-prefactor transform first")]
    NonHorizontalSegment { slope: String },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

//! Shared setup helpers for the benchmark targets.

use qfrob_core::{Complex, NumericContext};

pub const QUINTIC: &str =
    "(1-S)^5 - z*(1-q*S^5)*(1-q^2*S^5)*(1-q^3*S^5)*(1-q^4*S^5)*(1-q^5*S^5)";

pub fn double_ctx() -> NumericContext<f64> {
    NumericContext::double(Complex::from_f64(2.0, 0.0), 40).unwrap()
}

//! Local solution bases for linear q-difference equations at z = 0.
//!
//! Given an operator `P = sum_i a_i(z) S^i` (S the q-shift `f(z) -> f(qz)`,
//! |q| > 1), this crate
//!
//! - classifies z = 0 as regular or irregular singular via coefficient
//!   valuations and the Newton polygon,
//! - builds a local solution basis: power-series solutions seeded by
//!   characteristic roots in the regular-singular case, q-logarithm chains
//!   under resonance, and theta-prefactored Puiseux series for rational
//!   polygon slopes in the irregular case,
//! - verifies every produced solution by exact residual substitution and
//!   classifies series growth (convergent vs q-Gevrey),
//! - evaluates solutions and the special functions behind them (Jacobi
//!   theta, q-characters, the q-logarithm) numerically, in fast double
//!   precision or at a configurable number of decimal digits.
//!
//! The expression grammar for operators, the Newton-polygon JSON layout and
//! the solution JSON schema are documented in the workspace README; the
//! `qfrob` binary in `qfrob-cli` exposes all of it on the command line.

pub mod classify;
pub mod error;
pub mod fixtures;
pub mod frobenius;
pub mod jsonio;
pub mod numctx;
pub mod operator;
pub mod scalar;
pub mod series;
pub mod special;
pub mod verify;

pub use error::{Error, Result};
pub use numctx::{rat, NumericContext, Rational};
pub use scalar::{BigReal, Complex, Real};
pub use series::PuiseuxSeries;

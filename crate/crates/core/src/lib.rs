//! Desk-scale laboratory for the averaged ternary Waring–Goldbach problem.
//!
//! * [`arith`] sieves the von Mangoldt function `Λ`.
//! * [`counting`] enumerates `R(n; k) = Σ Λ(m1)Λ(m2)Λ(m3)` over
//!   `m1^{k1} + m2^{k2} + m3^{k3} = n` and its short-interval sums.
//! * [`circle`] evaluates the smoothed sums `S̃_k`, checks the exact
//!   circle-method identities and measures the lemma integrals.
//! * [`asymptotics`] holds main terms, error envelopes and `H` windows.
//!
//! Numeric code is generic over [`Real`] (`f32` or `f64`); the aliases
//! below fix the scalar to `f64`, which is what every tolerance in the test
//! suite assumes.

pub mod arith;
pub mod asymptotics;
pub mod circle;
pub mod counting;
pub mod error;
pub mod quadrature;
pub mod scalar;
pub mod summation;

pub use error::{LabError, Result};
pub use scalar::Real;

pub type MangoldtTable64 = arith::MangoldtTable<f64>;
pub type ExponentTriple64 = counting::ExponentTriple<f64>;
pub type IntervalReport64 = counting::IntervalReport<f64>;
pub type SmoothedSumSpec64 = circle::SmoothedSumSpec<f64>;
pub type QuadratureGrid64 = circle::QuadratureGrid<f64>;
pub type TripleSetup64 = circle::TripleSetup<f64>;
pub type DecompositionReport64 = circle::DecompositionReport<f64>;
pub type ErrorProfile64 = asymptotics::ErrorProfile<f64>;

pub type MangoldtTable32 = arith::MangoldtTable<f32>;
pub type ExponentTriple32 = counting::ExponentTriple<f32>;
pub type SmoothedSumSpec32 = circle::SmoothedSumSpec<f32>;

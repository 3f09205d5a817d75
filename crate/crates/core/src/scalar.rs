//! Scalar abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display};

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};
use rustfft::FftNum;

/// Real scalar type the laboratory is generic over (`f32` or `f64`).
///
/// Integer quantities (frequencies, `n`, `N`, `H`) always stay in `u64`; only
/// weights, phases and integrals are carried in `Real`.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + FftNum
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal, rounding to the nearest representable value.
    #[inline]
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn of_u64(n: u64) -> Self {
        Self::from_u64(n).expect("u64 representable as float")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// `e(x) = exp(2πix)`, with `x` reduced modulo 1 before the trig call.
#[inline]
pub fn unit_phase<T: Real>(turns: T) -> Complex<T> {
    let r = turns - turns.round();
    let (s, c) = (T::TAU() * r).sin_cos();
    Complex::new(c, s)
}

/// `e(p/q)` for integers, exact reduction of the numerator modulo `q`.
#[inline]
pub fn rational_phase<T: Real>(p: i128, q: u64) -> Complex<T> {
    let q = q as i128;
    let r = p.rem_euclid(q);
    // map to (-q/2, q/2] so the trig argument stays small
    let r = if 2 * r > q { r - q } else { r };
    let x = T::from_i128(r).unwrap() / T::from_i128(q).unwrap();
    let (s, c) = (T::TAU() * x).sin_cos();
    Complex::new(c, s)
}

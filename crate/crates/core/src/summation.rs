//! Accurate accumulation helpers.
//!
//! Interval sums can run over millions of terms, so plain left-to-right
//! addition is avoided in the reporting paths. Pairwise summation has error
//! growth `O(eps log n)`; the Neumaier accumulator is used where values arrive
//! one at a time.

use std::ops::AddAssign;

use num_complex::Complex;
use num_traits::Zero;

use crate::scalar::Real;

const PAIRWISE_BLOCK: usize = 64;

/// Pairwise (cascade) sum of a slice.
pub fn pairwise_sum<T>(xs: &[T]) -> T
where
    T: Copy + Zero + AddAssign,
{
    if xs.len() <= PAIRWISE_BLOCK {
        let mut acc = T::zero();
        for &x in xs {
            acc += x;
        }
        return acc;
    }
    let mid = xs.len() / 2;
    let mut left = pairwise_sum(&xs[..mid]);
    left += pairwise_sum(&xs[mid..]);
    left
}

/// Neumaier's improved Kahan accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum<T> {
    sum: T,
    carry: T,
}

impl<T: Real> CompensatedSum<T> {
    pub fn new() -> Self {
        Self {
            sum: T::zero(),
            carry: T::zero(),
        }
    }

    #[inline]
    pub fn add(&mut self, x: T) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> T {
        self.sum + self.carry
    }
}

impl<T: Real> FromIterator<T> for CompensatedSum<T> {
    fn from_iter<I: IntoIterator<Item = T>>(iter: I) -> Self {
        let mut acc = Self::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// Compensated complex accumulator (independent real and imaginary parts).
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedComplex<T> {
    re: CompensatedSum<T>,
    im: CompensatedSum<T>,
}

impl<T: Real> CompensatedComplex<T> {
    pub fn new() -> Self {
        Self {
            re: CompensatedSum::new(),
            im: CompensatedSum::new(),
        }
    }

    #[inline]
    pub fn add(&mut self, z: Complex<T>) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    pub fn value(&self) -> Complex<T> {
        Complex::new(self.re.value(), self.im.value())
    }
}

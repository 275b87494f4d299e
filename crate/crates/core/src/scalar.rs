//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_traits::{Float, FloatConst, NumCast};
use rustfft::FftNum;

/// Floating-point scalar the grids and fields are generic over (`f32` or `f64`).
pub trait Real:
    FftNum + Float + FloatConst + Default + Display + LowerExp + Sum + Debug + 'static
{
    /// Converts an `f64` literal into the scalar type.
    #[inline]
    fn of(x: f64) -> Self {
        <Self as NumCast>::from(x).expect("f64 literal representable in scalar type")
    }

    #[inline]
    fn of_usize(x: usize) -> Self {
        <Self as NumCast>::from(x).expect("integer representable in scalar type")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        <f64 as NumCast>::from(self).expect("scalar representable as f64")
    }

    /// `2^k` for an integer exponent.
    #[inline]
    fn pow2(k: i32) -> Self {
        Self::of(2.0).powi(k)
    }
}

impl Real for f32 {}
impl Real for f64 {}

pub type Complex<T> = num_complex::Complex<T>;

#[inline]
pub(crate) fn cplx<T: Real>(re: T, im: T) -> Complex<T> {
    Complex::new(re, im)
}

#[inline]
pub(crate) fn czero<T: Real>() -> Complex<T> {
    Complex::new(T::zero(), T::zero())
}

/// `e^{iθ}`.
#[inline]
pub(crate) fn cis<T: Real>(theta: T) -> Complex<T> {
    Complex::new(theta.cos(), theta.sin())
}

/// Largest integer `k` with `2^k <= v` (`v > 0`), robust against `log2` rounding.
pub(crate) fn floor_log2<T: Real>(v: T) -> i32 {
    let mut k = v.log2().floor().as_f64() as i32;
    while T::pow2(k) > v {
        k -= 1;
    }
    while T::pow2(k + 1) <= v {
        k += 1;
    }
    k
}

/// Smallest integer `k` with `2^k >= v` (`v > 0`).
pub(crate) fn ceil_log2<T: Real>(v: T) -> i32 {
    let mut k = v.log2().ceil().as_f64() as i32;
    while T::pow2(k) < v {
        k += 1;
    }
    while T::pow2(k - 1) >= v {
        k -= 1;
    }
    k
}

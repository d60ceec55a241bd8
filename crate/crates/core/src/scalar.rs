//! Floating-point abstraction shared by every numerical module.

use std::fmt::{Display, LowerExp};

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};
use rustfft::FftNum;

/// Real scalar type the solver is generic over (`f32` or `f64`).
pub trait Real:
    FftNum + Float + FloatConst + FromPrimitive + ToPrimitive + NumAssign + Display + LowerExp + Default
{
}

impl<T> Real for T where
    T: FftNum + Float + FloatConst + FromPrimitive + ToPrimitive + NumAssign + Display + LowerExp + Default
{
}

/// Converts an `f64` literal into `T`.
#[inline]
pub fn cast<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("f64 literal representable in scalar type")
}

/// Converts `T` to `f64` for reporting and binary I/O.
#[inline]
pub fn to_f64<T: Real>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

#[inline]
pub(crate) fn from_usize<T: Real>(x: usize) -> T {
    T::from_usize(x).expect("usize representable in scalar type")
}

#[inline]
pub(crate) fn from_i64<T: Real>(x: i64) -> T {
    T::from_i64(x).expect("i64 representable in scalar type")
}

//! Scalar abstraction shared by every numerical module.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive};
use rustfft::FftNum;

/// Floating point type the solver can run on (`f32` or `f64`).
///
/// Tolerances quoted throughout the test-suite assume `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + FftNum + Default + Display + LowerExp + Sum + Debug
{
}

impl<T> Real for T where
    T: Float + FloatConst + FromPrimitive + FftNum + Default + Display + LowerExp + Sum + Debug
{
}

/// Converts an `f64` literal into `T`.
#[inline(always)]
pub fn lit<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("literal representable in scalar type")
}

/// `3 / (2 sqrt 2)`: ratio between the mixing-energy weight and the surface
/// tension for the quartic double well `(s^2 - 1)^2 / 4`.
#[inline]
pub fn tension_weight<T: Real>() -> T {
    lit::<T>(3.0) / (lit::<T>(2.0) * T::SQRT_2())
}

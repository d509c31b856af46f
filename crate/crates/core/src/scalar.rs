//! Scalar abstraction shared by every numerical module.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Real floating-point scalar the solvers are generic over (`f32` or `f64`).
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + rustfft::FftNum
    + Sum
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal. Every supported scalar can represent (a rounding of) any `f64`.
    #[inline]
    fn lit(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        <Self as FromPrimitive>::from_usize(n).expect("usize representable")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// `e^{iθ}`.
#[inline]
pub fn cis<T: Real>(theta: T) -> Complex<T> {
    Complex::new(theta.cos(), theta.sin())
}

/// `√i = e^{iπ/4}` on the principal branch.
#[inline]
pub fn sqrt_i<T: Real>() -> Complex<T> {
    cis(T::FRAC_PI_4())
}

/// `√(4i) = 2 e^{iπ/4}`, the factor relating `√(4i/π)∫…/√(t−s)` to the half integral.
#[inline]
pub fn sqrt_4i<T: Real>() -> Complex<T> {
    sqrt_i::<T>() * T::lit(2.0)
}

#[inline]
pub(crate) fn is_finite<T: Real>(z: Complex<T>) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

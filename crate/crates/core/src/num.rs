//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display};

use nalgebra as na;
use num_traits as nt;

pub use na::Complex;

/// Real floating point scalar (`f32` or `f64`) usable throughout the crate.
///
/// Math methods come from [`nalgebra::RealField`]; `num_traits::Float` is
/// deliberately not part of the bound because its method names collide.
pub trait Real:
    na::RealField + nt::FloatConst + nt::FromPrimitive + nt::ToPrimitive + Copy + Default + Debug + Display
{
    /// Converts an `f64` literal into this scalar type.
    fn lit(x: f64) -> Self;

    fn to_f64_lossy(self) -> f64;

    /// Machine epsilon of the scalar type.
    fn eps() -> Self;
}

macro_rules! impl_real {
    ($f:ty) => {
        impl Real for $f {
            #[inline(always)]
            fn lit(x: f64) -> Self {
                x as $f
            }
            #[inline(always)]
            fn to_f64_lossy(self) -> f64 {
                self as f64
            }
            #[inline(always)]
            fn eps() -> Self {
                <$f>::EPSILON
            }
        }
    };
}

impl_real!(f32);
impl_real!(f64);

#[inline(always)]
pub fn cplx<T: Real>(re: T, im: T) -> Complex<T> {
    Complex::new(re, im)
}

#[inline(always)]
pub fn real<T: Real>(re: T) -> Complex<T> {
    Complex::new(re, T::zero())
}

#[inline(always)]
pub fn imag_unit<T: Real>() -> Complex<T> {
    Complex::new(T::zero(), T::one())
}

/// Modulus of a complex number.
#[inline(always)]
pub fn cabs<T: Real>(z: Complex<T>) -> T {
    z.re.hypot(z.im)
}

#[inline(always)]
pub fn is_finite_c<T: Real>(z: Complex<T>) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

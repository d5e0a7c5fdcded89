//! Scalar abstraction shared by every model in the crate.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};
use rustfft::FftNum;

/// Floating point scalar the models are generic over: `f32` or `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + NumAssign + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal into the scalar type.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    /// Converts a count into the scalar type.
    #[inline]
    fn count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Scalars usable by the FFT-based spectral routines.
///
/// Kept separate from [`Real`] because `FftNum` pulls in `num_traits::Signed`,
/// whose `abs`/`signum` collide with the `Float` methods.
pub trait SpectralReal: Real + FftNum {}

impl<T: Real + FftNum> SpectralReal for T {}

/// Threshold that is `1e-15`-ish for `f64` but never below a few ulps of `T`.
#[inline]
pub(crate) fn tiny<T: Real>(target: f64) -> T {
    let eps = T::epsilon() * T::lit(4.0);
    let t = T::lit(target);
    if t > eps {
        t
    } else {
        eps
    }
}

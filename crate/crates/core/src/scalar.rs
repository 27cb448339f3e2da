use std::fmt::{Debug, Display, LowerExp};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use rustfft::FftNum;

/// Floating point scalar the engine is generic over: `f32` or `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + FftNum + Debug + Display + LowerExp + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal. Never fails for the supported types.
    #[inline]
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("f64 literal representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// `base` floored at a multiple of machine epsilon, so that tolerances
    /// written for `f64` stay meaningful for `f32`.
    #[inline]
    fn tol(base: f64) -> Self {
        Self::lit(base).max(Self::epsilon() * Self::lit(1e5))
    }
}

impl Real for f32 {}
impl Real for f64 {}

pub(crate) fn max_abs<T: Real>(it: impl IntoIterator<Item = T>) -> T {
    it.into_iter().fold(T::zero(), |m, v| m.max(v.abs()))
}

//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use nalgebra::RealField;
use num_traits::{FromPrimitive, ToPrimitive};

/// Real floating-point scalar: `f32` or `f64`.
///
/// Linear algebra comes from [`RealField`]; conversions from `num-traits`.
/// The few constants `RealField` does not expose live here.
pub trait Real: RealField + Copy + FromPrimitive + ToPrimitive + Sum + Debug + Display + Send + Sync + 'static {
    /// Converts an `f64` literal. Infallible for `f32`/`f64`.
    #[inline]
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("f64 literal representable")
    }

    /// Machine epsilon.
    fn eps() -> Self;

    fn infinity() -> Self;

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    #[inline]
    fn of_usize(n: usize) -> Self {
        Self::lit(n as f64)
    }
}

impl Real for f32 {
    #[inline]
    fn eps() -> Self {
        f32::EPSILON
    }
    #[inline]
    fn infinity() -> Self {
        f32::INFINITY
    }
}

impl Real for f64 {
    #[inline]
    fn eps() -> Self {
        f64::EPSILON
    }
    #[inline]
    fn infinity() -> Self {
        f64::INFINITY
    }
}

//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display};

use nalgebra::RealField;
use num_traits::{FromPrimitive, ToPrimitive};

/// Real floating-point scalar: `f64` for production runs, `f32` where memory matters.
///
/// Linear algebra comes from nalgebra's [`RealField`]; conversions go through num-traits.
pub trait Real:
    RealField + Copy + FromPrimitive + ToPrimitive + Debug + Display + Send + Sync + 'static
{
    /// Converts an `f64` literal or tolerance into this scalar type.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal is representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar converts to f64")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::lit(n as f64)
    }

    /// Machine epsilon of the scalar type.
    fn machine_epsilon() -> Self;
}

impl Real for f64 {
    fn machine_epsilon() -> Self {
        f64::EPSILON
    }
}

impl Real for f32 {
    fn machine_epsilon() -> Self {
        f32::EPSILON
    }
}

/// Tolerance `tol` scaled to a problem magnitude, floored at a few hundred ulps of `T`.
pub(crate) fn scaled_tolerance<T: Real>(tol: f64, scale: T) -> T {
    let floor = T::machine_epsilon() * T::lit(100.0);
    let rel = if T::lit(tol) > floor {
        T::lit(tol)
    } else {
        floor
    };
    rel * scale.abs()
}

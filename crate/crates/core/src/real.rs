//! Scalar abstraction for the analytic core.

use core::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating-point scalar the analytic machinery is generic over.
///
/// Everything numeric in this crate (special functions, quadrature, the
/// distance CDFs and their generating functions) is written against this
/// trait so the same code runs in `f32` and `f64`. The Monte Carlo
/// validation paths work in `f64`, which is the default type parameter
/// throughout.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Send + Sync + 'static
{
    /// Lift an `f64` constant into this scalar type.
    #[inline]
    fn of(v: f64) -> Self {
        Self::from_f64(v).expect("constant not representable in this scalar type")
    }

    /// Lift a count into this scalar type.
    #[inline]
    fn of_usize(n: usize) -> Self {
        Self::from_usize(n).expect("count not representable in this scalar type")
    }

    #[inline]
    fn half() -> Self {
        Self::of(0.5)
    }

    #[inline]
    fn two() -> Self {
        Self::of(2.0)
    }
}

impl Real for f32 {}
impl Real for f64 {}

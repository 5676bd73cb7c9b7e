//! Scalar abstraction shared by the geometric and sensing kernels.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating point scalar: `f32` or `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Lossy conversion from an `f64` literal.
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("f64 literal representable in scalar type")
    }

    fn two_pi() -> Self {
        Self::TAU()
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Wraps an angle into `[0, 2π)`.
pub fn normalize_angle<T: Real>(theta: T) -> T {
    let tau = T::two_pi();
    let mut a = theta % tau;
    if a < T::zero() {
        a = a + tau;
    }
    // `-ε + 2π` rounds to exactly 2π.
    if a >= tau {
        a = T::zero();
    }
    a
}

//! Scalar abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use rand::distr::uniform::SampleUniform;

/// Real floating-point type the walk is computed in (`f32` or `f64`).
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + SampleUniform
    + Sum
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Largest tolerated deviation of the state norm from one before a
    /// trajectory is aborted.
    fn norm_drift_limit() -> Self {
        let floor = Self::from_f64(1e-9).unwrap();
        floor.max(Self::epsilon() * Self::from_f64(1e3).unwrap())
    }

    fn lit(x: f64) -> Self {
        Self::from_f64(x).unwrap()
    }

    fn from_count(n: usize) -> Self {
        Self::from_usize(n).unwrap()
    }
}

impl<T> Real for T where
    T: Float
        + FloatConst
        + FromPrimitive
        + ToPrimitive
        + SampleUniform
        + Sum
        + Default
        + Debug
        + Display
        + Send
        + Sync
        + 'static
{
}

/// `sin(x) / x`, continuous at zero.
pub fn sinc<T: Real>(x: T) -> T {
    if x.abs() < T::lit(1e-8) {
        T::one() - x * x / T::lit(6.0)
    } else {
        x.sin() / x
    }
}

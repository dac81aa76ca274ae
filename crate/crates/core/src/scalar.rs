//! Floating-point abstraction shared by objectives and algorithms.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Real scalar used for objective values, thresholds and ε.
///
/// Implemented for `f32` and `f64`. Objective values are compared against
/// thresholds, so the type must be totally ordered on finite inputs; NaN never
/// appears on valid data.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Sum + Default + Debug + Display + Send + Sync + 'static
{
    /// Absolute slack used by monotonicity / submodularity checks.
    fn tolerance() -> Self;

    /// Lossy conversion helper; panics only for values outside the type's range.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("value representable in scalar type")
    }

    fn of_usize(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f64 {
    fn tolerance() -> Self {
        1e-9
    }
}

impl Scalar for f32 {
    fn tolerance() -> Self {
        1e-4
    }
}

/// Larger of two scalars; NaN loses.
pub(crate) fn max<T: Scalar>(a: T, b: T) -> T {
    if b > a {
        b
    } else {
        a
    }
}

//! Scalar abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::str::FromStr;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating point type the library computes in: `f32` or `f64`.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Sum + FromStr + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal or intermediate into this type.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 is representable in every Scalar")
    }

    /// Converts a count into this type.
    fn of_usize(n: usize) -> Self {
        Self::from_usize(n).expect("usize is representable in every Scalar")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().expect("Scalar converts to f64")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Mean of a non-empty slice, accumulated left to right.
pub(crate) fn mean<T: Scalar>(xs: &[T]) -> T {
    let sum = xs.iter().fold(T::zero(), |acc, &x| acc + x);
    sum / T::of_usize(xs.len())
}

/// Loose tolerance used for rank decisions: square root of machine epsilon.
pub(crate) fn rank_tolerance<T: Scalar>() -> T {
    T::epsilon().sqrt()
}

//! Floating-point scalar abstraction shared by every numeric module.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive};

/// Real scalar the geometry, trajectory and control code is generic over.
///
/// Implemented for `f32` and `f64`. The simulator front end (scenario files,
/// logs) is `f64`-only.
pub trait Scalar:
    Float + FromPrimitive + Debug + Display + Default + Sum + Send + Sync + 'static
{
    /// Tolerance used for continuity and residual checks at this precision.
    fn tolerance() -> Self;

    /// Converts a literal. Panics only if the value is not representable,
    /// which never happens for the finite constants used in this crate.
    #[inline]
    fn lit(value: f64) -> Self {
        Self::from_f64(value).expect("finite literal")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
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

/// Sign function with `sgn(0) = -1`, so boundary points fall on the
/// negative side.
#[inline]
pub fn sgn<T: Scalar>(x: T) -> T {
    if x > T::zero() {
        T::one()
    } else {
        -T::one()
    }
}

//! Numeric abstraction shared by the solver and the predictors.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

use num_traits::{Float, FromPrimitive, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Floating-point scalar usable by the LP/MILP engine and the learners.
///
/// Implemented for `f32` and `f64`. Tolerances that are not supplied by the
/// caller are derived from the type's machine epsilon.
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + Debug
    + Display
    + Default
    + Sum
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Serialize
    + DeserializeOwned
    + Send
    + Sync
    + 'static
{
    /// Lossy conversion from an `f64` literal.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    /// Conversion to `f64` for reporting.
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Pivot / zero tolerance used inside the simplex.
    fn pivot_tolerance() -> Self {
        Self::epsilon().sqrt() * Self::lit(0.1)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

//! Scalar abstraction so the numerics can run at any IEEE float width.

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating point scalar the solvers are generic over (f32 or f64).
///
/// All hard-coded constants in the crate are written as f64 literals and
/// converted through [`Scalar::of`], so the tolerances quoted in the docs
/// assume f64; at f32 the same code runs but cannot reach them.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Debug + Display + Send + Sync + 'static
{
    /// Converts an f64 literal into the scalar type.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("finite f64 literal must convert")
    }

    /// Lossy view as f64, used for reporting and error messages.
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

use std::fmt::{Debug, Display, LowerExp};

use nalgebra::RealField;
use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating-point scalar the PEP assembly is generic over.
///
/// Both `num_traits::Float` and `nalgebra::RealField` are required: the
/// former for the arithmetic of the interpolation formulas, the latter for
/// dense matrices and the symmetric eigensolver. Methods present in both
/// traits must be called with fully qualified syntax.
pub trait Scalar:
    RealField
    + Float
    + FromPrimitive
    + ToPrimitive
    + Copy
    + Default
    + Debug
    + Display
    + LowerExp
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal.
    fn lit(v: f64) -> Self {
        <Self as FromPrimitive>::from_f64(v).expect("finite literal")
    }

    fn to_f64_lossy(self) -> f64 {
        ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

pub(crate) fn abs<T: Scalar>(x: T) -> T {
    Float::abs(x)
}

pub(crate) fn sqrt<T: Scalar>(x: T) -> T {
    Float::sqrt(x)
}

pub(crate) fn fmax<T: Scalar>(a: T, b: T) -> T {
    Float::max(a, b)
}

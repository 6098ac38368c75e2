//! Scalar abstraction so the numerics run in `f32` or `f64`.

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive};

/// Floating-point scalar the library is generic over.
///
/// Everything the kernels need: IEEE float ops from [`Float`], conversion
/// from literals and counts, and printable/debuggable for error messages.
/// Blanket-implemented, so `f32` and `f64` (and compatible third-party
/// types) work out of the box.
pub trait Scalar: Float + FromPrimitive + Debug + Display {
    /// Convert an `f64` constant (tolerances, literal coefficients) into `Self`.
    #[inline]
    fn c(x: f64) -> Self {
        Self::from_f64(x).expect("constant not representable in scalar type")
    }

    /// Convert a count into `Self` (for means and averages).
    #[inline]
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count not representable in scalar type")
    }
}

impl<T> Scalar for T where T: Float + FromPrimitive + Debug + Display {}

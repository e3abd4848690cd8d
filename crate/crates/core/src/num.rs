//! Scalar abstraction shared by every solver module.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive};

/// Floating point type the solvers are generic over.
///
/// Implemented for `f32` and `f64`. Literal constants are written as `f64`
/// and converted with [`Real::lit`].
pub trait Real:
    Float + FloatConst + FromPrimitive + Sum + Debug + Display + LowerExp + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal. Every `f64` is representable (possibly
    /// rounded) in the supported types, so this never fails.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    /// Lossy conversion used for error reporting and I/O.
    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    #[inline]
    fn half() -> Self {
        Self::lit(0.5)
    }

    #[inline]
    fn two() -> Self {
        Self::lit(2.0)
    }

    /// Positive part `(v + |v|) / 2`.
    #[inline]
    fn pos_part(self) -> Self {
        self.max(Self::zero())
    }

    /// Negative part `(v - |v|) / 2`.
    #[inline]
    fn neg_part(self) -> Self {
        self.min(Self::zero())
    }
}

impl Real for f32 {}
impl Real for f64 {}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn split_parts_recombine() {
        for v in [-3.5f64, -0.0, 0.0, 2.25] {
            assert_eq!(v.pos_part() + v.neg_part(), v);
            assert!(v.pos_part() >= 0.0 && v.neg_part() <= 0.0);
        }
        assert_eq!(f32::lit(0.25), 0.25f32);
    }
}

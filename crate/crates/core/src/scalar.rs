//! Scalar abstraction shared by the exact and floating-point code paths.
//!
//! Everything polynomial (defining functions, the `G` minors, the tangency
//! map, determinants) is written once against [`Scalar`] so the same code
//! runs on `f64`, `f32` and exact rationals. Operations that need square
//! roots or transcendental functions take [`RealScalar`] instead.

use std::fmt::Debug;

use num_traits::{Float, FromPrimitive, Num, Signed, ToPrimitive};

/// An ordered field element: `f32`, `f64` or [`crate::Rational`].
pub trait Scalar:
    Num + Signed + Clone + PartialOrd + Debug + FromPrimitive + ToPrimitive + Send + Sync + 'static
{
    fn two() -> Self {
        Self::one() + Self::one()
    }

    fn from_usize_exact(v: usize) -> Self {
        Self::from_usize(v).expect("usize representable in scalar")
    }

    /// Lossy conversion for reporting.
    fn as_f64(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn max_of(a: Self, b: Self) -> Self {
        if a >= b {
            a
        } else {
            b
        }
    }
}

impl<T> Scalar for T where
    T: Num
        + Signed
        + Clone
        + PartialOrd
        + Debug
        + FromPrimitive
        + ToPrimitive
        + Send
        + Sync
        + 'static
{
}

/// Floating-point scalars (`f32`, `f64`).
pub trait RealScalar: Scalar + Float {}

impl<T> RealScalar for T where T: Scalar + Float {}

/// Relative residual `|lhs - rhs| / max(1, |lhs|, |rhs|)`.
pub fn relative_residual<T: Scalar>(lhs: &T, rhs: &T) -> T {
    let scale = T::max_of(T::one(), T::max_of(lhs.abs(), rhs.abs()));
    (lhs.clone() - rhs.clone()).abs() / scale
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;
    use num_bigint::BigInt;
    use num_traits::Zero;

    #[test]
    fn residual_uses_unit_floor() {
        assert_eq!(relative_residual(&0.5f64, &0.25), 0.25);
        assert_eq!(relative_residual(&10.0f64, &8.0), 0.2);
    }

    #[test]
    fn rational_residual_is_exact() {
        let a = Rational::new(BigInt::from(1), BigInt::from(3));
        let b = Rational::new(BigInt::from(2), BigInt::from(6));
        assert!(relative_residual(&a, &b).is_zero());
    }
}

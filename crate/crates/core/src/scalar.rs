//! Scalar abstraction shared by the exact and floating-point code paths.

use std::fmt::Debug;
use std::ops::Neg;

use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{Num, ToPrimitive, Zero};

use crate::multiquad::MultiQuad;

/// A field usable by the generic linear algebra and exterior-algebra code.
///
/// Exact fields report `is_negligible` only for true zeros; floating-point
/// fields use an absolute threshold and `pivot_magnitude` to drive partial
/// pivoting.
pub trait Field: Clone + Debug + PartialEq + Num + Neg<Output = Self> {
    fn is_negligible(&self) -> bool;

    fn pivot_magnitude(&self) -> f64;

    /// Whether the field is exact (no rounding).
    fn is_exact() -> bool;
}

/// Absolute zero threshold for `f64` elimination.
pub const F64_ZERO_TOL: f64 = 1e-12;
/// Absolute zero threshold for `f32` elimination.
pub const F32_ZERO_TOL: f32 = 1e-5;

impl Field for f64 {
    fn is_negligible(&self) -> bool {
        self.abs() < F64_ZERO_TOL
    }
    fn pivot_magnitude(&self) -> f64 {
        self.abs()
    }
    fn is_exact() -> bool {
        false
    }
}

impl Field for f32 {
    fn is_negligible(&self) -> bool {
        self.abs() < F32_ZERO_TOL
    }
    fn pivot_magnitude(&self) -> f64 {
        self.abs() as f64
    }
    fn is_exact() -> bool {
        false
    }
}

impl Field for BigRational {
    fn is_negligible(&self) -> bool {
        self.is_zero()
    }
    fn pivot_magnitude(&self) -> f64 {
        // any nonzero pivot is fine; prefer simpler ones
        if self.is_zero() {
            0.0
        } else {
            1.0 / (1.0 + self.numer().bits() as f64 + self.denom().bits() as f64)
        }
    }
    fn is_exact() -> bool {
        true
    }
}

impl Field for MultiQuad {
    fn is_negligible(&self) -> bool {
        self.is_zero()
    }
    fn pivot_magnitude(&self) -> f64 {
        if self.is_zero() {
            0.0
        } else {
            1.0 / self.keys().count() as f64
        }
    }
    fn is_exact() -> bool {
        true
    }
}

impl<T: Field> Field for Complex<T> {
    fn is_negligible(&self) -> bool {
        self.re.is_negligible() && self.im.is_negligible()
    }
    fn pivot_magnitude(&self) -> f64 {
        if T::is_exact() {
            match (self.re.is_negligible(), self.im.is_negligible()) {
                (true, true) => 0.0,
                (false, true) => self.re.pivot_magnitude(),
                (true, false) => self.im.pivot_magnitude(),
                (false, false) => 0.5 * self.re.pivot_magnitude().min(self.im.pivot_magnitude()),
            }
        } else {
            self.re.pivot_magnitude().hypot(self.im.pivot_magnitude())
        }
    }
    fn is_exact() -> bool {
        T::is_exact()
    }
}

/// Real fields that can be rendered as `f64`.
pub trait RealScalar: Field {
    fn to_f64(&self) -> f64;
    fn from_rational(q: &BigRational) -> Self;
}

impl RealScalar for f64 {
    fn to_f64(&self) -> f64 {
        *self
    }
    fn from_rational(q: &BigRational) -> Self {
        ToPrimitive::to_f64(q).unwrap_or(f64::NAN)
    }
}

impl RealScalar for BigRational {
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    fn from_rational(q: &BigRational) -> Self {
        q.clone()
    }
}

impl RealScalar for MultiQuad {
    fn to_f64(&self) -> f64 {
        MultiQuad::to_f64(self)
    }
    fn from_rational(q: &BigRational) -> Self {
        MultiQuad::from_rational(q.clone())
    }
}

//! Floating point scalar abstraction shared by every numeric module.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use ndarray::{LinalgScalar, ScalarOperand};
use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Real scalar used throughout the crate: `f32` or `f64`.
///
/// `LinalgScalar` lets ndarray route `f32`/`f64` products to its packed
/// GEMM kernels while the code stays generic.
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + LinalgScalar
    + ScalarOperand
    + Sum
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    /// Converts an `f64` literal. Infallible for the implementing types.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    #[inline]
    fn from_usize_lossy(x: usize) -> Self {
        Self::from_usize(x).expect("usize representable in scalar type")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar convertible to f64")
    }

    /// Tolerance for "sums to one" style invariants: `1e-12` for `f64`,
    /// scaled up to the type's resolution otherwise.
    #[inline]
    fn unit_tolerance() -> Self {
        let floor = Self::lit(1e-12);
        let resolution = Self::epsilon() * Self::lit(64.0);
        if resolution > floor {
            resolution
        } else {
            floor
        }
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

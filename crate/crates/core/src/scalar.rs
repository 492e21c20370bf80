//! Scalar abstraction for the numeric kernels.
//!
//! Everything numeric in this crate is generic over [`Scalar`], so the same
//! code runs in `f32` or `f64`. The crate-root type aliases pin `f64`, which
//! is what the tolerances in the test suites assume.

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, ToPrimitive};
use serde::{de::DeserializeOwned, Serialize};

pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + Debug
    + Display
    + Default
    + Serialize
    + DeserializeOwned
    + Send
    + Sync
    + 'static
{
    /// Lossy conversion from `f64`; panics only for values a float type
    /// cannot hold at all (never happens for finite inputs).
    fn from_f64_lossy(v: f64) -> Self {
        Self::from_f64(v).expect("finite f64 must convert to a float scalar")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().expect("float scalar must convert to f64")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Shorthand used throughout the crate for numeric literals.
pub fn lit<S: Scalar>(v: f64) -> S {
    S::from_f64_lossy(v)
}

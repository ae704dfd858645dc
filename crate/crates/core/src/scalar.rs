//! Scalar abstraction shared by the geometry, dynamics and Lyapunov layers.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Real scalar usable by the generic numerical kernels (`f32` or `f64`).
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + Debug
    + Display
    + Default
    + Sum
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    /// Converts an `f64` literal into this scalar type.
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("literal representable in scalar type")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar convertible to f64")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Absolute tolerance for point-in-set and coincidence tests.
pub const TOL_GEO: f64 = 1e-9;

/// Simplices with volume at or below this are rejected.
pub const VOL_MIN: f64 = 1e-12;

/// Continuity tolerance for piecewise-affine functions across shared vertices.
pub const TOL_CONT: f64 = 1e-8;

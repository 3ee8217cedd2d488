//! Scalar abstraction for the geometry and map layers.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating-point scalar the maps are generic over (`f32`, `f64`).
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal.
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("literal fits the scalar type")
    }

    /// Root-finding tolerance: `1e-14` or a few ulps, whichever is larger.
    fn solve_tol() -> Self {
        Self::lit(1e-14).max(Self::epsilon() * Self::lit(4.0))
    }

    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar converts to f64")
    }
}

impl Real for f32 {}
impl Real for f64 {}

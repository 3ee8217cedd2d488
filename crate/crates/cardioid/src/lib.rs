//! Finite-distortion homeomorphic extensions of conformal maps onto cardioid-type cusp domains.
//!
//! The map layers (`geometry`, `cusp`, `squeeze`, `extension`) are generic over [`Real`];
//! the analysis harness works in `f64`.

pub mod analysis;
pub mod cusp;
pub mod error;
pub mod geometry;
pub mod extension;
pub mod jacobian;
pub mod numdiff;
pub mod scalar;
pub mod squeeze;

pub use error::{Error, Result};
pub use jacobian::Jacobian;
pub use scalar::Real;

/// `f64` instances of the generic types.
pub type Jacobian64 = Jacobian<f64>;
pub type CuspProfile64 = cusp::CuspProfile<f64>;
pub type CellScale64 = cusp::CellScale<f64>;
pub type BoundaryCurve64 = geometry::BoundaryCurve<f64>;
pub type SqueezeParams64 = squeeze::SqueezeParams<f64>;
pub type SqueezedCell64 = squeeze::SqueezedCell<f64>;
pub type TrapezoidDecomposition64 = squeeze::TrapezoidDecomposition<f64>;
pub type Construction64 = extension::Construction<f64>;
pub type CellMap64 = extension::CellMap<f64>;
pub type Extension64 = extension::Extension<f64>;

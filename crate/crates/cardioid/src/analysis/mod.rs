//! Quantitative harness (`f64`): cell quadrature, dyadic series, critical exponents, the
//! lower-bound test functions and the structural checks.

pub mod checks;
pub mod eikonal;
pub mod integrals;
pub mod lemmas;
pub mod quad;
pub mod series;
pub mod thresholds;

pub use integrals::{cell_integral, CellIntegral, DistortionSample, Quantity};
pub use quad::{QuadParams, TensorRule};
pub use series::{
    critical_exponent_scan, dyadic_series, CriticalExponent, DyadicSeriesReport, Verdict,
};
pub use thresholds::{r_transfer, thresholds, ThresholdSet};

//! Dyadic series of cell integrals, log-slope fits and critical-exponent scans.

use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::integrals::{cell_integral, cell_integral_pointwise, CellIntegral, Quantity};
use super::quad::TensorRule;
use crate::error::{Error, Result};
use crate::extension::{Construction, Extension, ScenarioDescriptor};
use crate::squeeze::DeltaMode;

pub const DEFAULT_MARGIN: f64 = 0.1;

/// Largest `j` for which exp-mode `delta` is accepted by the series drivers.
pub const EXP_MODE_MAX_J: u32 = 14;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Converges,
    Diverges,
    Critical,
    Inconclusive,
}

impl Verdict {
    pub fn from_slope(slope: f64, margin: f64) -> Self {
        if !slope.is_finite() {
            Verdict::Inconclusive
        } else if slope < -margin {
            Verdict::Converges
        } else if slope > margin {
            Verdict::Diverges
        } else {
            Verdict::Critical
        }
    }
}

/// Ordinary least squares `y = a + b x`; returns `(b, a, stderr of b)`.
pub fn ols(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let b = sxy / sxx;
    let a = my - b * mx;
    let se = if x.len() > 2 {
        let rss: f64 = x.iter().zip(y).map(|(u, v)| (v - a - b * u).powi(2)).sum();
        (rss / (n - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    (b, a, se)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DyadicSeriesReport {
    pub scenario: ScenarioDescriptor,
    pub quantity: Quantity,
    pub exponent: f64,
    pub j: Vec<u32>,
    /// `I_j`; may underflow to 0 where `log2_integral` is still finite.
    pub integral: Vec<f64>,
    pub log2_integral: Vec<f64>,
    /// `log2(I_{j+1} / I_j)`, one shorter than `j`.
    pub log2_ratio: Vec<f64>,
    /// OLS slope of `log2 I_j` against `j`.
    pub slope: f64,
    pub slope_stderr: f64,
    pub margin: f64,
    pub verdict: Verdict,
    pub converged: bool,
    pub evaluations: usize,
}

impl DyadicSeriesReport {
    pub fn from_cells(
        scenario: ScenarioDescriptor,
        quantity: Quantity,
        exponent: f64,
        cells: &[CellIntegral],
        margin: f64,
    ) -> Result<Self> {
        if cells.len() < 2 {
            return Err(Error::Config("a dyadic series needs at least two cells".into()));
        }
        let j: Vec<u32> = cells.iter().map(|c| c.j).collect();
        let l2: Vec<f64> = cells.iter().map(|c| c.log2_value()).collect();
        let xs: Vec<f64> = j.iter().map(|&v| v as f64).collect();
        let (slope, _, se) = ols(&xs, &l2);
        let converged = cells.iter().all(|c| c.converged);
        let verdict = if converged {
            Verdict::from_slope(slope, margin)
        } else {
            Verdict::Inconclusive
        };
        Ok(Self {
            scenario,
            quantity,
            exponent,
            integral: cells.iter().map(|c| c.value()).collect(),
            log2_ratio: l2.windows(2).map(|w| w[1] - w[0]).collect(),
            log2_integral: l2,
            j,
            slope,
            slope_stderr: se,
            margin,
            verdict,
            converged,
            evaluations: cells.iter().map(|c| c.evaluations).sum(),
        })
    }

    /// `sum_j I_j`, accumulated from the smallest term up.
    pub fn partial_sum(&self) -> f64 {
        let mut v = self.integral.clone();
        v.sort_by(f64::total_cmp);
        v.iter().sum()
    }

    /// CSV with header `j,integral,log2_ratio`; the last row has an empty ratio.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("j,integral,log2_ratio\n");
        for (i, j) in self.j.iter().enumerate() {
            let r = self
                .log2_ratio
                .get(i)
                .map(|v| format!("{v:.16e}"))
                .unwrap_or_default();
            s.push_str(&format!("{j},{:.16e},{r}\n", self.integral[i]));
        }
        s
    }
}

fn check_range(ext: &Extension<f64>, j_min: u32, j_max: u32) -> Result<()> {
    if j_min < ext.j0 || j_max < j_min + 1 {
        return Err(Error::Config(format!(
            "need j0 <= jmin < jmax, got j0 = {}, [{j_min}, {j_max}]",
            ext.j0
        )));
    }
    if let Construction::Squeezed { params } = ext.construction {
        if params.mode == DeltaMode::Exp && j_max > EXP_MODE_MAX_J {
            return Err(Error::Config(format!(
                "exp-mode delta caps jmax at {EXP_MODE_MAX_J}, got {j_max}"
            )));
        }
    }
    Ok(())
}

/// Cell integrals `I_j` for `j` in `[j_min, j_max]`, computed in parallel, in `j` order.
pub fn cell_series(
    ext: &Extension<f64>,
    quantity: Quantity,
    exponent: f64,
    j_min: u32,
    j_max: u32,
    rule: &TensorRule,
) -> Result<Vec<CellIntegral>> {
    check_range(ext, j_min, j_max)?;
    (j_min..=j_max)
        .into_par_iter()
        .map(|j| cell_integral(&ext.cell_map(j)?, quantity, exponent, rule))
        .collect()
}

pub fn dyadic_series(
    ext: &Extension<f64>,
    quantity: Quantity,
    exponent: f64,
    j_min: u32,
    j_max: u32,
    rule: &TensorRule,
) -> Result<DyadicSeriesReport> {
    let cells = cell_series(ext, quantity, exponent, j_min, j_max, rule)?;
    DyadicSeriesReport::from_cells(ext.descriptor(), quantity, exponent, &cells, DEFAULT_MARGIN)
}

/// Dyadic series of the cardioid map `f0(z) = E(z + 1)` over its cusp cells `Q_t - 1`, with
/// the Jacobian taken pointwise from the global evaluation of `f0`.
pub fn f0_dyadic_series(
    ext: &Extension<f64>,
    quantity: Quantity,
    exponent: f64,
    j_min: u32,
    j_max: u32,
    rule: &TensorRule,
) -> Result<DyadicSeriesReport> {
    check_range(ext, j_min, j_max)?;
    let jet = |z: Complex<f64>| {
        let s = ext.cardioid_f0_jet(z - 1.0)?;
        s.jacobian.ok_or(Error::OutsideDomain {
            map: "f0 Jacobian",
            x: z.re - 1.0,
            y: z.im,
        })
    };
    let cells = (j_min..=j_max)
        .into_par_iter()
        .map(|j| cell_integral_pointwise(&ext.cell(j)?, quantity, exponent, rule, jet))
        .collect::<Result<Vec<_>>>()?;
    DyadicSeriesReport::from_cells(ext.descriptor(), quantity, exponent, &cells, DEFAULT_MARGIN)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalExponent {
    pub value: f64,
    /// `margin / |d slope / d exponent|`.
    pub uncertainty: f64,
    pub slope_at_value: f64,
    pub dslope: f64,
    pub iterations: u32,
}

/// Bisection on `slope(exponent)` inside `bracket` until `|slope| <= tol`.
pub fn critical_exponent_scan<F>(
    mut slope: F,
    bracket: (f64, f64),
    tol: f64,
    margin: f64,
) -> Result<CriticalExponent>
where
    F: FnMut(f64) -> Result<f64>,
{
    let (mut lo, mut hi) = bracket;
    let mut s_lo = slope(lo)?;
    let mut s_hi = slope(hi)?;
    if !(s_lo * s_hi <= 0.0) {
        return Err(Error::NoSignChange { lo, hi });
    }
    let dslope = (s_hi - s_lo) / (hi - lo);
    let mut iterations = 0;
    let (value, s_val) = loop {
        if s_lo.abs() <= tol {
            break (lo, s_lo);
        }
        if s_hi.abs() <= tol {
            break (hi, s_hi);
        }
        let mid = 0.5 * (lo + hi);
        let s_mid = slope(mid)?;
        iterations += 1;
        if s_mid.abs() <= tol || iterations >= 60 {
            break (mid, s_mid);
        }
        if (s_mid < 0.0) == (s_lo < 0.0) {
            lo = mid;
            s_lo = s_mid;
        } else {
            hi = mid;
            s_hi = s_mid;
        }
    };
    Ok(CriticalExponent {
        value,
        uncertainty: margin / dslope.abs(),
        slope_at_value: s_val,
        dslope,
        iterations,
    })
}

/// Critical exponent of `quantity` for the scenario from the fitted slopes on `[j_min, j_max]`.
pub fn scenario_critical_exponent(
    ext: &Extension<f64>,
    quantity: Quantity,
    bracket: (f64, f64),
    j_min: u32,
    j_max: u32,
    rule: &TensorRule,
) -> Result<CriticalExponent> {
    critical_exponent_scan(
        |e| Ok(dyadic_series(ext, quantity, e, j_min, j_max, rule)?.slope),
        bracket,
        0.02,
        DEFAULT_MARGIN,
    )
}

//! The verification suite behind `cardioid verify`.

use cardioid::analysis::checks::{structural_suite, with_tampered_eta, CheckResult};
use cardioid::analysis::{Quantity, TensorRule};
use cardioid::extension::Extension;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::{ConstructionKind, ScenarioConfig};
use crate::error::CliResult;
use crate::exponents::series;

/// Allowed distance of a fitted slope from its closed form.
pub const SLOPE_TOL: f64 = 0.15;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlopeCheck {
    pub quantity: Quantity,
    pub exponent: f64,
    pub slope: f64,
    pub slope_stderr: f64,
    /// Closed-form slope, when the construction has one.
    pub expected: Option<f64>,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifySummary {
    pub config: ScenarioConfig,
    pub tampered_eta: bool,
    pub checks: Vec<CheckResult>,
    pub slopes: Vec<SlopeCheck>,
    pub failures: Vec<String>,
    pub pass: bool,
}

/// Slope of `log2 I_j` for the simple construction.
pub fn simple_slope(quantity: Quantity, s: f64, e: f64) -> Option<f64> {
    match quantity {
        Quantity::Kf => Some(2.0 * (e * (s - 1.0) - 1.0)),
        Quantity::Kfinv => Some(2.0 * ((s - 1.0) * e - (s + 1.0))),
        Quantity::Dfinv => Some(-(2.0 * (s + 1.0) + e * (1.0 - 2.0 * s))),
        Quantity::Df | Quantity::Jac => None,
    }
}

/// `K >= 1` and `K = sigma_max / sigma_min` on random points of the cells `j_min..=j_max`.
pub fn distortion_identity(ext: &Extension<f64>, j: (u32, u32), per_cell: usize, seed: u64) -> CliResult<CheckResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut worst, mut min_k, mut n) = (0.0f64, f64::INFINITY, 0);
    for jj in j.0..=j.1 {
        let map = ext.cell_map(jj)?;
        let c = *map.cell();
        for _ in 0..per_cell {
            let r = rng.random_range(c.l1..c.l2);
            let y = rng.random_range(-0.5..0.5) * c.sigma;
            let (_, d) = map.forward_at_rect((r, y));
            if d.det() <= 0.0 {
                continue;
            }
            let (smax, smin) = d.singular_values();
            let k = d.distortion();
            worst = worst.max((k - smax / smin).abs() / k);
            min_k = min_k.min(k);
            n += 1;
        }
    }
    let mut res = CheckResult::at_most("distortion_identity", worst, 1e-10, n);
    res.pass &= min_k >= 1.0 - 1e-12;
    Ok(res)
}

/// `int_{Q_t} J = area(Q~_t)` per cell, and the partial sum below the area of the whole cusp.
pub fn area_transport(ext: &Extension<f64>, j: (u32, u32), rule: &TensorRule) -> CliResult<Vec<CheckResult>> {
    let rep = cardioid::analysis::dyadic_series(ext, Quantity::Jac, 1.0, j.0, j.1, rule)?;
    let mut worst = 0.0f64;
    for (k, jj) in rep.j.iter().enumerate() {
        let area = ext.cell(*jj)?.cusp_cell_area();
        worst = worst.max((rep.integral[k] - area).abs() / area);
    }
    let s = ext.profile.s;
    let t2 = ext.t0 * ext.t0;
    let cusp_area = 2.0 * ext.profile.amplitude * t2.powf(s + 1.0) / (s + 1.0);
    Ok(vec![
        CheckResult::at_most("change_of_variables", worst, 1e-6, rep.j.len()),
        // rounding slack: the cells tile the cusp, so the bound is nearly attained
        CheckResult::at_most(
            "jacobian_series_bounded",
            rep.partial_sum(),
            cusp_area * (1.0 + 1e-9),
            rep.j.len(),
        ),
    ])
}

pub fn run_verify(cfg: &ScenarioConfig, tamper_eta: bool) -> CliResult<VerifySummary> {
    let mut ext = cfg.build()?;
    if tamper_eta {
        // off-by-one cusp exponent in the cell maps, the domain left as is
        ext = with_tampered_eta(&ext, 1.0)?;
    }
    let rule = TensorRule::new(cfg.quad)?;
    let j = (cfg.j_min, cfg.j_max.max(cfg.j_min + 1));
    let mut checks = structural_suite(&ext)?;
    checks.push(distortion_identity(&ext, j, 200, 3)?);
    checks.extend(area_transport(&ext, j, &rule)?);

    let mut slopes = Vec::new();
    for q in [Quantity::Kf, Quantity::Kfinv, Quantity::Dfinv] {
        for e in cfg.exponent_grid(q)? {
            let rep = series(&ext, q, e, j, &rule)?;
            let expected = match cfg.construction {
                ConstructionKind::Simple => simple_slope(q, cfg.s, e),
                ConstructionKind::Squeezed => None,
            };
            let pass = rep.converged
                && expected.is_none_or(|x| (rep.slope - x).abs() <= SLOPE_TOL);
            slopes.push(SlopeCheck {
                quantity: q,
                exponent: e,
                slope: rep.slope,
                slope_stderr: rep.slope_stderr,
                expected,
                tolerance: SLOPE_TOL,
                pass,
            });
        }
    }
    let failures: Vec<String> = checks
        .iter()
        .filter(|c| !c.pass)
        .map(|c| format!("{}: measured {:e}, tolerance {:e}", c.name, c.measured, c.tolerance))
        .chain(slopes.iter().filter(|s| !s.pass).map(|s| {
            format!(
                "slope {} q={}: {} (expected {:?})",
                s.quantity, s.exponent, s.slope, s.expected
            )
        }))
        .collect();
    Ok(VerifySummary {
        config: cfg.clone(),
        tampered_eta: tamper_eta,
        pass: failures.is_empty(),
        checks,
        slopes,
        failures,
    })
}

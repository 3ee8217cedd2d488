//! Dyadic series over the exponent grids and critical-exponent scans.

use std::path::Path;

use cardioid::analysis::series::{f0_dyadic_series, DEFAULT_MARGIN};
use cardioid::analysis::{
    critical_exponent_scan, dyadic_series, CriticalExponent, DyadicSeriesReport, Quantity,
    TensorRule,
};
use cardioid::extension::{Extension, Model};
use cardioid::Error;
use serde::{Deserialize, Serialize};

use crate::config::ScenarioConfig;
use crate::error::{CliError, CliResult};
use crate::write_file;

/// Bisection stops once the fitted slope is this close to 0.
pub const SCAN_TOL: f64 = 0.02;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesEntry {
    pub quantity: Quantity,
    pub exponent: f64,
    pub slope: f64,
    pub slope_stderr: f64,
    pub verdict: cardioid::analysis::Verdict,
    /// Report file names, relative to the output directory.
    pub json: String,
    pub csv: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalEntry {
    pub quantity: Quantity,
    pub predicted: f64,
    pub bracket: (f64, f64),
    pub result: Option<CriticalExponent>,
    /// Why `result` is missing.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentsSummary {
    pub config: ScenarioConfig,
    pub series: Vec<SeriesEntry>,
    pub criticals: Vec<CriticalEntry>,
}

/// `dyadic_series`, or its `f0` version for the standard cardioid.
pub fn series(
    ext: &Extension<f64>,
    quantity: Quantity,
    exponent: f64,
    j: (u32, u32),
    rule: &TensorRule,
) -> cardioid::Result<DyadicSeriesReport> {
    match ext.model {
        Model::StandardCardioid { .. } => f0_dyadic_series(ext, quantity, exponent, j.0, j.1, rule),
        Model::CardioidType { .. } => dyadic_series(ext, quantity, exponent, j.0, j.1, rule),
    }
}

fn tag(quantity: Quantity, exponent: f64) -> String {
    format!("{}_{exponent}", quantity.name())
}

/// Runs every configured series (and, with `scan`, the critical-exponent scans) and writes
/// `<quantity>_<exponent>.{json,csv}` plus `exponents.json` into `cfg.out`.
pub fn run_exponents(cfg: &ScenarioConfig, scan: bool) -> CliResult<ExponentsSummary> {
    let ext = cfg.build()?;
    let rule = TensorRule::new(cfg.quad)?;
    let j = (cfg.j_min, cfg.j_max);
    if j.0 == j.1 {
        return Err(CliError::Config("a slope fit needs jmin < jmax".into()));
    }
    std::fs::create_dir_all(&cfg.out).map_err(CliError::io(&cfg.out))?;
    let mut entries = Vec::new();
    for &q in &cfg.quantities {
        for e in cfg.exponent_grid(q)? {
            let rep = series(&ext, q, e, j, &rule)?;
            let json = format!("{}.json", tag(q, e));
            let csv = format!("{}.csv", tag(q, e));
            write_file(&cfg.out.join(&json), serde_json::to_string_pretty(&rep)?.as_bytes())?;
            write_file(&cfg.out.join(&csv), rep.to_csv().as_bytes())?;
            entries.push(SeriesEntry {
                quantity: q,
                exponent: e,
                slope: rep.slope,
                slope_stderr: rep.slope_stderr,
                verdict: rep.verdict,
                json,
                csv,
            });
        }
    }
    let mut criticals = Vec::new();
    if scan {
        for &q in &cfg.quantities {
            let Some(c) = cfg.predicted_critical(q)? else { continue };
            let bracket = (0.6 * c, 1.7 * c);
            let res = critical_exponent_scan(
                |e| Ok(series(&ext, q, e, j, &rule)?.slope),
                bracket,
                SCAN_TOL,
                DEFAULT_MARGIN,
            );
            let (result, note) = match res {
                Ok(r) => (Some(r), None),
                Err(e @ Error::NoSignChange { .. }) => (None, Some(e.to_string())),
                Err(e) => return Err(e.into()),
            };
            criticals.push(CriticalEntry { quantity: q, predicted: c, bracket, result, note });
        }
    }
    let summary = ExponentsSummary { config: cfg.clone(), series: entries, criticals };
    write_file(
        &cfg.out.join("exponents.json"),
        serde_json::to_string_pretty(&summary)?.as_bytes(),
    )?;
    Ok(summary)
}

pub fn read_report(path: &Path) -> CliResult<DyadicSeriesReport> {
    let text = std::fs::read_to_string(path).map_err(CliError::io(path))?;
    Ok(serde_json::from_str(&text)?)
}

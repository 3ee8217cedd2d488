//! Pointwise evaluation of the extension from a `x,y` CSV.

use std::io::Read;
use std::path::Path;

use cardioid::extension::{Extension, Model};
use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalRecord {
    pub input: [f64; 2],
    pub region: String,
    pub image: [f64; 2],
    /// Row-major `[[du/dx, du/dy], [dv/dx, dv/dy]]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jacobian: Option<[[f64; 2]; 2]>,
    #[serde(rename = "K", default, skip_serializing_if = "Option::is_none")]
    pub k: Option<f64>,
}

/// Parses `x,y` rows; a first row that is not numeric is taken as a header. Blank lines and
/// `#` comments are skipped.
pub fn read_points<R: Read>(input: R, path: &Path) -> CliResult<Vec<(u64, f64, f64)>> {
    let mut rd = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(input);
    let mut out = Vec::new();
    for (i, rec) in rd.records().enumerate() {
        let rec = rec?;
        let line = rec.position().map_or(i as u64 + 1, |p| p.line());
        let bad = |msg: String| CliError::Input { path: path.to_path_buf(), line, msg };
        if rec.len() != 2 {
            return Err(bad(format!("expected 2 fields `x,y`, got {}", rec.len())));
        }
        let parsed = (rec[0].parse::<f64>(), rec[1].parse::<f64>());
        match parsed {
            (Ok(x), Ok(y)) if x.is_finite() && y.is_finite() => out.push((line, x, y)),
            (Ok(_), Ok(_)) => return Err(bad("non-finite coordinate".into())),
            _ if i == 0 && rec[0].parse::<f64>().is_err() && rec[1].parse::<f64>().is_err() => {}
            (Err(e), _) | (_, Err(e)) => return Err(bad(format!("{e}: {:?}", rec.as_slice()))),
        }
    }
    Ok(out)
}

/// `E` at each point, or `f0` for the standard cardioid, in input order.
pub fn evaluate(ext: &Extension<f64>, points: &[(u64, f64, f64)]) -> CliResult<Vec<EvalRecord>> {
    let f0 = matches!(ext.model, Model::StandardCardioid { .. });
    points
        .par_iter()
        .map(|&(line, x, y)| {
            let z = Complex::new(x, y);
            let sample = if f0 { ext.cardioid_f0_jet(z) } else { ext.eval_jet(z) };
            let sample = sample.map_err(|e| CliError::Input {
                path: "<points>".into(),
                line,
                msg: e.to_string(),
            })?;
            let jacobian = sample.jacobian.filter(|d| d.is_finite());
            let det = jacobian.map(|d| d.det());
            Ok(EvalRecord {
                input: [x, y],
                region: sample.region.to_string(),
                image: [sample.image.re, sample.image.im],
                jacobian: jacobian.map(|d| [[d.a11, d.a12], [d.a21, d.a22]]),
                k: jacobian.filter(|_| det.is_some_and(|v| v > 0.0)).map(|d| d.distortion()),
            })
        })
        .collect()
}

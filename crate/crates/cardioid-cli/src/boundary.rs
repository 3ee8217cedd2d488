//! Sampled boundary of `M_s` (or of `Delta_s`) as `branch,u,x,y` rows.

use std::io::{Read, Write};

use cardioid::geometry::{ellm_point, BoundaryCurve, Branch, CuspDegree};
use num_complex::Complex;

use crate::error::{CliError, CliResult};
use crate::fmt_f64;

#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryRow {
    /// `upper`, `lower` or `arc`.
    pub branch: String,
    /// Arc parameter: `u` in `[-1, 0]` on the cusp arcs, `tau` in `[0, 1]` (from `z2` to `z1`) on the closing arc.
    pub u: f64,
    pub x: f64,
    pub y: f64,
}

/// `n` points on each of the two cusp arcs and on the closing arc. With `square` the points are
/// mapped by `z^2` onto the boundary of `Delta_s`.
pub fn boundary_rows(s: f64, n: usize, square: bool) -> CliResult<Vec<BoundaryRow>> {
    if n < 2 {
        return Err(CliError::Config(format!("need n >= 2 boundary points, got {n}")));
    }
    let degree = CuspDegree::new(s)?;
    let curve = BoundaryCurve::new(s)?;
    let map = |z: Complex<f64>| if square { z * z } else { z };
    let step = |k: usize| k as f64 / (n - 1) as f64;
    let mut rows = Vec::with_capacity(3 * n);
    for (name, branch) in [("upper", Branch::Upper), ("lower", Branch::Lower)] {
        for k in 0..n {
            // the last node is exactly the tip
            let u = if k + 1 == n { 0.0 } else { -1.0 + step(k) };
            let z = map(ellm_point(degree, u, branch)?.z());
            rows.push(BoundaryRow { branch: name.into(), u, x: z.re, y: z.im });
        }
    }
    for k in 0..n {
        let tau = step(k);
        let z = map(curve.arc.at(tau));
        rows.push(BoundaryRow { branch: "arc".into(), u: tau, x: z.re, y: z.im });
    }
    Ok(rows)
}

pub fn write_boundary<W: Write>(rows: &[BoundaryRow], out: W) -> CliResult<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["branch", "u", "x", "y"])?;
    for r in rows {
        w.write_record([r.branch.clone(), fmt_f64(r.u), fmt_f64(r.x), fmt_f64(r.y)])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn read_boundary<R: Read>(input: R) -> CliResult<Vec<BoundaryRow>> {
    let mut rd = csv::Reader::from_reader(input);
    let mut rows = Vec::new();
    for (i, rec) in rd.records().enumerate() {
        let line = i as u64 + 2;
        let bad = |msg: String| CliError::Input { path: "<boundary>".into(), line, msg };
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        if rec.len() != 4 {
            return Err(bad(format!("expected 4 fields, got {}", rec.len())));
        }
        let num = |k: usize| {
            rec[k]
                .trim()
                .parse::<f64>()
                .map_err(|e| bad(format!("field {k}: {e}")))
        };
        rows.push(BoundaryRow { branch: rec[0].to_string(), u: num(1)?, x: num(2)?, y: num(3)? });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn endpoints_meet() {
        let rows = boundary_rows(1.5, 64, false).unwrap();
        let first = |b: &str| rows.iter().find(|r| r.branch == b).unwrap().clone();
        let last = |b: &str| rows.iter().rev().find(|r| r.branch == b).unwrap().clone();
        let (up, lo, a0, a1) = (first("upper"), first("lower"), first("arc"), last("arc"));
        assert!((a1.x - up.x).abs() < 1e-12 && (a1.y - up.y).abs() < 1e-12);
        assert!((a0.x - lo.x).abs() < 1e-12 && (a0.y - lo.y).abs() < 1e-12);
        assert_eq!((last("upper").x, last("upper").y), (0.0, 0.0));
    }

    #[test]
    fn squared_arcs_are_the_cusp() {
        for r in boundary_rows(2.0, 33, true).unwrap() {
            if r.branch != "arc" {
                let h = (-r.u).powf(2.0);
                assert!((r.x - r.u).abs() < 1e-14);
                assert!((r.y.abs() - h).abs() < 1e-14);
            }
        }
    }
}

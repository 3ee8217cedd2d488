//! Structural checks of an assembled extension: boundary compatibility, continuity across
//! cell and trapezoid interfaces, analytic against finite-difference Jacobians, positivity
//! of the Jacobian, and injectivity of the piecewise-linear image of a grid.

use num_complex::Complex;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cusp::CuspProfile;
use crate::error::Result;
use crate::extension::{CellMap, Construction, Extension, Model};
use crate::geometry::polygon_is_simple;
use crate::jacobian::Jacobian;
use crate::numdiff::jacobian_fd;
use crate::squeeze::{Piece, SqueezedCell, TrapezoidDecomposition};

/// `delta` used where finite differences need the trapezoids resolved in double precision.
pub const FD_DELTA: f64 = 0.05;

/// Finite-difference step on the cells, relative to the cell width `sigma`.
pub const FD_STEP: f64 = 1e-4;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub measured: f64,
    pub tolerance: f64,
    pub samples: usize,
    pub pass: bool,
}

impl CheckResult {
    /// Passes when `measured <= tolerance`.
    pub fn at_most(name: &str, measured: f64, tolerance: f64, samples: usize) -> Self {
        Self {
            name: name.into(),
            measured,
            tolerance,
            samples,
            pass: measured <= tolerance,
        }
    }

    fn at_least(name: &str, measured: f64, bound: f64, samples: usize) -> Self {
        Self {
            name: name.into(),
            measured,
            tolerance: bound,
            samples,
            pass: measured >= bound,
        }
    }
}

/// The cusp profile of the domain itself, independent of the one the cells were built from.
pub fn reference_profile(ext: &Extension<f64>) -> Result<CuspProfile<f64>> {
    match &ext.model {
        Model::CardioidType { boundary } => Ok(boundary.degree.profile()),
        Model::StandardCardioid { local, .. } => CuspProfile::new(1.5, local.c1.sqrt()),
    }
}

fn rel(a: Complex<f64>, b: Complex<f64>) -> f64 {
    (a - b).norm() / b.norm()
}

/// Max relative `|E(z) - z^2| / |z^2|` over the cusp arcs bounding `Omega1`, cells `j0` to
/// `j0 + cells - 1`. The arcs are `sqrt(-X +- i a X^s)` for the reference profile; the cell
/// holding each point is read from `X`, so a mismatched cell profile shows up as an error
/// instead of a relabelling.
pub fn boundary_compatibility(ext: &Extension<f64>, cells: u32, per_cell: usize) -> Result<CheckResult> {
    let prof = reference_profile(ext)?;
    let mut worst: f64 = 0.0;
    let mut n = 0;
    for j in ext.j0..ext.j0 + cells {
        let map = ext.cell_map(j)?;
        let t2 = 0.25f64.powi(j as i32);
        for k in 0..per_cell {
            // X from t^2 down to (t/2)^2, endpoints included
            let x = t2 * 0.25f64.powf(k as f64 / (per_cell - 1) as f64);
            for sign in [1.0, -1.0] {
                let w = Complex::new(-x, sign * prof.height(x));
                let z = w.sqrt();
                let (img, _) = map.forward_clamped(z);
                let e = rel(img, z * z);
                worst = worst.max(if e.is_finite() { e } else { f64::INFINITY });
                n += 1;
            }
        }
    }
    Ok(CheckResult::at_most("boundary_compatibility", worst, 1e-9, n))
}

/// Max relative jump of `E1` across the circles `|z| = L1(j) = L2(j + 1)`.
pub fn dyadic_interfaces(ext: &Extension<f64>, cells: u32, per_circle: usize) -> Result<CheckResult> {
    let mut worst: f64 = 0.0;
    let mut n = 0;
    for j in ext.j0..ext.j0 + cells {
        let (a, b) = (ext.cell_map(j)?, ext.cell_map(j + 1)?);
        let r = a.cell().l1;
        let (ell, _, _) = a.cell().profile.ell_at_radius(r);
        for k in 0..per_circle {
            let th = std::f64::consts::PI + ell * (k as f64 / (per_circle - 1) as f64 - 0.5);
            let z = Complex::from_polar(r, th);
            let (wa, _) = a.forward_clamped(z);
            let (wb, _) = b.forward_clamped(z);
            worst = worst.max(rel(wa, wb));
            n += 1;
        }
    }
    Ok(CheckResult::at_most("dyadic_interface_continuity", worst, 1e-9, n))
}

/// Max relative mismatch of `E` across the outer interfaces: `E1` against `E2` on
/// `|z| = L2(j0)`, and `E2` against `z^2` where the collar meets the conformal part.
pub fn outer_interfaces(ext: &Extension<f64>, samples: usize) -> Result<CheckResult> {
    let mut worst: f64 = 0.0;
    let first = ext.cell_map(ext.j0)?;
    let pi = std::f64::consts::PI;
    for k in 0..samples {
        let u = k as f64 / (samples - 1) as f64;
        let phi = ext.theta_a + (pi - ext.theta_a) * u;
        let z = Complex::from_polar(ext.r_cell, phi);
        worst = worst.max(rel(ext.e2_unchecked(z), first.forward_clamped(z).0));
        let phi = -ext.theta_j + 2.0 * ext.theta_j * u;
        let z = Complex::from_polar(ext.collar_inner(phi), phi);
        worst = worst.max(rel(ext.e2_unchecked(z), z * z));
    }
    Ok(CheckResult::at_most("outer_interface_continuity", worst, 1e-9, 2 * samples))
}

/// Pairs of chart edges that coincide in `R_t`: `(piece, chart(u))` on each side.
type EdgeChart = fn(f64) -> (f64, f64);

const SHARED_EDGES: [(Piece, EdgeChart, Piece, EdgeChart); 8] = [
    (Piece::T0, |u| (2.0 * u - 1.0, 1.0), Piece::T1, |u| (u, 1.0)),
    (Piece::T0, |u| (1.0, 2.0 * u - 1.0), Piece::T2, |u| (u, 1.0)),
    (Piece::T0, |u| (2.0 * u - 1.0, -1.0), Piece::T3, |u| (u, 1.0)),
    (Piece::T0, |u| (-1.0, 2.0 * u - 1.0), Piece::T4, |u| (u, 1.0)),
    (Piece::T1, |u| (1.0, u), Piece::T2, |u| (1.0, u)),
    (Piece::T2, |u| (0.0, u), Piece::T3, |u| (1.0, u)),
    (Piece::T3, |u| (0.0, u), Piece::T4, |u| (0.0, u)),
    (Piece::T4, |u| (1.0, u), Piece::T1, |u| (0.0, u)),
];

/// Max jump of the squeezed `f4^-1` across the internal edges of the decomposition, and
/// against the simple `f4^-1` on the outer edge, relative to the cell length `alpha`.
pub fn trapezoid_jump(d: &TrapezoidDecomposition<f64>, samples: usize) -> Result<f64> {
    let mut jump: f64 = 0.0;
    let mut note = |a: (f64, f64), b: (f64, f64)| {
        jump = jump.max((a.0 - b.0).abs()).max((a.1 - b.1).abs());
    };
    for i in 0..=samples {
        let u = i as f64 / samples as f64;
        for (pa, ea, pb, eb) in SHARED_EDGES {
            let (x, y) = ea(u);
            let a = d.chart(pa, x, y);
            let (x, y) = eb(u);
            let b = d.chart(pb, x, y);
            note(a.p, b.p);
            note(a.q, b.q);
        }
        for piece in [Piece::T1, Piece::T2, Piece::T3, Piece::T4] {
            let c = d.chart(piece, u, 0.0);
            let (q, _) = d.cell.f4_inv(c.p)?;
            note(q, c.q);
        }
    }
    Ok(jump / d.alpha)
}

/// Trapezoid interface continuity over cells `j` and the given `delta` values, plus the
/// `delta` of the extension's own squeeze parameters when it has them.
pub fn trapezoid_interfaces(ext: &Extension<f64>, js: &[u32], deltas: &[f64]) -> Result<CheckResult> {
    let mut worst: f64 = 0.0;
    let mut n = 0;
    for &j in js {
        let cell = ext.cell(j)?;
        let mut ds = Vec::new();
        for &dv in deltas {
            ds.push(TrapezoidDecomposition::with_delta(cell, dv)?);
        }
        if let Construction::Squeezed { params } = ext.construction {
            ds.push(TrapezoidDecomposition::with_params(cell, &params)?);
        }
        for d in &ds {
            worst = worst.max(trapezoid_jump(d, 200)?);
            n += 201 * (SHARED_EDGES.len() + 4);
        }
    }
    Ok(CheckResult::at_most("trapezoid_interface_continuity", worst, 1e-10, n))
}

fn fd_error(analytic: &Jacobian<f64>, fd: &Jacobian<f64>) -> f64 {
    analytic.add(&fd.scale(-1.0)).frobenius() / analytic.frobenius()
}

/// Analytic against Richardson finite-difference Jacobians at `per_piece` random points of
/// every piece: the simple cell map, each squeezed trapezoid (at `FD_DELTA`), the conformal
/// part, and the cusp continuation of `E2`. Returns the worst relative Frobenius error per
/// piece, keyed by piece name.
pub fn jacobian_fd_errors(
    ext: &Extension<f64>,
    js: &[u32],
    per_piece: usize,
    seed: u64,
) -> Result<Vec<(String, f64)>> {
    jacobian_fd_errors_with_step(ext, js, per_piece, seed, FD_STEP)
}

/// As [`jacobian_fd_errors`] with the cell-map difference step `fd_step * sigma`.
pub fn jacobian_fd_errors_with_step(
    ext: &Extension<f64>,
    js: &[u32],
    per_piece: usize,
    seed: u64,
    fd_step: f64,
) -> Result<Vec<(String, f64)>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    let mut simple: f64 = 0.0;
    let mut sq = [0.0f64; 5];
    for &j in js {
        let cell = ext.cell(j)?;
        let h = fd_step * cell.sigma;
        for _ in 0..per_piece {
            let p = (
                cell.l1 + cell.sigma * rng.random_range(0.01..0.99),
                cell.sigma * rng.random_range(-0.49..0.49),
            );
            let (z, _) = cell.g(p)?;
            let (_, an) = cell.forward(z)?;
            let fd = jacobian_fd(|u| Ok(cell.forward(u)?.0), z, h, true)?;
            simple = simple.max(fd_error(&an, &fd));
        }
        let sc = SqueezedCell::from_decomposition(TrapezoidDecomposition::with_delta(cell, FD_DELTA)?);
        let dl = sc.decomposition.delta.value;
        for piece in Piece::ALL {
            let (lo, hi) = piece.chart_range::<f64>();
            let pad = 0.01 * (hi - lo);
            for _ in 0..per_piece {
                let xi = rng.random_range(lo + pad..hi - pad);
                let ze = rng.random_range(lo + pad..hi - pad);
                let jet = sc.jet(piece, xi, ze);
                let an = jet.p.scale(dl.powi(-piece.delta_power()));
                let fd = jacobian_fd(|u| Ok(sc.forward(u)?.0), jet.z, h, true)?;
                sq[piece.index()] = sq[piece.index()].max(fd_error(&an, &fd));
            }
        }
    }
    out.push(("simple_cell".to_string(), simple));
    for piece in Piece::ALL {
        out.push((format!("squeezed_{piece:?}"), sq[piece.index()]));
    }
    let mut conf: f64 = 0.0;
    let mut cont: f64 = 0.0;
    for _ in 0..per_piece {
        let z = Complex::from_polar(rng.random_range(0.05..1.0), rng.random_range(-1.0..1.0));
        let an = ext.eval_jet(z)?.jacobian.unwrap_or_else(|| Jacobian::diag(f64::NAN, f64::NAN));
        let fd = jacobian_fd(|u| Ok(u * u), z, 1e-4, true)?;
        conf = conf.max(fd_error(&an, &fd));
        if ext.r_a > ext.r_cell {
            let r = ext.r_cell + (ext.r_a - ext.r_cell) * rng.random_range(0.01..0.99);
            let gap = std::f64::consts::PI - ext.theta_j;
            let phi = std::f64::consts::PI - gap * rng.random_range(-0.98..0.98);
            let z = Complex::from_polar(r, phi);
            let (_, an) = ext.cusp_map(z);
            let fd = jacobian_fd(|u| Ok(ext.cusp_map(u).0), z, 1e-6 * r, true)?;
            cont = cont.max(fd_error(&an, &fd));
        }
    }
    out.push(("conformal".to_string(), conf));
    if ext.r_a > ext.r_cell {
        out.push(("cusp_continuation".to_string(), cont));
    }
    Ok(out)
}

/// Folds per-piece FD errors into one check.
pub fn jacobian_fd_check(ext: &Extension<f64>, js: &[u32], per_piece: usize, seed: u64) -> Result<CheckResult> {
    let errs = jacobian_fd_errors(ext, js, per_piece, seed)?;
    let worst = errs.iter().map(|e| e.1).fold(0.0, f64::max);
    let n = errs.len() * per_piece * js.len();
    Ok(CheckResult::at_most("jacobian_analytic_vs_fd", worst, 1e-6, n))
}

/// `J > 0` at `cells * per_cell` random points of the cell maps. Squeezed cells use the
/// `delta`-free chart determinant, which has the sign of `J`. Reports `min J / |DF|^2`.
pub fn jacobian_positive(ext: &Extension<f64>, cells: u32, per_cell: usize, seed: u64) -> Result<CheckResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = f64::INFINITY;
    let mut n = 0;
    for j in ext.j0..ext.j0 + cells {
        match ext.cell_map(j)? {
            CellMap::Simple(c) => {
                for _ in 0..per_cell {
                    let p = (
                        c.l1 + c.sigma * rng.random::<f64>(),
                        c.sigma * (rng.random::<f64>() - 0.5),
                    );
                    let (_, d) = c.forward_at_rect(p);
                    worst = worst.min(d.det() / (d.opnorm() * d.opnorm()));
                    n += 1;
                }
            }
            CellMap::Squeezed(sc) => {
                for _ in 0..per_cell {
                    let piece = Piece::ALL[rng.random_range(0..5)];
                    let (lo, hi) = piece.chart_range::<f64>();
                    let xi = rng.random_range(lo..=hi);
                    let ze = rng.random_range(lo..=hi);
                    let jet = sc.jet(piece, xi, ze);
                    let v = jet.jd / (jet.p.opnorm() * jet.p.opnorm());
                    worst = worst.min(if v.is_nan() { -1.0 } else { v });
                    n += 1;
                }
            }
        }
    }
    let mut r = CheckResult::at_least("jacobian_positive", worst, 0.0, n);
    r.pass = worst > 0.0;
    Ok(r)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InjectivityReport {
    pub n: usize,
    pub quads: usize,
    /// Quads whose image is not a positively oriented simple quadrilateral.
    pub flipped_quads: usize,
    /// Triangles of the fixed `(a, b, c), (a, c, d)` split with non-positive image area.
    pub flipped_triangles: usize,
    /// Sum of the signed image areas.
    pub image_area: f64,
    /// Area enclosed by the image of the outer boundary.
    pub boundary_area: f64,
    pub boundary_simple: bool,
}

impl InjectivityReport {
    /// Every quad image positively oriented and simple, and the boundary image simple: the
    /// piecewise-linear image then covers the inside of the boundary exactly once.
    pub fn pass(&self) -> bool {
        self.flipped_quads == 0
            && self.boundary_simple
            && (self.image_area - self.boundary_area).abs() <= 1e-9 * self.boundary_area
    }
}

fn cross(a: Complex<f64>, b: Complex<f64>, c: Complex<f64>) -> f64 {
    let (u, v) = (b - a, c - a);
    u.re * v.im - u.im * v.re
}

/// Images of an `n x n` grid on `[-half, half]^2` under `E`. A quad image is accepted when
/// one of its diagonals splits it into two positively oriented triangles.
pub fn grid_injectivity(ext: &Extension<f64>, n: usize, half: f64) -> Result<InjectivityReport> {
    let node = |i: usize| -half + 2.0 * half * i as f64 / (n - 1) as f64;
    let img = (0..n * n)
        .into_par_iter()
        .map(|q| ext.eval(Complex::new(node(q / n), node(q % n))))
        .collect::<Result<Vec<_>>>()?;
    let at = |i: usize, k: usize| img[i * n + k];
    let (mut flipped_quads, mut flipped_triangles, mut area) = (0, 0, 0.0);
    for i in 0..n - 1 {
        for k in 0..n - 1 {
            let (a, b, c, d) = (at(i, k), at(i + 1, k), at(i + 1, k + 1), at(i, k + 1));
            let (s1, s2) = (cross(a, b, c), cross(a, c, d));
            let fixed = s1 > 0.0 && s2 > 0.0;
            flipped_triangles += (!(s1 > 0.0)) as usize + (!(s2 > 0.0)) as usize;
            if !fixed && !(cross(a, b, d) > 0.0 && cross(b, c, d) > 0.0) {
                flipped_quads += 1;
            }
            area += 0.5 * (s1 + s2);
        }
    }
    let mut ring = Vec::with_capacity(4 * (n - 1));
    ring.extend((0..n - 1).map(|i| at(i, 0)));
    ring.extend((0..n - 1).map(|k| at(n - 1, k)));
    ring.extend((1..n).rev().map(|i| at(i, n - 1)));
    ring.extend((1..n).rev().map(|k| at(0, k)));
    let mut shoelace = 0.0;
    for (i, p) in ring.iter().enumerate() {
        let q = ring[(i + 1) % ring.len()];
        shoelace += p.re * q.im - p.im * q.re;
    }
    Ok(InjectivityReport {
        n,
        quads: (n - 1) * (n - 1),
        flipped_quads,
        flipped_triangles,
        image_area: area,
        boundary_area: 0.5 * shoelace,
        boundary_simple: polygon_is_simple(&ring),
    })
}

/// All structural checks with their default sampling.
pub fn structural_suite(ext: &Extension<f64>) -> Result<Vec<CheckResult>> {
    let inj = grid_injectivity(ext, 256, 2.0)?;
    let mut v = vec![
        boundary_compatibility(ext, 20, 64)?,
        dyadic_interfaces(ext, 20, 64)?,
        outer_interfaces(ext, 400)?,
        trapezoid_interfaces(ext, &[ext.j0, ext.j0 + 3, ext.j0 + 6], &[FD_DELTA, 1e-3])?,
        jacobian_fd_check(ext, &[ext.j0, ext.j0 + 3, ext.j0 + 6], 100, 7)?,
        jacobian_positive(ext, 10, 1000, 11)?,
    ];
    v.push(CheckResult {
        name: "grid_injectivity".into(),
        measured: inj.flipped_quads as f64,
        tolerance: 0.0,
        samples: inj.quads,
        pass: inj.pass(),
    });
    Ok(v)
}

/// A copy of `ext` whose cell maps use the cusp exponent `s + ds`, everything else fixed.
pub fn with_tampered_eta(ext: &Extension<f64>, ds: f64) -> Result<Extension<f64>> {
    let mut t = ext.clone();
    t.profile = CuspProfile::new(ext.profile.s + ds, ext.profile.amplitude)?;
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{ellm_point, Branch, CuspDegree};

    fn ext(s: f64) -> Extension<f64> {
        Extension::cardioid_type(s, 6, Construction::Simple).unwrap()
    }

    #[test]
    fn reference_arcs_are_the_cusp_arcs() {
        let e = ext(1.5);
        let prof = reference_profile(&e).unwrap();
        let deg = CuspDegree::new(1.5).unwrap();
        for k in 1..50 {
            let x = 0.01 * k as f64 / 50.0;
            let z = Complex::new(-x, prof.height(x)).sqrt();
            let m = ellm_point(deg, -x, Branch::Upper).unwrap().z();
            assert!((z - m).norm() <= 1e-14, "{z} {m}");
        }
    }

    #[test]
    fn boundary_check_catches_tampered_eta() {
        let e = ext(1.5);
        let ok = boundary_compatibility(&e, 10, 16).unwrap();
        assert!(ok.pass, "{ok:?}");
        let bad = boundary_compatibility(&with_tampered_eta(&e, 1.0).unwrap(), 10, 16).unwrap();
        assert!(!bad.pass && bad.measured > 1e-3, "{bad:?}");
    }

    #[test]
    fn interfaces() {
        let e = ext(2.0);
        assert!(dyadic_interfaces(&e, 10, 32).unwrap().pass);
        assert!(trapezoid_interfaces(&e, &[6, 9], &[0.05]).unwrap().pass);
    }

    #[test]
    fn fd_errors_small() {
        let e = ext(1.5);
        for (name, err) in jacobian_fd_errors(&e, &[7], 20, 1).unwrap() {
            assert!(err <= 1e-6, "{name}: {err}");
        }
    }

    #[test]
    fn small_grid_injective() {
        let r = grid_injectivity(&ext(1.5), 33, 2.0).unwrap();
        assert!(r.pass(), "{r:?}");
    }
}

//! The test functions behind the necessity bounds, evaluated on the constructed extension:
//! the strip ramp in the target cusp, the weighted-distance function on the source annulus
//! `A_t`, and the oscillation of `E^-1` across vertical cusp segments.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::eikonal::{fast_marching, Grid2};
use super::quad::TensorRule;
use super::series::ols;
use crate::cusp::CuspProfile;
use crate::error::{Error, Result};
use crate::extension::Extension;

/// `int_{(t/2)^2}^{t^2} u^-s du`.
fn ramp_norm(s: f64, t: f64) -> f64 {
    let lo = (t / 2.0).powi(2);
    let hi = t * t;
    (lo.powf(1.0 - s) - hi.powf(1.0 - s)) / (s - 1.0)
}

/// The strip test function on `Omega = {-1 < x1 < 0, |x2| < a |x1|^s}`: `1` for `x1 < -t^2`,
/// `0` for `x1 > -(t/2)^2`, and the normalised `int (-x)^-s` ramp in between. `None` outside
/// `Omega`.
pub fn strip_testfn_v(profile: &CuspProfile<f64>, t: f64, point: (f64, f64)) -> Option<f64> {
    let (x1, x2) = point;
    let u = -x1;
    if !(u > 0.0 && u < 1.0) || x2.abs() >= profile.height(u) {
        return None;
    }
    let s = profile.s;
    if u > t * t {
        return Some(1.0);
    }
    if u < (t / 2.0).powi(2) {
        return Some(0.0);
    }
    let part = (u.powf(1.0 - s) - (t * t).powf(1.0 - s)) / (s - 1.0);
    Some(1.0 - part / ramp_norm(s, t))
}

/// `int_{Q~_t} |Dv|^2` by quadrature over `Q~_t = {-t^2 <= x1 <= -(t/2)^2, |x2| <= a|x1|^s}`
/// in the coordinates `(u, v) = (-x1, x2 / (a u^s))`.
pub fn strip_energy(profile: &CuspProfile<f64>, t: f64, rule: &TensorRule) -> Result<f64> {
    let s = profile.s;
    let n = ramp_norm(s, t);
    let r = rule.integrate(((t / 2.0).powi(2), t * t), (-1.0, 1.0), |u, _| {
        let dv = u.powf(-s) / n;
        dv * dv * profile.height(u)
    })?;
    Ok(r.value)
}

/// Closed form of [`strip_energy`]: `2a / int u^-s`.
pub fn strip_energy_closed(profile: &CuspProfile<f64>, t: f64) -> f64 {
    2.0 * profile.amplitude / ramp_norm(profile.s, t)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StripScaling {
    pub s: f64,
    pub j: Vec<u32>,
    pub energy: Vec<f64>,
    /// OLS slope of `log2 energy` against `j`.
    pub slope_vs_j: f64,
    /// `energy ~ t^exponent`, i.e. `-slope_vs_j`; predicted `2(s-1)`.
    pub exponent: f64,
}

pub fn strip_energy_scaling(
    profile: &CuspProfile<f64>,
    j_min: u32,
    j_max: u32,
    rule: &TensorRule,
) -> Result<StripScaling> {
    let j: Vec<u32> = (j_min..=j_max).collect();
    let energy = j
        .iter()
        .map(|&k| strip_energy(profile, 2f64.powi(-(k as i32)), rule))
        .collect::<Result<Vec<_>>>()?;
    let xs: Vec<f64> = j.iter().map(|&k| k as f64).collect();
    let ys: Vec<f64> = energy.iter().map(|e| e.log2()).collect();
    let (slope, _, _) = ols(&xs, &ys);
    Ok(StripScaling {
        s: profile.s,
        j,
        energy,
        slope_vs_j: slope,
        exponent: -slope,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnnulusParams {
    /// Nodes in `log r`.
    pub n_r: usize,
    /// Nodes in the polar angle (periodic).
    pub n_phi: usize,
}

impl Default for AnnulusParams {
    fn default() -> Self {
        Self { n_r: 257, n_phi: 1024 }
    }
}

/// Weighted distance `v` on `A_t = {L1 <= |z| <= L2}` with `rho = L2 / (L_t |z|)`, seeded on
/// `E~_t = E^-1(E_t)`. Stored on the grid `(log r, phi)`, uniform in `log r` and hence graded
/// towards the inner circle; in these coordinates the eikonal speed is the constant
/// `c = L2 / L_t`.
#[derive(Clone, Debug)]
pub struct AnnulusField {
    pub j: u32,
    pub grid: Grid2,
    pub ln_l1: f64,
    pub l1: f64,
    pub l2: f64,
    /// `dist(E~_t, F~_t)`.
    pub l_t: f64,
    pub c: f64,
    pub values: Vec<f64>,
    /// Per `log r` row, the polar angle of `E~_t` and of `F~_t`.
    pub seed_phi: Vec<f64>,
    pub far_phi: Vec<f64>,
}

fn wrap(a: f64) -> f64 {
    let tau = std::f64::consts::TAU;
    (a + std::f64::consts::PI).rem_euclid(tau) - std::f64::consts::PI
}

impl AnnulusField {
    pub fn phi(&self, k: usize) -> f64 {
        -std::f64::consts::PI + self.grid.h1 * k as f64
    }

    pub fn ln_r(&self, i: usize) -> f64 {
        self.ln_l1 + self.grid.h0 * i as f64
    }

    /// `v` on row `i` at angle `phi`, linear between nodes.
    pub fn value_at(&self, i: usize, phi: f64) -> f64 {
        let x = (wrap(phi) + std::f64::consts::PI) / self.grid.h1;
        let k0 = x.floor() as usize % self.grid.n1;
        let k1 = (k0 + 1) % self.grid.n1;
        let f = x - x.floor();
        let g = &self.grid;
        (1.0 - f) * self.values[g.index(i, k0)] + f * self.values[g.index(i, k1)]
    }

    /// Distance in the flat `(log r, phi)` metric to the sampled seed curve, times `c`; exact
    /// for `v` because the strip is convex in the universal cover.
    pub fn exact_at(&self, i: usize, k: usize) -> f64 {
        let (u, p) = (self.ln_r(i), self.phi(k));
        let mut best = f64::INFINITY;
        for (m, &ps) in self.seed_phi.iter().enumerate() {
            let du = u - self.ln_r(m);
            best = best.min(du.hypot(wrap(p - ps)));
        }
        self.c * best
    }
}

fn boundary_preimage(ext: &Extension<f64>, x: f64, upper: bool) -> Result<Complex<f64>> {
    let h = ext.profile.height(x);
    ext.inverse(Complex::new(-x, if upper { h } else { -h }))
}

pub fn annulus_testfn_v(ext: &Extension<f64>, j: u32, params: &AnnulusParams) -> Result<AnnulusField> {
    if params.n_r < 256 || params.n_phi < 256 {
        return Err(Error::Config(format!(
            "annulus grid {}x{} is below 256^2",
            params.n_r, params.n_phi
        )));
    }
    let cell = ext.cell(j)?;
    let (l1, l2) = (cell.l1, cell.l2);
    let (ln_l1, ln_l2) = (l1.ln(), l2.ln());
    let grid = Grid2 {
        n0: params.n_r,
        n1: params.n_phi,
        h0: (ln_l2 - ln_l1) / (params.n_r - 1) as f64,
        h1: std::f64::consts::TAU / params.n_phi as f64,
        periodic1: true,
    };
    let mut seed_phi = Vec::with_capacity(grid.n0);
    let mut far_phi = Vec::with_capacity(grid.n0);
    let mut e_pts = Vec::with_capacity(grid.n0);
    let mut f_pts = Vec::with_capacity(grid.n0);
    for i in 0..grid.n0 {
        let r = (ln_l1 + grid.h0 * i as f64).exp().clamp(l1, l2);
        let x = ext.profile.eta_inverse(r)?;
        let ze = boundary_preimage(ext, x, false)?;
        let zf = boundary_preimage(ext, x, true)?;
        seed_phi.push(ze.im.atan2(ze.re));
        far_phi.push(zf.im.atan2(zf.re));
        e_pts.push(ze);
        f_pts.push(zf);
    }
    let l_t = e_pts
        .iter()
        .flat_map(|a| f_pts.iter().map(move |b| (a - b).norm()))
        .fold(f64::INFINITY, f64::min);
    let c = l2 / l_t;
    let mut seeds = Vec::new();
    for (i, &ps) in seed_phi.iter().enumerate() {
        let x = (ps + std::f64::consts::PI) / grid.h1;
        let k0 = x.floor() as usize % grid.n1;
        for k in [k0, (k0 + 1) % grid.n1] {
            let p = -std::f64::consts::PI + grid.h1 * k as f64;
            seeds.push((grid.index(i, k), c * wrap(p - ps).abs()));
        }
    }
    let values = fast_marching(&grid, &vec![c; grid.len()], &seeds)?;
    Ok(AnnulusField {
        j,
        grid,
        ln_l1,
        l1,
        l2,
        l_t,
        c,
        values,
        seed_phi,
        far_phi,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnnulusReport {
    pub j: u32,
    pub l1: f64,
    pub l2: f64,
    pub l_t: f64,
    /// `int_{A_t \ M_s} |Dv|^2` from upwind differences of the computed `v`.
    pub energy: f64,
    /// `c^2` times the `(log r, phi)` area of `A_t \ M_s`, the value `|Dv| = rho` gives.
    pub energy_rho: f64,
    /// `energy / log 2`.
    pub constant: f64,
    pub min_v_on_far_arc: f64,
    pub max_seed_value: f64,
    /// Largest deviation from the exact flat distance (sampled every 4th node).
    pub max_error: f64,
}

pub fn annulus_energy(ext: &Extension<f64>, j: u32, params: &AnnulusParams) -> Result<AnnulusReport> {
    let fld = annulus_testfn_v(ext, j, params)?;
    let g = &fld.grid;
    let v = &fld.values;
    let mut energy = 0.0;
    let mut area = 0.0;
    for i in 0..g.n0 {
        let wi = if i == 0 || i + 1 == g.n0 { 0.5 } else { 1.0 };
        let gap = fld.far_phi[i].abs();
        for k in 0..g.n1 {
            if fld.phi(k).abs() < gap {
                continue;
            }
            let at = |ii: usize, kk: usize| v[g.index(ii, kk)];
            let c0 = at(i, k);
            let dm = if i > 0 { (c0 - at(i - 1, k)) / g.h0 } else { 0.0 };
            let dp = if i + 1 < g.n0 { (at(i + 1, k) - c0) / g.h0 } else { 0.0 };
            let du = dm.max(0.0).max(-dp.min(0.0));
            let km = (k + g.n1 - 1) % g.n1;
            let kp = (k + 1) % g.n1;
            let pm = (c0 - at(i, km)) / g.h1;
            let pp = (at(i, kp) - c0) / g.h1;
            let dphi = pm.max(0.0).max(-pp.min(0.0));
            energy += wi * (du * du + dphi * dphi) * g.h0 * g.h1;
            area += wi * g.h0 * g.h1;
        }
    }
    let min_far = (0..g.n0)
        .map(|i| fld.value_at(i, fld.far_phi[i]))
        .fold(f64::INFINITY, f64::min);
    let max_seed = (0..g.n0)
        .map(|i| fld.value_at(i, fld.seed_phi[i]))
        .fold(0.0, f64::max);
    let mut max_error: f64 = 0.0;
    for i in (0..g.n0).step_by(4) {
        for k in (0..g.n1).step_by(4) {
            max_error = max_error.max((v[g.index(i, k)] - fld.exact_at(i, k)).abs());
        }
    }
    Ok(AnnulusReport {
        j,
        l1: fld.l1,
        l2: fld.l2,
        l_t: fld.l_t,
        energy,
        energy_rho: fld.c * fld.c * area,
        constant: energy / std::f64::consts::LN_2,
        min_v_on_far_arc: min_far,
        max_seed_value: max_seed,
        max_error,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OscillationReport {
    pub j: Vec<u32>,
    /// `x = -2^-2j`.
    pub x: Vec<f64>,
    /// Diameter of `E^-1(I_x)`.
    pub osc: Vec<f64>,
    /// `osc (-x)^-1/2`.
    pub ratio: Vec<f64>,
    pub max_over_min: f64,
}

/// Oscillation of `E^-1` over the vertical segments `I_x` of the cusp at `x = -2^-2j`,
/// sampled at `samples` points.
pub fn oscillation_check(
    ext: &Extension<f64>,
    j_min: u32,
    j_max: u32,
    samples: usize,
) -> Result<OscillationReport> {
    if samples < 2 {
        return Err(Error::Config("need at least two samples per segment".into()));
    }
    let mut rep = OscillationReport {
        j: Vec::new(),
        x: Vec::new(),
        osc: Vec::new(),
        ratio: Vec::new(),
        max_over_min: 0.0,
    };
    for j in j_min..=j_max {
        let u = 2f64.powi(-2 * j as i32);
        let h = ext.profile.height(u);
        let pts = (0..samples)
            .map(|k| {
                let y = -h + 2.0 * h * k as f64 / (samples - 1) as f64;
                ext.inverse(Complex::new(-u, y))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut d: f64 = 0.0;
        for (a, p) in pts.iter().enumerate() {
            for q in &pts[a + 1..] {
                d = d.max((p - q).norm());
            }
        }
        rep.j.push(j);
        rep.x.push(-u);
        rep.osc.push(d);
        rep.ratio.push(d / u.sqrt());
    }
    let mx = rep.ratio.iter().copied().fold(0.0, f64::max);
    let mn = rep.ratio.iter().copied().fold(f64::INFINITY, f64::min);
    rep.max_over_min = mx / mn;
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::quad::QuadParams;
    use crate::extension::Construction;

    fn prof(s: f64) -> CuspProfile<f64> {
        CuspProfile::unit(s).unwrap()
    }

    #[test]
    fn strip_values() {
        let p = prof(1.5);
        let t = 1.0 / 64.0;
        assert_eq!(strip_testfn_v(&p, t, (-0.5, 0.0)), Some(1.0));
        assert_eq!(strip_testfn_v(&p, t, (-1e-6, 0.0)), Some(0.0));
        assert!((strip_testfn_v(&p, t, (-t * t, 0.0)).unwrap() - 1.0).abs() < 1e-12);
        assert!(strip_testfn_v(&p, t, (-(t / 2.0).powi(2), 0.0)).unwrap().abs() < 1e-12);
        assert_eq!(strip_testfn_v(&p, t, (-0.01, 0.5)), None);
    }

    #[test]
    fn strip_energy_matches_closed_form() {
        let rule = TensorRule::new(QuadParams::default()).unwrap();
        for s in [1.5, 2.0] {
            let t = 2f64.powi(-7);
            let e = strip_energy(&prof(s), t, &rule).unwrap();
            assert!((e / strip_energy_closed(&prof(s), t) - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn annulus_small_grid_is_consistent() {
        let ext = Extension::cardioid_type(1.5, 6, Construction::Simple).unwrap();
        let rep = annulus_energy(&ext, 7, &AnnulusParams { n_r: 256, n_phi: 512 }).unwrap();
        assert!(rep.min_v_on_far_arc >= 1.0);
        assert!(rep.max_seed_value < 0.05);
        assert!(rep.max_error < 0.05 * rep.min_v_on_far_arc, "{rep:?}");
        assert!((rep.energy / rep.energy_rho - 1.0).abs() < 0.05, "{rep:?}");
    }

    #[test]
    fn oscillation_two_sided() {
        let ext = Extension::cardioid_type(1.5, 6, Construction::Simple).unwrap();
        let rep = oscillation_check(&ext, 6, 8, 33).unwrap();
        assert!(rep.max_over_min < 4.0);
        assert!(rep.ratio.iter().all(|r| *r > 1.0 && *r < 3.0), "{rep:?}");
    }
}

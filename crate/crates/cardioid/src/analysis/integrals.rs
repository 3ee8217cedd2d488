//! Pointwise distortion and per-cell integrals of the distortion quantities.
//!
//! Integrals are returned as logarithms: on squeezed cells the integrand carries a factor
//! `delta^k` that is far below the `f64` range for exp-mode cells beyond `j ~ 10`, so each
//! piece is integrated in its `delta`-free chart and the power of `delta` is added in log form.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::quad::{log_sum_exp, TensorRule};
use crate::cusp::CellScale;
use crate::error::{Error, Result};
use crate::extension::CellMap;
use crate::jacobian::Jacobian;
use crate::squeeze::{Piece, SqueezedCell};

/// The integrated quantities: `K^q` of `E` and of `E^-1`, `|DE|^p`, `|DE^-1|^p` and `J_E`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Quantity {
    #[serde(rename = "Kf")]
    Kf,
    #[serde(rename = "Kfinv")]
    Kfinv,
    #[serde(rename = "Df")]
    Df,
    #[serde(rename = "Dfinv")]
    Dfinv,
    #[serde(rename = "J")]
    Jac,
}

impl Quantity {
    pub const ALL: [Quantity; 5] = [
        Quantity::Kf,
        Quantity::Kfinv,
        Quantity::Df,
        Quantity::Dfinv,
        Quantity::Jac,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Quantity::Kf => "Kf",
            Quantity::Kfinv => "Kfinv",
            Quantity::Df => "Df",
            Quantity::Dfinv => "Dfinv",
            Quantity::Jac => "J",
        }
    }

    /// Integrated over the target cell `Q~_t` rather than `Q_t`.
    pub fn on_target(self) -> bool {
        matches!(self, Quantity::Kfinv | Quantity::Dfinv)
    }

    /// Value per unit source area at a point where `DF = d` (inverse quantities pulled back:
    /// `K_{F^-1}(F z) = K_F(z)`, `|DF^-1|(F z) = |DF(z)| / J_F(z)`, times `J_F`).
    pub fn source_density(self, exponent: f64, d: &Jacobian<f64>) -> f64 {
        match self {
            Quantity::Kf => d.distortion().powf(exponent),
            Quantity::Df => d.opnorm().powf(exponent),
            Quantity::Jac => d.det().abs(),
            Quantity::Kfinv => {
                let det = d.det().abs();
                d.distortion().powf(exponent) * det
            }
            Quantity::Dfinv => {
                let det = d.det().abs();
                (d.opnorm() / det).powf(exponent) * det
            }
        }
    }

    /// Value per unit target area where `DF^-1 = g` (only for the inverse quantities).
    fn target_density(self, exponent: f64, g: &Jacobian<f64>) -> f64 {
        match self {
            Quantity::Kfinv => g.distortion().powf(exponent),
            Quantity::Dfinv => g.opnorm().powf(exponent),
            _ => unreachable!("target density of a forward quantity"),
        }
    }

    /// Chart integrand on a squeezed piece and the power of `delta` multiplying it, given
    /// `DF = P / delta^k`, `J_F = jd / delta^k`, `dz = W delta^k`.
    fn chart_density(self, e: f64, k: i32, p: &Jacobian<f64>, jd: f64, w: f64) -> (f64, f64) {
        let k = k as f64;
        let n = p.opnorm();
        let kk = n / jd * n;
        match self {
            Quantity::Kf => (kk.powf(e) * w, k * (1.0 - e)),
            Quantity::Df => (n.powf(e) * w, k * (1.0 - e)),
            Quantity::Jac => (jd * w, 0.0),
            Quantity::Kfinv => (kk.powf(e) * jd * w, -k * e),
            Quantity::Dfinv => ((n / jd).powf(e) * jd * w, 0.0),
        }
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Quantity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "Kf" => Ok(Quantity::Kf),
            "Kfinv" => Ok(Quantity::Kfinv),
            "Df" => Ok(Quantity::Df),
            "Dfinv" => Ok(Quantity::Dfinv),
            "J" | "Jac" => Ok(Quantity::Jac),
            _ => Err(Error::Config(format!(
                "unknown quantity {s:?} (expected Kf, Kfinv, Df, Dfinv or J)"
            ))),
        }
    }
}

/// Distortion data of a map at one point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistortionSample {
    pub point: (f64, f64),
    pub jac: Jacobian<f64>,
    pub opnorm: f64,
    pub det: f64,
    /// `opnorm^2 / det` for `det > 0`, `1` for `det = 0`; `inf` for `det < 0`.
    #[serde(rename = "K")]
    pub k: f64,
}

impl DistortionSample {
    pub fn new(point: Complex<f64>, jac: Jacobian<f64>) -> Self {
        let det = jac.det();
        let opnorm = jac.opnorm();
        let k = if det > 0.0 {
            opnorm / det * opnorm
        } else if det == 0.0 {
            1.0
        } else {
            f64::INFINITY
        };
        Self {
            point: (point.re, point.im),
            jac,
            opnorm,
            det,
            k,
        }
    }

    /// `sigma_max / sigma_min` from the singular values, for cross-checking `k`.
    pub fn singular_ratio(&self) -> f64 {
        let (a, b) = self.jac.singular_values();
        a / b
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellIntegral {
    pub j: u32,
    pub ln_value: f64,
    pub evaluations: usize,
    pub converged: bool,
}

impl CellIntegral {
    pub fn value(&self) -> f64 {
        self.ln_value.exp()
    }

    pub fn log2_value(&self) -> f64 {
        self.ln_value / std::f64::consts::LN_2
    }
}

fn cell_j(c: &CellScale<f64>) -> u32 {
    (-c.t.log2()).round() as u32
}

fn finish(c: &CellScale<f64>, ln: f64, evaluations: usize, converged: bool) -> Result<CellIntegral> {
    if ln.is_nan() {
        return Err(Error::Quadrature(format!("NaN integral on the cell t = {}", c.t)));
    }
    Ok(CellIntegral {
        j: cell_j(c),
        ln_value: ln,
        evaluations,
        converged,
    })
}

/// `F_t` at a point of `R_t` with `DF` and `|Dg|`, for the simple cell.
fn simple_at_rect(c: &CellScale<f64>, p: (f64, f64)) -> (Jacobian<f64>, f64) {
    let big_x = c.profile.eta_inverse_unchecked(p.0);
    let (_, dg) = c.g_from_x(p, big_x);
    let (q, df4i) = c.f4_inv_from_x(big_x, p.1);
    let (_, df3i) = c.f3_inv_unchecked(q);
    let dgi = dg.inverse().unwrap_or_else(|| Jacobian::diag(f64::NAN, f64::NAN));
    (df3i * df4i * dgi, dg.det().abs())
}

/// `int_{Q_t}` (or `int_{Q~_t}` for inverse quantities) of `quantity^exponent` for one cell.
///
/// Simple cells: forward quantities in the polar rectangle `R_t` of `Q_t`, inverse ones in
/// `R~_t` through the analytic `F_t^-1`. Squeezed cells: piecewise in the trapezoid charts,
/// inverse quantities pulled back to `Q_t` (exact for the piecewise diffeomorphism).
pub fn cell_integral(
    map: &CellMap<f64>,
    quantity: Quantity,
    exponent: f64,
    rule: &TensorRule,
) -> Result<CellIntegral> {
    match map {
        CellMap::Simple(c) => {
            if quantity.on_target() {
                simple_target(c, quantity, exponent, rule)
            } else {
                simple_source(c, quantity, exponent, rule)
            }
        }
        CellMap::Squeezed(sq) => squeezed(sq, quantity, exponent, rule),
    }
}

fn simple_source(c: &CellScale<f64>, q: Quantity, e: f64, rule: &TensorRule) -> Result<CellIntegral> {
    let h = c.sigma / 2.0;
    let r = rule.integrate((c.l1, c.l2), (-h, h), |x, y| {
        let (d, jg) = simple_at_rect(c, (x, y));
        q.source_density(e, &d) * jg
    })?;
    finish(c, r.value.ln(), r.evaluations, r.converged)
}

fn simple_target(c: &CellScale<f64>, q: Quantity, e: f64, rule: &TensorRule) -> Result<CellIntegral> {
    let h = c.beta() / 2.0;
    let r = rule.integrate((c.x_lo(), c.x_hi()), (-h, h), |x, y| {
        let (_, df3i) = c.f3_inv_unchecked((x, y));
        let df3 = df3i.inverse().unwrap_or_else(|| Jacobian::diag(f64::NAN, f64::NAN));
        let (_, g) = c.inverse_at_target_rect((x, y), df3);
        q.target_density(e, &g) * df3i.det().abs()
    })?;
    finish(c, r.value.ln(), r.evaluations, r.converged)
}

/// Inverse quantities of a simple cell by pull-back to `R_t`, for cross-checking the target
/// route.
pub fn cell_integral_pullback(
    c: &CellScale<f64>,
    quantity: Quantity,
    exponent: f64,
    rule: &TensorRule,
) -> Result<CellIntegral> {
    simple_source(c, quantity, exponent, rule)
}

/// Per-piece logs `ln int` for a squeezed cell, `delta` powers included.
pub fn squeezed_pieces(
    sq: &SqueezedCell<f64>,
    quantity: Quantity,
    exponent: f64,
    rule: &TensorRule,
) -> Result<[(f64, usize, bool); 5]> {
    let ln_delta = sq.decomposition.delta.ln;
    let mut out = [(0.0, 0, true); 5];
    for piece in Piece::ALL {
        let (lo, hi) = piece.chart_range::<f64>();
        let k = piece.delta_power();
        let mut power = 0.0;
        let r = rule.integrate((lo, hi), (lo, hi), |xi, zeta| {
            let jet = sq.jet(piece, xi, zeta);
            let (v, pw) = quantity.chart_density(exponent, k, &jet.p, jet.jd, jet.weight);
            power = pw;
            v
        })?;
        out[piece.index()] = (r.value.ln() + power * ln_delta, r.evaluations, r.converged);
    }
    Ok(out)
}

fn squeezed(sq: &SqueezedCell<f64>, q: Quantity, e: f64, rule: &TensorRule) -> Result<CellIntegral> {
    let pieces = squeezed_pieces(sq, q, e, rule)?;
    let lns: Vec<f64> = pieces.iter().map(|p| p.0).collect();
    let evals = pieces.iter().map(|p| p.1).sum();
    let conv = pieces.iter().all(|p| p.2);
    finish(sq.cell(), log_sum_exp(&lns), evals, conv)
}

/// Cell integral with the Jacobian supplied pointwise by `jet` at points of `Q_t`, e.g. through
/// the global dispatch of `E` or of the cardioid map `f0`. Inverse quantities are pulled back.
pub fn cell_integral_pointwise<F>(
    c: &CellScale<f64>,
    quantity: Quantity,
    exponent: f64,
    rule: &TensorRule,
    jet: F,
) -> Result<CellIntegral>
where
    F: Fn(Complex<f64>) -> Result<Jacobian<f64>>,
{
    let h = c.sigma / 2.0;
    let mut failure = None;
    let r = rule.integrate((c.l1, c.l2), (-h, h), |x, y| {
        let big_x = c.profile.eta_inverse_unchecked(x);
        let (z, dg) = c.g_from_x((x, y), big_x);
        match jet(z) {
            Ok(d) => quantity.source_density(exponent, &d) * dg.det().abs(),
            Err(e) => {
                failure.get_or_insert(e);
                f64::NAN
            }
        }
    });
    if let Some(e) = failure {
        return Err(e);
    }
    let r = r?;
    finish(c, r.value.ln(), r.evaluations, r.converged)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::quad::QuadParams;
    use crate::cusp::CuspProfile;
    use crate::squeeze::SqueezeParams;

    fn rule() -> TensorRule {
        TensorRule::new(QuadParams::default()).unwrap()
    }

    fn cell(j: u32) -> CellScale<f64> {
        CellScale::dyadic(CuspProfile::unit(1.5).unwrap(), j).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn areas_and_transport() {
        let c = cell(7);
        let m = CellMap::Simple(c);
        // q = 0 gives the source area; |J| gives the target area
        let area_q = cell_integral(&m, Quantity::Kf, 0.0, &rule()).unwrap().value();
        let area_polar = {
            let pts = super::super::quad::gauss_legendre_1d(40, c.l1, c.l2).unwrap();
            pts.iter().map(|(r, w)| w * r * c.profile.ell_at_radius(*r).0).sum::<f64>()
        };
        assert!(rel(area_q, area_polar) < 1e-9, "{area_q} {area_polar}");
        let jac = cell_integral(&m, Quantity::Jac, 1.0, &rule()).unwrap().value();
        assert!(rel(jac, c.cusp_cell_area()) < 1e-8);
        let inv0 = cell_integral(&m, Quantity::Kfinv, 0.0, &rule()).unwrap().value();
        assert!(rel(inv0, c.cusp_cell_area()) < 1e-8);
    }

    #[test]
    fn target_route_matches_pullback() {
        for j in [6, 9] {
            let c = cell(j);
            for (q, e) in [(Quantity::Kfinv, 3.0), (Quantity::Dfinv, 2.5)] {
                let a = cell_integral(&CellMap::Simple(c), q, e, &rule()).unwrap();
                let b = cell_integral_pullback(&c, q, e, &rule()).unwrap();
                assert!((a.ln_value - b.ln_value).abs() < 1e-6, "{j} {q} {a:?} {b:?}");
            }
        }
    }

    /// `int |DF|^e` over one source piece through a bilinear parametrisation of its polygon and
    /// the direct (locate + map A/B/C) evaluation of `F_t`.
    fn piece_by_polygon(sq: &SqueezedCell<f64>, k: usize, e: f64) -> f64 {
        let v = sq.decomposition.source_polygons()[k];
        let c = sq.cell();
        let r = rule()
            .integrate((0.0, 1.0), (0.0, 1.0), |u, w| {
                let p = v[0] * ((1.0 - u) * (1.0 - w))
                    + v[1] * (u * (1.0 - w))
                    + v[2] * (u * w)
                    + v[3] * ((1.0 - u) * w);
                let pu = (v[1] - v[0]) * (1.0 - w) + (v[2] - v[3]) * w;
                let pw = (v[3] - v[0]) * (1.0 - u) + (v[2] - v[1]) * u;
                let jb = (pu.re * pw.im - pu.im * pw.re).abs();
                let (_, d) = sq.forward_at_rect((p.re, p.im));
                let (_, dg) = c.g((p.re, p.im)).unwrap();
                d.opnorm().powf(e) * dg.det().abs() * jb
            })
            .unwrap();
        r.value
    }

    #[test]
    fn squeezed_charts_match_direct_maps_with_moderate_delta() {
        let c = cell(6);
        let d = crate::squeeze::TrapezoidDecomposition::with_delta(c, 0.1).unwrap();
        let sq = SqueezedCell::from_decomposition(d);
        for e in [1.0, 2.0] {
            let pieces = squeezed_pieces(&sq, Quantity::Df, e, &rule()).unwrap();
            for (k, piece) in pieces.iter().enumerate() {
                let direct = piece_by_polygon(&sq, k, e);
                assert!((piece.0 - direct.ln()).abs() < 1e-7, "T{k} e={e}: {} vs {}", piece.0, direct.ln());
            }
        }
        let jac = cell_integral(&CellMap::Squeezed(sq), Quantity::Jac, 1.0, &rule()).unwrap();
        assert!((jac.ln_value - c.cusp_cell_area().ln()).abs() < 1e-8);
        let area = cell_integral(&CellMap::Squeezed(sq), Quantity::Kf, 0.0, &rule()).unwrap();
        let simple = cell_integral(&CellMap::Simple(c), Quantity::Kf, 0.0, &rule()).unwrap();
        assert!((area.ln_value - simple.ln_value).abs() < 1e-8);
    }

    #[test]
    fn pointwise_route_matches_simple_cells() {
        let c = cell(8);
        for (q, e) in [(Quantity::Kf, 2.0), (Quantity::Dfinv, 2.5), (Quantity::Kfinv, 5.0)] {
            let a = cell_integral(&CellMap::Simple(c), q, e, &rule()).unwrap();
            let b = cell_integral_pointwise(&c, q, e, &rule(), |z| Ok(c.forward(z)?.1)).unwrap();
            assert!((a.ln_value - b.ln_value).abs() < 1e-6, "{q}");
        }
    }

    #[test]
    fn exp_mode_is_finite_in_logs() {
        let sq = SqueezedCell::new(cell(12), &SqueezeParams::exp()).unwrap();
        let m = CellMap::Squeezed(sq);
        let k = cell_integral(&m, Quantity::Kf, 0.9, &rule()).unwrap();
        assert!(k.ln_value.is_finite());
        let jac = cell_integral(&m, Quantity::Jac, 1.0, &rule()).unwrap();
        assert!((jac.value() / cell(12).cusp_cell_area() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn distortion_sample() {
        let s = DistortionSample::new(Complex::new(0.0, 0.0), Jacobian::new(3.0, 1.0, 0.5, 2.0));
        assert!((s.k - s.singular_ratio()).abs() < 1e-12 * s.k);
        assert!(s.k >= 1.0);
        let z = DistortionSample::new(Complex::new(0.0, 0.0), Jacobian::diag(1.0, 0.0));
        assert_eq!(z.k, 1.0);
    }
}

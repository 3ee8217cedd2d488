//! Adaptive tensor-product Gauss–Legendre quadrature on rectangles.

use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadParams {
    /// Gauss–Legendre points per direction.
    pub order: usize,
    /// The rectangle is first cut into `base x base` tiles.
    pub base: usize,
    /// A tile is accepted once bisecting it changes the estimate by less than this fraction
    /// (of the tile value, or of its share of the coarse total). Tiles are bisected across
    /// whichever axis changes the estimate more.
    pub rel_tol: f64,
    /// Maximum number of bisections of a base tile. Tiles stopped here still count as converged
    /// when the summed difference estimate of the whole integral is within `rel_tol`
    /// (integrable edge singularities never meet the per-tile test).
    pub max_depth: u32,
    /// Refinement stops (unconverged) after this many integrand evaluations.
    pub max_evaluations: usize,
}

impl Default for QuadParams {
    fn default() -> Self {
        Self {
            order: 8,
            base: 2,
            rel_tol: 1e-6,
            max_depth: 48,
            max_evaluations: 20_000_000,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadResult {
    pub value: f64,
    /// Sum of the accepted `|bisected - parent|` differences.
    pub error: f64,
    pub evaluations: usize,
    pub converged: bool,
}

/// A tensor rule prepared once and reused over many rectangles.
#[derive(Clone, Debug)]
pub struct TensorRule {
    params: QuadParams,
    nodes: Vec<(f64, f64)>,
}

#[derive(Clone, Copy)]
struct Rect {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Rect {
    fn area(&self) -> f64 {
        (self.x1 - self.x0) * (self.y1 - self.y0)
    }

    fn split_x(&self) -> [Rect; 2] {
        let xm = 0.5 * (self.x0 + self.x1);
        [Rect { x1: xm, ..*self }, Rect { x0: xm, ..*self }]
    }

    fn split_y(&self) -> [Rect; 2] {
        let ym = 0.5 * (self.y0 + self.y1);
        [Rect { y1: ym, ..*self }, Rect { y0: ym, ..*self }]
    }
}

struct Acc {
    error: f64,
    evaluations: usize,
    converged: bool,
    depth_capped: bool,
}

impl TensorRule {
    pub fn new(params: QuadParams) -> Result<Self> {
        let order = NonZeroUsize::new(params.order)
            .filter(|n| n.get() <= 64)
            .ok_or_else(|| Error::Config(format!("quadrature order {} not in 1..=64", params.order)))?;
        if params.base == 0 || !(params.rel_tol > 0.0) {
            return Err(Error::Config("quadrature base must be >= 1 and rel_tol > 0".into()));
        }
        let nodes = GaussLegendre::new(order).as_node_weight_pairs().to_vec();
        Ok(Self { params, nodes })
    }

    pub fn params(&self) -> &QuadParams {
        &self.params
    }

    fn apply<F: FnMut(f64, f64) -> f64>(&self, r: &Rect, f: &mut F, acc: &mut Acc) -> f64 {
        let hx = 0.5 * (r.x1 - r.x0);
        let hy = 0.5 * (r.y1 - r.y0);
        let cx = 0.5 * (r.x1 + r.x0);
        let cy = 0.5 * (r.y1 + r.y0);
        let mut sum = 0.0;
        for &(u, wu) in &self.nodes {
            let x = cx + hx * u;
            let mut row = 0.0;
            for &(v, wv) in &self.nodes {
                row += wv * f(x, cy + hy * v);
            }
            sum += wu * row;
        }
        acc.evaluations += self.nodes.len() * self.nodes.len();
        sum * hx * hy
    }

    fn refine<F: FnMut(f64, f64) -> f64>(
        &self,
        r: Rect,
        parent: f64,
        floor_density: f64,
        depth: u32,
        f: &mut F,
        acc: &mut Acc,
    ) -> f64 {
        let [x0, x1] = r.split_x();
        let [y0, y1] = r.split_y();
        let vx = [self.apply(&x0, f, acc), self.apply(&x1, f, acc)];
        let vy = [self.apply(&y0, f, acc), self.apply(&y1, f, acc)];
        let (sx, sy) = (vx[0] + vx[1], vy[0] + vy[1]);
        let (dx, dy) = ((sx - parent).abs(), (sy - parent).abs());
        // refine across the direction in which the integrand changes most
        let (kids, vals, sum, diff) = if dx >= dy {
            ([x0, x1], vx, sx, dx)
        } else {
            ([y0, y1], vy, sy, dy)
        };
        let tol = self.params.rel_tol * sum.abs().max(floor_density * r.area());
        if diff <= tol || !diff.is_finite() {
            acc.error += diff;
            return sum;
        }
        if acc.evaluations >= self.params.max_evaluations {
            acc.converged = false;
            acc.error += diff;
            return sum;
        }
        if depth >= self.params.max_depth {
            acc.depth_capped = true;
            acc.error += diff;
            return sum;
        }
        let mut total = 0.0;
        for (k, v) in kids.into_iter().zip(vals) {
            total += self.refine(k, v, floor_density, depth + 1, f, acc);
        }
        total
    }

    /// Integral of `f` over `[x0, x1] x [y0, y1]`. Non-finite values are an error.
    pub fn integrate<F: FnMut(f64, f64) -> f64>(
        &self,
        x: (f64, f64),
        y: (f64, f64),
        mut f: F,
    ) -> Result<QuadResult> {
        let whole = Rect { x0: x.0, x1: x.1, y0: y.0, y1: y.1 };
        let area = whole.area();
        if !(area.abs() > 0.0) || !area.is_finite() {
            return Err(Error::Quadrature(format!("empty rectangle {x:?} x {y:?}")));
        }
        let n = self.params.base;
        let mut tiles = Vec::with_capacity(n * n);
        for i in 0..n {
            for k in 0..n {
                let fx = |a: usize| x.0 + (x.1 - x.0) * a as f64 / n as f64;
                let fy = |a: usize| y.0 + (y.1 - y.0) * a as f64 / n as f64;
                tiles.push(Rect { x0: fx(i), x1: fx(i + 1), y0: fy(k), y1: fy(k + 1) });
            }
        }
        let mut acc = Acc { error: 0.0, evaluations: 0, converged: true, depth_capped: false };
        let coarse: Vec<f64> = tiles.iter().map(|t| self.apply(t, &mut f, &mut acc)).collect();
        let total: f64 = coarse.iter().sum();
        if !total.is_finite() {
            return Err(Error::Quadrature(format!("non-finite integrand on {x:?} x {y:?}")));
        }
        let floor_density = total.abs() / area.abs();
        let mut value = 0.0;
        for (t, c) in tiles.into_iter().zip(coarse) {
            value += self.refine(t, c, floor_density, 1, &mut f, &mut acc);
        }
        if !value.is_finite() {
            return Err(Error::Quadrature(format!("non-finite integrand on {x:?} x {y:?}")));
        }
        let capped_ok = !acc.depth_capped || acc.error <= self.params.rel_tol * value.abs();
        Ok(QuadResult {
            value,
            error: acc.error,
            evaluations: acc.evaluations,
            converged: acc.converged && capped_ok,
        })
    }
}

/// Gauss–Legendre nodes and weights on `[a, b]`.
pub fn gauss_legendre_1d(order: usize, a: f64, b: f64) -> Result<Vec<(f64, f64)>> {
    let n = NonZeroUsize::new(order).ok_or_else(|| Error::Config("order must be >= 1".into()))?;
    let h = 0.5 * (b - a);
    let c = 0.5 * (b + a);
    Ok(GaussLegendre::new(n)
        .as_node_weight_pairs()
        .iter()
        .map(|&(x, w)| (c + h * x, w * h))
        .collect())
}

/// `ln(sum exp(v))`, with `-inf` terms skipped.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let m = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + values.iter().map(|v| (v - m).exp()).sum::<f64>().ln()
}

//! First-order fast marching for `|grad v| = f` on a rectangular grid, optionally periodic in
//! the second axis.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct Grid2 {
    /// Nodes along the first (non-periodic) axis.
    pub n0: usize,
    /// Nodes along the second axis.
    pub n1: usize,
    pub h0: f64,
    pub h1: f64,
    pub periodic1: bool,
}

impl Grid2 {
    pub fn index(&self, i: usize, k: usize) -> usize {
        i * self.n1 + k
    }

    pub fn len(&self) -> usize {
        self.n0 * self.n1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn neighbors1(&self, k: usize) -> [Option<usize>; 2] {
        if self.periodic1 {
            [Some((k + self.n1 - 1) % self.n1), Some((k + 1) % self.n1)]
        } else {
            [k.checked_sub(1), (k + 1 < self.n1).then_some(k + 1)]
        }
    }
}

#[derive(PartialEq)]
struct Item(f64, usize);

impl Eq for Item {}

impl Ord for Item {
    fn cmp(&self, o: &Self) -> Ordering {
        // min-heap on the value; index breaks ties deterministically
        o.0.total_cmp(&self.0).then_with(|| o.1.cmp(&self.1))
    }
}

impl PartialOrd for Item {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

fn local_update(a: f64, b: f64, h0: f64, h1: f64, f: f64) -> f64 {
    // ((T - a)/h0)^2 + ((T - b)/h1)^2 = f^2 with both terms upwind, else one-sided
    let one = (a + f * h0).min(b + f * h1);
    if !a.is_finite() || !b.is_finite() {
        return one;
    }
    let (w0, w1) = (1.0 / (h0 * h0), 1.0 / (h1 * h1));
    let qa = w0 + w1;
    let qb = -2.0 * (a * w0 + b * w1);
    let qc = a * a * w0 + b * b * w1 - f * f;
    let disc = qb * qb - 4.0 * qa * qc;
    if disc < 0.0 {
        return one;
    }
    let t = (-qb + disc.sqrt()) / (2.0 * qa);
    if t >= a.max(b) {
        t.min(one)
    } else {
        one
    }
}

/// Solves `|grad v| = speed_inv` with `v` fixed at the seed nodes. Unreached nodes are `inf`.
pub fn fast_marching(grid: &Grid2, speed_inv: &[f64], seeds: &[(usize, f64)]) -> Result<Vec<f64>> {
    if speed_inv.len() != grid.len() || grid.n0 < 2 || grid.n1 < 2 {
        return Err(Error::Config("fast marching grid/speed size mismatch".into()));
    }
    let mut v = vec![f64::INFINITY; grid.len()];
    let mut known = vec![false; grid.len()];
    let mut heap = BinaryHeap::new();
    for &(idx, val) in seeds {
        if idx >= grid.len() {
            return Err(Error::Config(format!("seed index {idx} outside the grid")));
        }
        if val < v[idx] {
            v[idx] = val;
            heap.push(Item(val, idx));
        }
    }
    while let Some(Item(val, idx)) = heap.pop() {
        if known[idx] || val > v[idx] {
            continue;
        }
        known[idx] = true;
        let (i, k) = (idx / grid.n1, idx % grid.n1);
        let mut nb = Vec::with_capacity(4);
        if i > 0 {
            nb.push(grid.index(i - 1, k));
        }
        if i + 1 < grid.n0 {
            nb.push(grid.index(i + 1, k));
        }
        for kk in grid.neighbors1(k).into_iter().flatten() {
            nb.push(grid.index(i, kk));
        }
        for n in nb {
            if known[n] {
                continue;
            }
            let (ni, nk) = (n / grid.n1, n % grid.n1);
            let pick = |a: Option<usize>, b: Option<usize>| {
                let f = |o: Option<usize>| o.filter(|&m| known[m]).map_or(f64::INFINITY, |m| v[m]);
                f(a).min(f(b))
            };
            let a = pick(
                ni.checked_sub(1).map(|x| grid.index(x, nk)),
                (ni + 1 < grid.n0).then(|| grid.index(ni + 1, nk)),
            );
            let [l, r] = grid.neighbors1(nk);
            let b = pick(l.map(|x| grid.index(ni, x)), r.map(|x| grid.index(ni, x)));
            let t = local_update(a, b, grid.h0, grid.h1, speed_inv[n]);
            if t < v[n] {
                v[n] = t;
                heap.push(Item(t, n));
            }
        }
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn distance_from_a_line_is_exact() {
        let g = Grid2 { n0: 21, n1: 31, h0: 0.1, h1: 0.05, periodic1: false };
        let seeds: Vec<_> = (0..g.n1).map(|k| (g.index(0, k), 0.0)).collect();
        let v = fast_marching(&g, &vec![2.0; g.len()], &seeds).unwrap();
        for i in 0..g.n0 {
            assert!((v[g.index(i, 7)] - 2.0 * 0.1 * i as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn point_source_is_close_to_euclidean() {
        let g = Grid2 { n0: 101, n1: 101, h0: 0.01, h1: 0.01, periodic1: false };
        let v = fast_marching(&g, &vec![1.0; g.len()], &[(g.index(50, 50), 0.0)]).unwrap();
        let mut worst: f64 = 0.0;
        for i in 0..g.n0 {
            for k in 0..g.n1 {
                let d = 0.01 * (((i as f64 - 50.0).powi(2) + (k as f64 - 50.0).powi(2)).sqrt());
                worst = worst.max((v[g.index(i, k)] - d).abs());
            }
        }
        // first-order scheme: O(h log(1/h)) error near the source
        assert!(worst < 0.05, "{worst}");
    }

    #[test]
    fn periodic_axis_wraps() {
        let g = Grid2 { n0: 3, n1: 40, h0: 1.0, h1: 0.1, periodic1: true };
        let seeds: Vec<_> = (0..3).map(|i| (g.index(i, 0), 0.0)).collect();
        let v = fast_marching(&g, &vec![1.0; g.len()], &seeds).unwrap();
        assert!((v[g.index(1, 39)] - 0.1).abs() < 1e-12);
        assert!((v[g.index(1, 20)] - 2.0).abs() < 1e-9);
    }
}

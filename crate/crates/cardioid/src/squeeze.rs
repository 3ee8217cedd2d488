//! Squeezed replacement for `f4^-1`: the square `R_t` is split into a centre square `T0` and four
//! isosceles trapezoids `T1` (top), `T2` (right), `T3` (bottom), `T4` (left) of width `delta * gamma`,
//! mapped onto the matching partition of `R~_t`.
//!
//! All formulas are written in `P_c`-centred coordinates. Each trapezoid is also parametrised by a
//! chart `(xi, zeta)` in which the map does not depend on `delta`; the factor `1/delta` then only
//! appears in the chart Jacobian. This lets integrals be evaluated for `delta` far below the
//! floating-point range, with `ln delta` carried separately.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::cusp::{clamp_abs, CellScale};
use crate::error::{out_of_range, Error, Result};
use crate::jacobian::Jacobian;
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum DeltaMode<T> {
    /// `delta_t = exp(-1/t)`.
    Exp,
    /// `delta_t = t^((p+2)/(p-1)) ln(1/t)^(p/(p-1))`.
    PowerLog { p: T },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SqueezeParams<T> {
    pub mode: DeltaMode<T>,
}

impl<T: Real> SqueezeParams<T> {
    pub fn exp() -> Self {
        Self {
            mode: DeltaMode::Exp,
        }
    }

    pub fn power_log(p: T) -> Result<Self> {
        if !(p > T::one()) {
            return out_of_range("p", p.as_f64(), "(1, inf)");
        }
        Ok(Self {
            mode: DeltaMode::PowerLog { p },
        })
    }

    /// `ln delta_t`.
    pub fn ln_delta(&self, t: T) -> Result<T> {
        if !(t > T::zero()) || t > T::lit(0.125) {
            return out_of_range("t", t.as_f64(), "(0, 1/8]");
        }
        let ln = match self.mode {
            DeltaMode::Exp => -T::one() / t,
            DeltaMode::PowerLog { p } => {
                if !(p > T::one()) {
                    return out_of_range("p", p.as_f64(), "(1, inf)");
                }
                let pm1 = p - T::one();
                (p + T::lit(2.0)) / pm1 * t.ln() + p / pm1 * (-t.ln()).ln()
            }
        };
        if !(ln < -T::LN_2()) {
            return out_of_range("delta", ln.exp().as_f64(), "(0, 1/2)");
        }
        Ok(ln)
    }

    pub fn delta(&self, t: T) -> Result<Delta<T>> {
        Ok(Delta::from_ln(self.ln_delta(t)?))
    }
}

/// A squeeze parameter kept as its logarithm, with the value clamped to the smallest
/// positive normal number when it underflows.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Delta<T> {
    pub ln: T,
    pub value: T,
    pub clamped: bool,
}

impl<T: Real> Delta<T> {
    pub fn from_ln(ln: T) -> Self {
        let v = ln.exp();
        let floor = T::min_positive_value();
        if v < floor {
            Self {
                ln,
                value: floor,
                clamped: true,
            }
        } else {
            Self {
                ln,
                value: v,
                clamped: false,
            }
        }
    }

    pub fn from_value(v: T) -> Self {
        Self::from_ln(v.ln())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Piece {
    T0,
    T1,
    T2,
    T3,
    T4,
}

impl Piece {
    pub const ALL: [Piece; 5] = [Piece::T0, Piece::T1, Piece::T2, Piece::T3, Piece::T4];

    pub fn index(self) -> usize {
        match self {
            Piece::T0 => 0,
            Piece::T1 => 1,
            Piece::T2 => 2,
            Piece::T3 => 3,
            Piece::T4 => 4,
        }
    }

    /// Power of `1/delta` in the map Jacobian on this piece.
    pub fn delta_power(self) -> i32 {
        if self == Piece::T0 {
            0
        } else {
            1
        }
    }

    /// Chart parameter range: `[-1, 1]^2` for `T0`, `[0, 1]^2` otherwise.
    pub fn chart_range<T: Real>(self) -> (T, T) {
        if self == Piece::T0 {
            (-T::one(), T::one())
        } else {
            (T::zero(), T::one())
        }
    }
}

/// Evaluation of the squeezed `f4^-1` at one chart point.
///
/// `D f4^-1 = n / delta^k` and `det D f4^-1 = jdelta / delta^k` with `k = piece.delta_power()`;
/// the Lebesgue measure on the piece is `weight * delta^k dxi dzeta`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChartSample<T> {
    pub piece: Piece,
    /// Point of `R_t` (absolute coordinates).
    pub p: (T, T),
    /// Image in `R~_t` (absolute coordinates).
    pub q: (T, T),
    pub n: Jacobian<T>,
    pub jdelta: T,
    pub weight: T,
}

/// Quantities of one T1 row (`Y` measured from `P_c`).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct T1ChartData<T> {
    /// Left end of the row, `-Y` from `P_c`.
    pub x_p: T,
    /// Row length `2Y`.
    pub ell: T,
    pub x_tilde_p: T,
    pub ell_tilde: T,
}

/// Partition of `R_t` and `R~_t` for a fixed `delta`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrapezoidDecomposition<T> {
    pub cell: CellScale<T>,
    pub delta: Delta<T>,
    pub gamma: T,
    /// Half side `gamma/2`.
    pub h: T,
    /// Trapezoid width `gamma * delta`.
    pub e: T,
    /// Half side of `T0`, `gamma (1/2 - delta)`.
    pub m: T,
    pub alpha: T,
    pub beta: T,
    /// `(P_c)_1 = (L1 + L2)/2`.
    pub pc1: T,
    /// `(P~_c)_1 = ((t/2)^2 + t^2)/2`.
    pub pc1_tilde: T,
}

impl<T: Real> TrapezoidDecomposition<T> {
    pub fn new(cell: CellScale<T>, delta: Delta<T>) -> Result<Self> {
        if !(delta.ln < -T::LN_2()) {
            return Err(Error::Degenerate(format!(
                "delta = {} is not below 1/2",
                delta.value.as_f64()
            )));
        }
        let two = T::lit(2.0);
        let gamma = cell.gamma();
        let h = gamma / two;
        let e = gamma * delta.value;
        Ok(Self {
            cell,
            delta,
            gamma,
            h,
            e,
            m: gamma * (T::lit(0.5) - delta.value),
            alpha: cell.alpha(),
            beta: cell.beta(),
            pc1: (cell.l1 + cell.l2) / two,
            pc1_tilde: (cell.x_lo() + cell.x_hi()) / two,
        })
    }

    pub fn with_delta(cell: CellScale<T>, delta: T) -> Result<Self> {
        if !(delta > T::zero()) {
            return out_of_range("delta", delta.as_f64(), "(0, 1/2)");
        }
        Self::new(cell, Delta::from_value(delta))
    }

    pub fn with_params(cell: CellScale<T>, params: &SqueezeParams<T>) -> Result<Self> {
        Self::new(cell, params.delta(cell.t)?)
    }

    /// Areas of `T0..T4`: `(gamma (1 - 2 delta))^2` and `delta gamma^2 (1 - delta)`.
    pub fn areas(&self) -> [T; 5] {
        let c = T::lit(2.0) * self.m;
        let k = self.e * (self.h + self.m);
        [c * c, k, k, k, k]
    }

    /// Areas of the target pieces `T~0..T~4`.
    pub fn target_areas(&self) -> [T; 5] {
        let four = T::lit(4.0);
        let b = self.beta;
        let top = b / four * (self.alpha + b / T::lit(2.0)) / T::lit(2.0);
        let side = (T::lit(2.0) * self.alpha - b) / four * (b + b / T::lit(2.0)) / T::lit(2.0);
        [b * b / T::lit(4.0), top, side, top, side]
    }

    /// Vertices (counter-clockwise) of the source pieces in absolute coordinates.
    pub fn source_polygons(&self) -> [[Complex<T>; 4]; 5] {
        let c = |x: T, y: T| Complex::new(self.pc1 + x, y);
        let (h, m) = (self.h, self.m);
        [
            [c(-m, -m), c(m, -m), c(m, m), c(-m, m)],
            [c(-m, m), c(m, m), c(h, h), c(-h, h)],
            [c(m, -m), c(h, -h), c(h, h), c(m, m)],
            [c(-h, -h), c(h, -h), c(m, -m), c(-m, -m)],
            [c(-h, -h), c(-m, -m), c(-m, m), c(-h, h)],
        ]
    }

    /// Vertices (counter-clockwise) of the target pieces in absolute coordinates.
    pub fn target_polygons(&self) -> [[Complex<T>; 4]; 5] {
        let q = self.beta / T::lit(4.0);
        let hb = self.beta / T::lit(2.0);
        let c = |x: T, y: T| Complex::new(self.pc1_tilde + x, y);
        let ha = self.alpha / T::lit(2.0);
        [
            [c(-q, -q), c(q, -q), c(q, q), c(-q, q)],
            [c(-q, q), c(q, q), c(ha, hb), c(-ha, hb)],
            [c(q, -q), c(ha, -hb), c(ha, hb), c(q, q)],
            [c(-ha, -hb), c(ha, -hb), c(q, -q), c(-q, -q)],
            [c(-ha, -hb), c(-q, -q), c(-q, q), c(-ha, hb)],
        ]
    }

    pub fn t1_chart_data(&self, y: T) -> T1ChartData<T> {
        let a2 = self.beta / (T::lit(4.0) * self.e) * (y - self.m) + self.beta / T::lit(4.0);
        let (x_tilde_p, ell_tilde) = self.tilde_row(a2);
        T1ChartData {
            x_p: -y,
            ell: T::lit(2.0) * y,
            x_tilde_p,
            ell_tilde,
        }
    }

    /// `(x~_p, l~)` for a target row at height `a2`.
    fn tilde_row(&self, a2: T) -> (T, T) {
        let (al, b) = (self.alpha, self.beta);
        let two = T::lit(2.0);
        let xp = (two * al - b) / b * (b / two - a2) + self.cell.x_lo();
        let lt = (T::lit(4.0) * al - two * b) / b * a2 + b - al;
        (xp, lt)
    }

    /// `(a, b, c, d)` of `B2 = y (a X + b) / (c X + d)`.
    pub fn t2_coefficients(&self) -> (T, T, T, T) {
        let a = self.beta / (T::lit(4.0) * self.e);
        (a, self.beta / T::lit(2.0) - a * self.h, T::one(), T::zero())
    }

    fn u_of(&self, x: T, y: T) -> T {
        self.gamma / (T::lit(2.0) * y) * (x + y) + self.cell.l1
    }

    /// `A = (A1, A2)` on `T1` in `P_c`-centred coordinates, with its Jacobian in `(X, Y)`.
    pub fn map_a(&self, x: T, y: T) -> Result<((T, T), Jacobian<T>)> {
        let slack = T::lit(1e-9) * self.gamma;
        if y < self.m - slack || y > self.h + slack || x.abs() > y + slack {
            return Err(Error::OutsideDomain {
                map: "A",
                x: x.as_f64(),
                y: y.as_f64(),
            });
        }
        let (al, b) = (self.alpha, self.beta);
        let four = T::lit(4.0);
        let two = T::lit(2.0);
        let a2y = b / (four * self.e);
        let a2 = a2y * (y - self.m) + b / four;
        let u = self.u_of(x, y);
        let big_u = self.cell.profile.eta_inverse_unchecked(u);
        let inv_eta_p = T::one() / self.cell.profile.eta_prime_unchecked(big_u);
        let (xp, lt) = self.tilde_row(a2);
        let lo = self.cell.x_lo();
        let a1 = lt / al * (big_u - lo) + xp;
        let ux = self.gamma / (two * y);
        let uy = -self.gamma * x / (two * y * y);
        let dlt = (four * al - two * b) / b;
        let dxp = -(two * al - b) / b;
        let a1x = lt / al * inv_eta_p * ux;
        let a1y = lt / al * inv_eta_p * uy + (dlt / al * (big_u - lo) + dxp) * a2y;
        Ok(((a1, a2), Jacobian::new(a1x, a1y, T::zero(), a2y)))
    }

    /// `B = (B1, B2)` on `T2` in `P_c`-centred coordinates, with its Jacobian.
    pub fn map_b(&self, x: T, y: T) -> Result<((T, T), Jacobian<T>)> {
        let slack = T::lit(1e-9) * self.gamma;
        if x < self.m - slack || x > self.h + slack || y.abs() > x + slack {
            return Err(Error::OutsideDomain {
                map: "B",
                x: x.as_f64(),
                y: y.as_f64(),
            });
        }
        let (a, b, c, d) = self.t2_coefficients();
        let k = (T::lit(2.0) * self.alpha - self.beta) / (T::lit(4.0) * self.e);
        let b1 = k * (x - self.h) + self.cell.x_hi();
        let den = c * x + d;
        let num = a * x + b;
        let b2 = y * num / den;
        let b2x = y * (a * den - num * c) / (den * den);
        Ok(((b1, b2), Jacobian::new(k, T::zero(), b2x, num / den)))
    }

    /// `C(X, Y) = (A1(X, m), B2(m, Y))` on `T0`.
    pub fn map_c(&self, x: T, y: T) -> Result<((T, T), Jacobian<T>)> {
        let slack = T::lit(1e-9) * self.gamma;
        if x.abs() > self.m + slack || y.abs() > self.m + slack {
            return Err(Error::OutsideDomain {
                map: "C",
                x: x.as_f64(),
                y: y.as_f64(),
            });
        }
        let ((a1, _), ja) = self.map_a(clamp_abs(x, self.m), self.m)?;
        let k = self.beta / (T::lit(4.0) * self.m);
        Ok(((a1, y * k), Jacobian::new(ja.a11, T::zero(), T::zero(), k)))
    }

    /// Piece containing `p` and its chart coordinates. Trapezoids are selected by depth below
    /// the outer edge, so outer-edge points land in a trapezoid at `zeta = 0` even when `e` is
    /// below the resolution of `p`.
    pub fn locate(&self, p: (T, T)) -> (Piece, T, T) {
        let x = p.0 - self.pc1;
        let y = p.1;
        let (h, e, m) = (self.h, self.e, self.m);
        let depths = [h - y, h - x, h + y, h + x];
        let mut k = 0;
        for i in 1..4 {
            if depths[i] < depths[k] {
                k = i;
            }
        }
        // Trapezoids can be thinner than the rounding of `p` (exp mode has `delta = e^-64` at
        // j = 6); a point within a few ulps of the outer edge is taken to be on it.
        let floor = T::lit(4.0) * T::epsilon() * self.pc1.abs();
        let d = if depths[k] <= floor { T::zero() } else { depths[k] };
        if d >= e {
            let xi = clamp_abs(x / m, T::one());
            let zeta = clamp_abs(y / m, T::one());
            return (Piece::T0, xi, zeta);
        }
        let zeta = if e > T::zero() { (d / e).min(T::one()) } else { T::zero() };
        let half = T::lit(0.5);
        let ratio = |a: T, b: T| {
            if b > T::zero() {
                ((a / b + T::one()) * half).max(T::zero()).min(T::one())
            } else {
                half
            }
        };
        match k {
            0 => (Piece::T1, ratio(x, y), zeta),
            1 => (Piece::T2, ratio(y, x), zeta),
            2 => (Piece::T3, ratio(x, -y), zeta),
            _ => (Piece::T4, ratio(y, -x), zeta),
        }
    }

    /// Evaluates the squeezed `f4^-1` in the chart of `piece`.
    pub fn chart(&self, piece: Piece, xi: T, zeta: T) -> ChartSample<T> {
        match piece {
            Piece::T0 => self.chart_t0(xi, zeta),
            Piece::T1 => self.chart_t1(xi, zeta),
            Piece::T2 => self.chart_t2(xi, zeta),
            Piece::T3 => {
                let c = self.chart_t1(xi, zeta);
                let s = Jacobian::diag(T::one(), -T::one());
                ChartSample {
                    piece,
                    p: (c.p.0, -c.p.1),
                    q: (c.q.0, -c.q.1),
                    n: s * c.n * s,
                    ..c
                }
            }
            Piece::T4 => {
                let c = self.chart_t2(xi, zeta);
                let s = Jacobian::diag(-T::one(), T::one());
                ChartSample {
                    piece,
                    p: (T::lit(2.0) * self.pc1 - c.p.0, c.p.1),
                    q: (T::lit(2.0) * self.pc1_tilde - c.q.0, c.q.1),
                    n: s * c.n * s,
                    ..c
                }
            }
        }
    }

    fn chart_t1(&self, xi: T, zeta: T) -> ChartSample<T> {
        let (al, b, g) = (self.alpha, self.beta, self.gamma);
        let (two, four) = (T::lit(2.0), T::lit(4.0));
        let y = self.h - self.e * zeta;
        let x = y * (two * xi - T::one());
        let u = self.cell.l1 + g * xi;
        let big_u = self.cell.profile.eta_inverse_unchecked(u);
        let lo = self.cell.x_lo();
        let k = two * al - b;
        let lt = al - k * zeta / two;
        let xp = k * zeta / four + lo;
        let a1 = lt / al * (big_u - lo) + xp;
        let a2 = b / two - b * zeta / four;
        let a1xi = lt * g / (al * self.cell.profile.eta_prime_unchecked(big_u));
        let a1ze = -k / (two * al) * (big_u - lo) + k / four;
        let a2ze = -b / four;
        // (xi, zeta) -> (X, Y) inverse Jacobian = J0 + J1 / e with J1 = [[0,0],[0,-1]]
        let d = self.delta.value;
        let j0_11 = T::one() / (two * y);
        let j0_12 = -(two * xi - T::one()) / (two * y);
        let n = Jacobian::new(
            d * a1xi * j0_11,
            d * a1xi * j0_12 - a1ze / g,
            T::zero(),
            -a2ze / g,
        );
        ChartSample {
            piece: Piece::T1,
            p: (self.pc1 + x, y),
            q: (a1, a2),
            n,
            jdelta: a1xi * b / (T::lit(8.0) * y * g),
            weight: two * y * g,
        }
    }

    fn chart_t2(&self, xi: T, zeta: T) -> ChartSample<T> {
        let (al, b, g) = (self.alpha, self.beta, self.gamma);
        let (two, four) = (T::lit(2.0), T::lit(4.0));
        let x = self.h - self.e * zeta;
        let y = x * (two * xi - T::one());
        let k = two * al - b;
        let hh = b / two - b * zeta / four;
        let b1 = self.cell.x_hi() - k * zeta / four;
        let b2 = (two * xi - T::one()) * hh;
        let b1ze = -k / four;
        let b2xi = two * hh;
        let b2ze = -(two * xi - T::one()) * b / four;
        // inverse chart Jacobian = J0 + J1 / e with J0 = [[-(2xi-1)/(2X), 1/(2X)], [0, 0]], J1 = [[0,0],[-1,0]]
        let d = self.delta.value;
        let j0_11 = -(two * xi - T::one()) / (two * x);
        let j0_12 = T::one() / (two * x);
        let n = Jacobian::new(
            -b1ze / g,
            T::zero(),
            d * b2xi * j0_11 - b2ze / g,
            d * b2xi * j0_12,
        );
        ChartSample {
            piece: Piece::T2,
            p: (self.pc1 + x, y),
            q: (b1, b2),
            n,
            jdelta: -b1ze * b2xi / (two * x * g),
            weight: two * x * g,
        }
    }

    fn chart_t0(&self, xi: T, zeta: T) -> ChartSample<T> {
        let (al, b, g, m) = (self.alpha, self.beta, self.gamma, self.m);
        let (two, four) = (T::lit(2.0), T::lit(4.0));
        let u = self.cell.l1 + g * (xi + T::one()) / two;
        let big_u = self.cell.profile.eta_inverse_unchecked(u);
        let lo = self.cell.x_lo();
        let c1 = b / (two * al) * (big_u - lo) + (two * al - b) / four + lo;
        let c2 = b * zeta / four;
        let c1x = b / (two * al) * (g / (two * m)) / self.cell.profile.eta_prime_unchecked(big_u);
        let c2y = b / (four * m);
        let n = Jacobian::diag(c1x, c2y);
        ChartSample {
            piece: Piece::T0,
            p: (self.pc1 + m * xi, m * zeta),
            q: (c1, c2),
            n,
            jdelta: n.det(),
            weight: m * m,
        }
    }

    /// Squeezed `f4^-1(p)` and its Jacobian (with `delta` clamped if it underflows).
    pub fn f4_inv(&self, p: (T, T)) -> Result<((T, T), Jacobian<T>)> {
        if !self.cell.in_r(p) {
            return Err(Error::OutsideDomain {
                map: "squeezed f4^-1",
                x: p.0.as_f64(),
                y: p.1.as_f64(),
            });
        }
        let (piece, xi, zeta) = self.locate(p);
        let c = self.chart(piece, xi, zeta);
        let jac = if piece.delta_power() == 0 {
            c.n
        } else {
            c.n.scale(T::one() / self.delta.value)
        };
        Ok((c.q, jac))
    }

    /// Inverse of the squeezed `f4^-1`, mapping `R~_t` back onto `R_t`.
    pub fn f4(&self, q: (T, T)) -> Result<(T, T)> {
        if !self.cell.in_r_tilde(q) {
            return Err(Error::OutsideDomain {
                map: "squeezed f4",
                x: q.0.as_f64(),
                y: q.1.as_f64(),
            });
        }
        let (two, four) = (T::lit(2.0), T::lit(4.0));
        let (al, b, g) = (self.alpha, self.beta, self.gamma);
        let prof = self.cell.profile;
        let lo = self.cell.x_lo();
        let xt = q.0 - self.pc1_tilde;
        let yt = clamp_abs(q.1, b / two);
        let qb = b / four;
        if xt.abs() <= qb && yt.abs() <= qb {
            let zeta = yt / qb;
            let big_u = (q.0 - (two * al - b) / four - lo) * two * al / b + lo;
            let u = prof.eta_unchecked(big_u.max(T::zero()));
            let xi = clamp_abs(two * (u - self.cell.l1) / g - T::one(), T::one());
            return Ok((self.pc1 + self.m * xi, self.m * zeta));
        }
        if yt.abs() >= qb {
            let zeta = ((b / two - yt.abs()) * four / b).max(T::zero()).min(T::one());
            let (xp, lt) = self.tilde_row(b / two - b * zeta / four);
            if q.0 >= xp - T::lit(1e-12) * al && q.0 <= xp + lt + T::lit(1e-12) * al {
                let big_u = al * (q.0 - xp) / lt + lo;
                let u = prof.eta_unchecked(big_u.max(T::zero()));
                let xi = ((u - self.cell.l1) / g).max(T::zero()).min(T::one());
                let y = self.h - self.e * zeta;
                let x = y * (two * xi - T::one());
                return Ok((self.pc1 + x, y.copysign(q.1)));
            }
        }
        let k = two * al - b;
        let zeta = ((self.cell.x_hi() - self.pc1_tilde - xt.abs()) * four / k)
            .max(T::zero())
            .min(T::one());
        let hh = b / two - b * zeta / four;
        let xi = ((yt / hh + T::one()) / two).max(T::zero()).min(T::one());
        let x = self.h - self.e * zeta;
        let y = x * (two * xi - T::one());
        Ok((self.pc1 + x.copysign(xt), y))
    }
}

/// `F_t = f3^-1 o (squeezed f4^-1) o g^-1 : Q_t -> Q~_t`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SqueezedCell<T> {
    pub decomposition: TrapezoidDecomposition<T>,
}

/// `F_t` at a chart point, split so that `DF = p / delta^k`, `det DF = jd / delta^k` and
/// the area element of `Q_t` is `weight * delta^k dxi dzeta`, `k = piece.delta_power()`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SqueezedJet<T> {
    pub piece: Piece,
    pub z: Complex<T>,
    pub w: Complex<T>,
    pub p: Jacobian<T>,
    pub jd: T,
    pub weight: T,
}

impl<T: Real> SqueezedCell<T> {
    pub fn new(cell: CellScale<T>, params: &SqueezeParams<T>) -> Result<Self> {
        Ok(Self {
            decomposition: TrapezoidDecomposition::with_params(cell, params)?,
        })
    }

    pub fn from_decomposition(decomposition: TrapezoidDecomposition<T>) -> Self {
        Self { decomposition }
    }

    pub fn cell(&self) -> &CellScale<T> {
        &self.decomposition.cell
    }

    pub fn jet(&self, piece: Piece, xi: T, zeta: T) -> SqueezedJet<T> {
        let c = self.decomposition.chart(piece, xi, zeta);
        let cell = self.cell();
        let (z, dg) = cell.g_from_x(c.p, cell.profile.eta_inverse_unchecked(c.p.0));
        let (w, df3i) = cell.f3_inv_unchecked(c.q);
        let jg = dg.det();
        let dgi = dg.inverse().unwrap_or_else(|| Jacobian::diag(T::nan(), T::nan()));
        SqueezedJet {
            piece,
            z,
            w,
            p: df3i * c.n * dgi,
            jd: c.jdelta * df3i.det() / jg,
            weight: c.weight * jg.abs(),
        }
    }

    pub fn forward(&self, z: Complex<T>) -> Result<(Complex<T>, Jacobian<T>)> {
        let p = self.cell().g_inv(z)?;
        Ok(self.forward_at_rect(p))
    }

    pub fn forward_at_rect(&self, p: (T, T)) -> (Complex<T>, Jacobian<T>) {
        let cell = self.cell();
        let p = (
            p.0.max(cell.l1).min(cell.l2),
            clamp_abs(p.1, cell.sigma / T::lit(2.0)),
        );
        let (_, dg) = cell.g_from_x(p, cell.profile.eta_inverse_unchecked(p.0));
        let (q, df4i) = self
            .decomposition
            .f4_inv(p)
            .unwrap_or_else(|_| unreachable!("clamped into R_t"));
        let (w, df3i) = cell.f3_inv_unchecked(q);
        let dgi = dg.inverse().unwrap_or_else(|| Jacobian::diag(T::nan(), T::nan()));
        (w, df3i * df4i * dgi)
    }

    /// `F_t^-1` and its Jacobian.
    pub fn inverse(&self, w: Complex<T>) -> Result<(Complex<T>, Jacobian<T>)> {
        let cell = self.cell();
        if !cell.in_q_tilde(w) {
            return Err(Error::OutsideDomain {
                map: "squeezed F_t^-1",
                x: w.re.as_f64(),
                y: w.im.as_f64(),
            });
        }
        let (q, df3) = cell.f3(w)?;
        let q = (
            q.0.max(cell.x_lo()).min(cell.x_hi()),
            clamp_abs(q.1, cell.beta() / T::lit(2.0)),
        );
        let p = self.decomposition.f4(q)?;
        let (_, df4i) = self.decomposition.f4_inv(p)?;
        let df4 = df4i
            .inverse()
            .unwrap_or_else(|| Jacobian::diag(T::nan(), T::nan()));
        let (z, dg) = cell.g(p)?;
        Ok((z, dg * df4 * df3))
    }
}

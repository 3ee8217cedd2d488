//! Boundary curves of the model domains `M_s`, their squares `Delta_s`, and the standard cardioid.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::cusp::CuspProfile;
use crate::error::{out_of_range, Error, Result};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CuspDegree<T>(T);

impl<T: Real> CuspDegree<T> {
    pub fn new(s: T) -> Result<Self> {
        if !(s > T::one()) || !s.is_finite() {
            return out_of_range("s", s.as_f64(), "(1, inf)");
        }
        Ok(Self(s))
    }

    pub fn value(&self) -> T {
        self.0
    }

    pub fn profile(&self) -> CuspProfile<T> {
        CuspProfile {
            s: self.0,
            amplitude: T::one(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Upper,
    Lower,
}

impl Branch {
    fn sign<T: Real>(self) -> T {
        match self {
            Branch::Upper => T::one(),
            Branch::Lower => -T::one(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CuspArcPoint<T> {
    pub u: T,
    pub r: T,
    pub theta: T,
    pub x: T,
    pub y: T,
}

impl<T: Real> CuspArcPoint<T> {
    pub fn z(&self) -> Complex<T> {
        Complex::new(self.x, self.y)
    }
}

fn check_u<T: Real>(u: T) -> Result<()> {
    if !(u >= -T::one() && u <= T::zero()) {
        return out_of_range("u", u.as_f64(), "[-1, 0]");
    }
    Ok(())
}

/// Point of the cusp curve `(u, +-(-u)^s)`.
pub fn ell1_point<T: Real>(s: CuspDegree<T>, u: T, branch: Branch) -> Result<Complex<T>> {
    check_u(u)?;
    Ok(Complex::new(u, branch.sign::<T>() * (-u).powf(s.value())))
}

/// Point of the square-root curve whose complex square is `ell1_point(s, u, branch)`.
pub fn ellm_point<T: Real>(s: CuspDegree<T>, u: T, branch: Branch) -> Result<CuspArcPoint<T>> {
    check_u(u)?;
    Ok(ellm_unchecked(s.profile(), u, branch))
}

pub(crate) fn ellm_unchecked<T: Real>(p: CuspProfile<T>, u: T, branch: Branch) -> CuspArcPoint<T> {
    let mu = -u;
    let r = p.eta_unchecked(mu);
    let theta = branch.sign::<T>()
        * (T::PI() - (p.amplitude * mu.powf(p.s - T::one())).atan())
        / T::lit(2.0);
    let (sn, cs) = theta.sin_cos();
    CuspArcPoint {
        u,
        r,
        theta,
        x: r * cs,
        y: r * sn,
    }
}

/// Arc `center + radius e^{i w}` for `w` running from `start_angle` (at `z2`) to `end_angle` (at `z1`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClosingArc<T> {
    pub center: Complex<T>,
    pub radius: T,
    pub start_angle: T,
    pub end_angle: T,
}

impl<T: Real> ClosingArc<T> {
    pub fn at_angle(&self, w: T) -> Complex<T> {
        let (sn, cs) = w.sin_cos();
        self.center + Complex::new(cs, sn) * self.radius
    }

    /// `tau` in `[0, 1]` from `z2` to `z1`.
    pub fn at(&self, tau: T) -> Complex<T> {
        self.at_angle(self.start_angle + tau * (self.end_angle - self.start_angle))
    }

    /// Far intersection of the ray from the origin at polar angle `phi` with the circle.
    pub fn ray_radius(&self, phi: T) -> T {
        let c = self.center.re;
        let (sn, cs) = phi.sin_cos();
        c * cs + (self.radius * self.radius - c * c * sn * sn).sqrt()
    }
}

/// Circle tangent to the square-root arcs at their outer endpoints, and the arc on the right of `z1 z2`.
pub fn closing_arc<T: Real>(s: CuspDegree<T>) -> Result<ClosingArc<T>> {
    let z1 = ellm_unchecked(s.profile(), -T::one(), Branch::Upper).z();
    // z(u)^2 = u + i(-u)^s, so dz/du = (1 - i s (-u)^(s-1)) / (2 z); at u = -1 the bracket is 1 - i s
    let dz = Complex::new(T::one(), -s.value()) / (z1 * T::lit(2.0));
    let normal = dz * Complex::new(T::zero(), T::one());
    if normal.im.abs() <= T::lit(1e-10) * normal.norm() {
        return Err(Error::Degenerate(
            "normal at z1 is parallel to the real axis".into(),
        ));
    }
    let lambda = -z1.im / normal.im;
    let c = z1.re + lambda * normal.re;
    let center = Complex::new(c, T::zero());
    let radius = (z1 - center).norm();
    let w1 = z1.im.atan2(z1.re - c);
    let (start_angle, end_angle) = if c + radius > z1.re {
        (-w1, w1)
    } else {
        (T::TAU() - w1, w1)
    };
    Ok(ClosingArc {
        center,
        radius,
        start_angle,
        end_angle,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Membership {
    Inside,
    Outside,
    Boundary,
}

impl Membership {
    pub fn is_inside(self) -> bool {
        self == Membership::Inside
    }
}

/// Boundary tolerance for the point-in-domain tests.
pub const BOUNDARY_TOL: f64 = 1e-10;

/// The Jordan curve bounding `M_s`: two square-root cusp arcs closed by a tangent circular arc.
#[derive(Clone, Debug)]
pub struct BoundaryCurve<T> {
    pub degree: CuspDegree<T>,
    pub z1: Complex<T>,
    pub z2: Complex<T>,
    pub arc: ClosingArc<T>,
    polygon: Vec<Complex<T>>,
    bbox: (T, T, T, T),
}

impl<T: Real> BoundaryCurve<T> {
    pub fn new(s: T) -> Result<Self> {
        let degree = CuspDegree::new(s)?;
        let arc = closing_arc(degree)?;
        let p = degree.profile();
        let z1 = ellm_unchecked(p, -T::one(), Branch::Upper).z();
        // star-shapedness about the tip: rays up to the junction angle leave through the arc at z1
        let junction = z1.im.atan2(z1.re);
        let far = arc.ray_radius(junction);
        if !(far.is_finite() && (far - z1.norm()).abs() <= T::lit(1e-9) * z1.norm()) {
            return Err(Error::Degenerate(
                "closing arc is not radially visible from the cusp tip".into(),
            ));
        }
        let z2 = ellm_unchecked(p, -T::one(), Branch::Lower).z();
        let polygon = sample_polygon(p, &arc);
        let mut bbox = (T::infinity(), T::neg_infinity(), T::infinity(), T::neg_infinity());
        for v in &polygon {
            bbox.0 = bbox.0.min(v.re);
            bbox.1 = bbox.1.max(v.re);
            bbox.2 = bbox.2.min(v.im);
            bbox.3 = bbox.3.max(v.im);
        }
        Ok(Self {
            degree,
            z1,
            z2,
            arc,
            polygon,
            bbox,
        })
    }

    pub fn s(&self) -> T {
        self.degree.value()
    }

    /// Counter-clockwise closed polygon (first vertex is the cusp tip, not repeated at the end).
    pub fn polygon(&self) -> &[Complex<T>] {
        &self.polygon
    }

    /// Ray-crossing test against the sampled polygon; within `BOUNDARY_TOL` of it counts as boundary.
    pub fn in_ms(&self, z: Complex<T>) -> Membership {
        let tol = T::lit(BOUNDARY_TOL);
        if z.re < self.bbox.0 - tol
            || z.re > self.bbox.1 + tol
            || z.im < self.bbox.2 - tol
            || z.im > self.bbox.3 + tol
        {
            return Membership::Outside;
        }
        let n = self.polygon.len();
        let mut inside = false;
        let mut dmin = T::infinity();
        for i in 0..n {
            let a = self.polygon[i];
            let b = self.polygon[(i + 1) % n];
            dmin = dmin.min(segment_distance(z, a, b));
            if (a.im > z.im) != (b.im > z.im) {
                let xc = a.re + (z.im - a.im) / (b.im - a.im) * (b.re - a.re);
                if z.re < xc {
                    inside = !inside;
                }
            }
        }
        if dmin <= tol {
            Membership::Boundary
        } else if inside {
            Membership::Inside
        } else {
            Membership::Outside
        }
    }

    /// `w` is in `Delta_s` iff one of its square roots is in `M_s`.
    pub fn in_delta_s(&self, w: Complex<T>) -> Membership {
        let r = w.sqrt();
        let a = self.in_ms(r);
        let b = self.in_ms(-r);
        if a == Membership::Inside || b == Membership::Inside {
            Membership::Inside
        } else if a == Membership::Boundary || b == Membership::Boundary {
            Membership::Boundary
        } else {
            Membership::Outside
        }
    }

    /// Polar angle of the arc endpoints seen from the origin (always `3 pi / 8`).
    pub fn junction_angle(&self) -> T {
        self.z1.im.atan2(self.z1.re)
    }

    /// Radial function of `M_s` about the cusp tip: the boundary radius on the ray at angle
    /// `phi` (`|phi| < pi/2`); `None` where the ray misses the interior.
    pub fn radial(&self, phi: T) -> Option<T> {
        let a = phi.abs();
        if a >= T::FRAC_PI_2() {
            return None;
        }
        if a <= self.junction_angle() {
            return Some(self.arc.ray_radius(phi));
        }
        let tan = (T::PI() - T::lit(2.0) * a).tan();
        let mu = tan.powf(T::one() / (self.s() - T::one()));
        Some(self.degree.profile().eta_unchecked(mu))
    }

    /// Analytic membership from the exact parametrization (radial test on the arc,
    /// angular test at fixed radius near the cusp).
    pub fn classify_analytic(&self, z: Complex<T>, tol: T) -> Membership {
        let r = z.norm();
        if r <= tol {
            return Membership::Boundary;
        }
        let phi = z.im.atan2(z.re);
        let a = phi.abs();
        if a <= self.junction_angle() {
            let rho = self.arc.ray_radius(phi);
            return if (r - rho).abs() <= tol {
                Membership::Boundary
            } else if r < rho {
                Membership::Inside
            } else {
                Membership::Outside
            };
        }
        let rz = self.z1.norm();
        if r > rz + tol {
            return Membership::Outside;
        }
        let p = self.degree.profile();
        let mu = p.eta_inverse_unchecked(r.min(rz));
        let theta_b = (T::PI() - mu.powf(self.s() - T::one()).atan()) / T::lit(2.0);
        let d = (a - theta_b) * r;
        if d.abs() <= tol {
            Membership::Boundary
        } else if d < T::zero() {
            Membership::Inside
        } else {
            Membership::Outside
        }
    }
}

pub(crate) fn segment_distance<T: Real>(z: Complex<T>, a: Complex<T>, b: Complex<T>) -> T {
    let ab = b - a;
    let l2 = ab.norm_sqr();
    if l2 == T::zero() {
        return (z - a).norm();
    }
    let t = ((z - a).re * ab.re + (z - a).im * ab.im) / l2;
    let t = t.max(T::zero()).min(T::one());
    (z - (a + ab * t)).norm()
}

fn sample_polygon<T: Real>(p: CuspProfile<T>, arc: &ClosingArc<T>) -> Vec<Complex<T>> {
    let coarse = T::lit(1e-3);
    let fine = T::lit(1e-4);
    let near = T::lit(0.05);
    let arc_point = |tau: T, branch: Branch| ellm_unchecked(p, -(tau * tau), branch).z();
    let limit = |a: Complex<T>, b: Complex<T>| {
        if a.norm().min(b.norm()) < near {
            fine
        } else {
            coarse
        }
    };
    // tau = sqrt(-u) in [0, 1]; refined by bisection until the chord meets the spacing bound
    let mut taus = Vec::new();
    let base = 256;
    for k in 0..base {
        let a = T::lit(k as f64 / base as f64);
        let b = T::lit((k + 1) as f64 / base as f64);
        refine(a, b, &|t| arc_point(t, Branch::Upper), &limit, 0, &mut taus);
    }
    taus.push(T::one());

    let mut poly = Vec::with_capacity(2 * taus.len() + 4096);
    // lower arc from the tip out to z2
    for &t in &taus {
        poly.push(arc_point(t, Branch::Lower));
    }
    let span = (arc.end_angle - arc.start_angle).abs() * arc.radius;
    let n_arc = ((span / coarse).ceil().as_f64() as usize).max(16);
    for k in 1..n_arc {
        poly.push(arc.at(T::lit(k as f64 / n_arc as f64)));
    }
    // upper arc from z1 back towards the tip, tip itself already first
    for &t in taus.iter().rev() {
        if t > T::zero() {
            poly.push(arc_point(t, Branch::Upper));
        }
    }
    poly
}

fn refine<T: Real>(
    a: T,
    b: T,
    f: &dyn Fn(T) -> Complex<T>,
    limit: &dyn Fn(Complex<T>, Complex<T>) -> T,
    depth: u32,
    out: &mut Vec<T>,
) {
    let pa = f(a);
    let pb = f(b);
    if depth < 30 && (pb - pa).norm() > limit(pa, pb) {
        let m = (a + b) / T::lit(2.0);
        refine(a, m, f, limit, depth + 1, out);
        refine(m, b, f, limit, depth + 1, out);
    } else {
        out.push(a);
    }
}

fn orient<T: Real>(a: Complex<T>, b: Complex<T>, c: Complex<T>) -> T {
    (b.re - a.re) * (c.im - a.im) - (b.im - a.im) * (c.re - a.re)
}

/// Proper or touching intersection of segments `ab` and `cd`.
pub fn segments_intersect<T: Real>(a: Complex<T>, b: Complex<T>, c: Complex<T>, d: Complex<T>) -> bool {
    let o1 = orient(a, b, c);
    let o2 = orient(a, b, d);
    let o3 = orient(c, d, a);
    let o4 = orient(c, d, b);
    let z = T::zero();
    if ((o1 > z && o2 < z) || (o1 < z && o2 > z)) && ((o3 > z && o4 < z) || (o3 < z && o4 > z)) {
        return true;
    }
    let on = |p: Complex<T>, q: Complex<T>, r: Complex<T>, o: T| {
        o == z
            && r.re >= p.re.min(q.re)
            && r.re <= p.re.max(q.re)
            && r.im >= p.im.min(q.im)
            && r.im <= p.im.max(q.im)
    };
    on(a, b, c, o1) || on(a, b, d, o2) || on(c, d, a, o3) || on(c, d, b, o4)
}

/// Sweep over segments sorted by their left end; true iff no two non-adjacent edges of the
/// closed polygon meet.
pub fn polygon_is_simple<T: Real>(poly: &[Complex<T>]) -> bool {
    let n = poly.len();
    if n < 3 {
        return false;
    }
    let seg = |i: usize| (poly[i], poly[(i + 1) % n]);
    let mut order: Vec<usize> = (0..n).collect();
    let lo = |i: usize| {
        let (a, b) = seg(i);
        a.re.min(b.re)
    };
    order.sort_by(|&i, &j| lo(i).partial_cmp(&lo(j)).unwrap_or(std::cmp::Ordering::Equal));
    let mut active: Vec<usize> = Vec::new();
    for &i in &order {
        let (a, b) = seg(i);
        let x0 = a.re.min(b.re);
        active.retain(|&k| {
            let (c, d) = seg(k);
            c.re.max(d.re) >= x0
        });
        let (ylo, yhi) = (a.im.min(b.im), a.im.max(b.im));
        for &k in &active {
            let adjacent = (k + 1) % n == i || (i + 1) % n == k;
            if adjacent {
                continue;
            }
            let (c, d) = seg(k);
            if c.im.max(d.im) < ylo || c.im.min(d.im) > yhi {
                continue;
            }
            if segments_intersect(a, b, c, d) {
                return false;
            }
        }
        active.push(i);
    }
    true
}

/// `(x^2+y^2)^2 - 4x(x^2+y^2) - 4y^2`: negative inside the cardioid `{(z+1)^2 : |z| < 1}`.
pub fn cardioid_defining<T: Real>(w: Complex<T>) -> T {
    let n = w.norm_sqr();
    n * n - T::lit(4.0) * w.re * n - T::lit(4.0) * w.im * w.im
}

/// Local cusp profile of the cardioid: `y^2 = d(x)` near the origin, `x <= 0`.
pub fn cardioid_d<T: Real>(x: T) -> Result<T> {
    if !(T::one() + T::lit(2.0) * x > T::zero()) || x > T::zero() {
        return out_of_range("x", x.as_f64(), "(-1/2, 0]");
    }
    Ok(cardioid_d_ratio(x) * (-x).powi(3))
}

/// `d(x) / |x|^3 = (4 - x) / (2 - x^2 + 2x + 2 sqrt(1 + 2x))`.
///
/// Rationalized form of `y^2 = 2 + 2x - x^2 - 2 sqrt(1 + 2x)`, the lower root of the quartic in `y^2`.
pub fn cardioid_d_ratio<T: Real>(x: T) -> T {
    let two = T::lit(2.0);
    (T::lit(4.0) - x) / (two - x * x + two * x + two * (T::one() + two * x).sqrt())
}

/// Local constants with `c1 |x|^3 <= d(x) <= c2 |x|^3` on `[-2^-j0, 0]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CardioidLocalData<T> {
    pub j0: u32,
    pub c1: T,
    pub c2: T,
}

impl<T: Real> CardioidLocalData<T> {
    /// Tightest constants from a dense sample of `d(x)/|x|^3` and its limit `1` at 0.
    pub fn fit(j0: u32) -> Result<Self> {
        if !(2..=60).contains(&j0) {
            return out_of_range("j0", j0 as f64, "[2, 60]");
        }
        let x0 = T::lit(2.0).powi(-(j0 as i32));
        let n = 20_000;
        let mut c1 = T::one();
        let mut c2 = c1;
        for k in 1..=n {
            let x = -x0 * T::lit(k as f64 / n as f64);
            let v = cardioid_d_ratio(x);
            c1 = c1.min(v);
            c2 = c2.max(v);
        }
        Ok(Self { j0, c1, c2 })
    }

    pub fn x0(&self) -> T {
        T::lit(2.0).powi(-(self.j0 as i32))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn deg(s: f64) -> CuspDegree<f64> {
        CuspDegree::new(s).unwrap()
    }

    #[test]
    fn ell1_examples() {
        assert_eq!(ell1_point(deg(1.5), -1.0, Branch::Upper).unwrap(), Complex::new(-1.0, 1.0));
        assert_eq!(ell1_point(deg(1.5), 0.0, Branch::Upper).unwrap(), Complex::new(0.0, 0.0));
        assert_eq!(ell1_point(deg(2.0), -0.5, Branch::Lower).unwrap(), Complex::new(-0.5, -0.25));
        assert!(ell1_point(deg(2.0), 0.5, Branch::Lower).is_err());
        assert!(CuspDegree::new(1.0).is_err());
    }

    #[test]
    fn ellm_examples() {
        let p = ellm_point(deg(1.5), -1.0, Branch::Upper).unwrap();
        assert!((p.r - 2f64.powf(0.25)).abs() < 1e-15);
        assert!((p.theta - 3.0 * PI / 8.0).abs() < 1e-15);
        assert_eq!(ellm_point(deg(3.0), 0.0, Branch::Lower).unwrap().r, 0.0);
        let q = ellm_point(deg(1.5), -0.25, Branch::Upper).unwrap();
        let sq = q.z() * q.z();
        assert!((sq.re + 0.25).abs() < 1e-12 && (sq.im - 0.125).abs() < 1e-12);
    }

    #[test]
    fn closing_arc_is_tangent_and_symmetric() {
        for &s in &[1.5, 2.0, 3.0] {
            let arc = closing_arc(deg(s)).unwrap();
            assert!(arc.center.im.abs() <= 1e-12);
            let z1 = ellm_point(deg(s), -1.0, Branch::Upper).unwrap().z();
            let z2 = ellm_point(deg(s), -1.0, Branch::Lower).unwrap().z();
            assert!(((arc.center - z1).norm() - arc.radius).abs() < 1e-10);
            assert!(((arc.center - z2).norm() - arc.radius).abs() < 1e-10);
            assert!((arc.at(1.0) - z1).norm() < 1e-12 && (arc.at(0.0) - z2).norm() < 1e-12);
            // finite-difference tangent of the cusp arc at z1 is orthogonal to the radius
            let h = 1e-6;
            let a = ellm_point(deg(s), -1.0 + h, Branch::Upper).unwrap().z();
            let tan = (a - z1) / h;
            let rad = z1 - arc.center;
            let cos = (tan.re * rad.re + tan.im * rad.im) / (tan.norm() * rad.norm());
            assert!(cos.abs() < 1e-5, "s={s} cos={cos}");
        }
    }

    #[test]
    fn in_ms_examples() {
        let b = BoundaryCurve::new(1.5).unwrap();
        assert_eq!(b.in_ms(Complex::new(0.5, 0.0)), Membership::Inside);
        assert_eq!(b.in_ms(Complex::new(-0.5, 0.0)), Membership::Outside);
        assert_eq!(b.in_ms(Complex::new(0.0, 0.0)), Membership::Boundary);
        assert_eq!(b.in_delta_s(Complex::new(0.25, 0.0)), Membership::Inside);
        assert_eq!(b.in_delta_s(Complex::new(-0.01, 0.0)), Membership::Outside);
        assert_eq!(b.in_delta_s(Complex::new(0.0, 0.0)), Membership::Boundary);
    }

    #[test]
    fn polygon_is_dense_and_simple() {
        let b = BoundaryCurve::new(1.5).unwrap();
        let p = b.polygon();
        assert!(p.len() >= 4096, "{}", p.len());
        assert!(polygon_is_simple(p));
        let mut bad = p.to_vec();
        let k = bad.len() / 3;
        bad.swap(k, 2 * k);
        assert!(!polygon_is_simple(&bad));
    }

    #[test]
    fn cardioid_examples() {
        assert_eq!(cardioid_defining(Complex::new(4.0, 0.0)), 0.0);
        assert_eq!(cardioid_defining(Complex::new(1.0, 0.0)), -3.0);
        assert_eq!(cardioid_d(0.0).unwrap(), 0.0);
        let x = -0.005f64;
        let y = cardioid_d(x).unwrap().sqrt();
        assert!(cardioid_defining(Complex::new(x, y)).abs() < 1e-12);
        let loc = CardioidLocalData::<f64>::fit(6).unwrap();
        assert!(loc.c1 <= loc.c2);
        let d = cardioid_d(-0.01).unwrap();
        assert!(d >= loc.c1 * 1e-6 && d <= loc.c2 * 1e-6);
    }
}

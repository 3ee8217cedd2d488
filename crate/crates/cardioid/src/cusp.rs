//! Cusp profile, dyadic cells and the cell maps.
//!
//! A cell at scale `t` pairs the annular piece `Q_t` outside the model domain with the
//! piece `Q~_t` of the cusp `{ |y| <= a |x|^s }`. The cell map is
//! `F_t = f3^-1 o f4^-1 o f2 o f1^-1`; `g = f1 o f2^-1` maps the square `R_t` onto `Q_t`.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{out_of_range, Error, Result};
use crate::jacobian::Jacobian;
use crate::scalar::Real;

/// Degree `s` and amplitude `a` of the cusp `|y| <= a |x|^s`.
///
/// `a = 1` gives the model domains; the standard cardioid uses `a = sqrt(c1)` with `s = 3/2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CuspProfile<T> {
    pub s: T,
    pub amplitude: T,
}

impl<T: Real> CuspProfile<T> {
    pub fn new(s: T, amplitude: T) -> Result<Self> {
        if !(s > T::one()) || !s.is_finite() {
            return out_of_range("s", s.as_f64(), "(1, inf)");
        }
        if !(amplitude > T::zero()) || !amplitude.is_finite() {
            return out_of_range("amplitude", amplitude.as_f64(), "(0, inf)");
        }
        Ok(Self { s, amplitude })
    }

    pub fn unit(s: T) -> Result<Self> {
        Self::new(s, T::one())
    }

    /// `a x^s` for `x >= 0`.
    pub fn height(&self, x: T) -> T {
        self.amplitude * x.powf(self.s)
    }

    fn q(&self, x: T) -> T {
        let a = self.amplitude;
        a * a * x.powf(T::lit(2.0) * (self.s - T::one()))
    }

    /// `eta(x) = sqrt(x) (1 + a^2 x^(2(s-1)))^(1/4)`.
    pub fn eta(&self, x: T) -> Result<T> {
        if x < T::zero() || x.is_nan() {
            return out_of_range("x", x.as_f64(), "[0, inf)");
        }
        Ok(self.eta_unchecked(x))
    }

    pub(crate) fn eta_unchecked(&self, x: T) -> T {
        if x == T::zero() {
            return T::zero();
        }
        x.sqrt() * (T::one() + self.q(x)).sqrt().sqrt()
    }

    pub fn eta_prime(&self, x: T) -> Result<T> {
        if !(x > T::zero()) {
            return out_of_range("x", x.as_f64(), "(0, inf)");
        }
        Ok(self.eta_prime_unchecked(x))
    }

    pub(crate) fn eta_prime_unchecked(&self, x: T) -> T {
        let q = self.q(x);
        let g = T::one() + q;
        g.sqrt().sqrt() / (T::lit(2.0) * x.sqrt()) * (T::one() + (self.s - T::one()) * q / g)
    }

    /// Unique `x >= 0` with `eta(x) = r`.
    ///
    /// Newton in `w = ln x`, where `ln eta` is convex and increasing with slope in
    /// `[1/2, s/2]`; started from `x = r^2` the iterates decrease monotonically.
    pub fn eta_inverse(&self, r: T) -> Result<T> {
        if r < T::zero() || r.is_nan() {
            return out_of_range("r", r.as_f64(), "[0, inf)");
        }
        Ok(self.eta_inverse_unchecked(r))
    }

    pub(crate) fn eta_inverse_unchecked(&self, r: T) -> T {
        if r == T::zero() {
            return T::zero();
        }
        let half = T::lit(0.5);
        let quarter = T::lit(0.25);
        let sm1 = self.s - T::one();
        let two_ln_a = T::lit(2.0) * self.amplitude.ln();
        let ln_r = r.ln();
        let tol = T::epsilon() * T::lit(4.0);
        let mut w = T::lit(2.0) * ln_r;
        for _ in 0..80 {
            let lq = two_ln_a + T::lit(2.0) * sm1 * w;
            let q = lq.exp();
            let f = half * w + quarter * q.ln_1p() - ln_r;
            let df = half + half * sm1 * q / (T::one() + q);
            let step = f / df;
            w = w - step;
            if step.abs() <= tol * (T::one() + w.abs()) {
                break;
            }
        }
        let mut x = w.exp();
        // one polish step in x removes the rounding of exp(w)
        let d = self.eta_prime_unchecked(x);
        if d.is_finite() && d > T::zero() {
            let nx = x - (self.eta_unchecked(x) - r) / d;
            if nx > T::zero() {
                x = nx;
            }
        }
        x
    }

    /// `pi + arctan(a X^(s-1))`, the angular opening of the cell at radius `eta(X)`.
    pub fn ell_of_x(&self, x: T) -> T {
        T::PI() + (self.amplitude * x.powf(self.s - T::one())).atan()
    }

    /// `(ell(r), d ell / dr, eta^-1(r))`.
    pub fn ell_at_radius(&self, r: T) -> (T, T, T) {
        let x = self.eta_inverse_unchecked(r);
        self.ell_from_x(x)
    }

    pub(crate) fn ell_from_x(&self, x: T) -> (T, T, T) {
        let sm1 = self.s - T::one();
        let ax = self.amplitude * x.powf(sm1);
        let ell = T::PI() + ax.atan();
        // d/dX arctan(a X^(s-1)) = a (s-1) X^(s-2) / (1 + a^2 X^(2(s-1)))
        let d_dx = self.amplitude * sm1 * x.powf(self.s - T::lit(2.0)) / (T::one() + ax * ax);
        let slope = d_dx / self.eta_prime_unchecked(x);
        (ell, slope, x)
    }
}

/// Polar map `f1(x, y) = x e^{iy}`.
pub fn f1<T: Real>(x: T, y: T) -> Result<(Complex<T>, Jacobian<T>)> {
    if x < T::zero() {
        return out_of_range("x", x.as_f64(), "[0, inf)");
    }
    let (sn, cs) = y.sin_cos();
    Ok((
        Complex::new(x * cs, x * sn),
        Jacobian::new(cs, -x * sn, sn, x * cs),
    ))
}

/// `(|z|, arg z)` with the argument in `[0, 2 pi)`.
pub fn f1_inv<T: Real>(z: Complex<T>) -> Result<(T, T)> {
    if z.re == T::zero() && z.im == T::zero() {
        return Err(Error::OutsideDomain {
            map: "f1_inv",
            x: 0.0,
            y: 0.0,
        });
    }
    Ok((z.norm(), arg_0_2pi(z)))
}

pub(crate) fn arg_0_2pi<T: Real>(z: Complex<T>) -> T {
    let a = z.im.atan2(z.re);
    if a < T::zero() {
        a + T::TAU()
    } else {
        a
    }
}

/// Scale data of one cell: `L1 = eta((t/2)^2)`, `L2 = eta(t^2)`, `sigma = L2 - L1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellScale<T> {
    pub profile: CuspProfile<T>,
    pub t: T,
    pub l1: T,
    pub l2: T,
    pub sigma: T,
}

/// Relative slack used by the membership predicates.
const MEMBER_TOL: f64 = 1e-9;

impl<T: Real> CellScale<T> {
    pub fn new(profile: CuspProfile<T>, t: T) -> Result<Self> {
        if !(t > T::zero()) || t > T::lit(0.125) {
            return out_of_range("t", t.as_f64(), "(0, 1/8]");
        }
        let half = t / T::lit(2.0);
        let l1 = profile.eta_unchecked(half * half);
        let l2 = profile.eta_unchecked(t * t);
        Ok(Self {
            profile,
            t,
            l1,
            l2,
            sigma: l2 - l1,
        })
    }

    /// Cell at `t = 2^-j`.
    pub fn dyadic(profile: CuspProfile<T>, j: u32) -> Result<Self> {
        if !(3..=500).contains(&j) {
            return out_of_range("j", j as f64, "[3, 500]");
        }
        Self::new(profile, T::lit(2.0).powi(-(j as i32)))
    }

    pub fn s(&self) -> T {
        self.profile.s
    }

    /// `(t/2)^2`, the inner end of the target range.
    pub fn x_lo(&self) -> T {
        let h = self.t / T::lit(2.0);
        h * h
    }

    pub fn x_hi(&self) -> T {
        self.t * self.t
    }

    /// `t^(2s)`.
    pub fn t2s(&self) -> T {
        self.t.powf(T::lit(2.0) * self.s())
    }

    pub fn alpha(&self) -> T {
        self.x_hi() - self.x_lo()
    }

    /// `2 a t^(2s)`.
    pub fn beta(&self) -> T {
        T::lit(2.0) * self.profile.amplitude * self.t2s()
    }

    /// `L2 - L1`; equal to `sigma` and named separately where the squeezed charts use it.
    pub fn gamma(&self) -> T {
        self.sigma
    }

    /// Area of `Q~_t`: `2a (t^(2s+2) - (t/2)^(2s+2)) / (s+1)`.
    pub fn cusp_cell_area(&self) -> T {
        let e = self.s() + T::one();
        let two = T::lit(2.0);
        two * self.profile.amplitude * (self.x_hi().powf(e) - self.x_lo().powf(e)) / e
    }

    fn tol(&self) -> T {
        T::lit(MEMBER_TOL)
    }

    /// `z` in `Q_t = { L1 <= |z| <= L2, |arg z - pi| <= ell(|z|)/2 }`.
    pub fn in_q(&self, z: Complex<T>) -> bool {
        let r = z.norm();
        let slack = self.tol() * self.l2;
        if r < self.l1 - slack || r > self.l2 + slack {
            return false;
        }
        let (ell, _, _) = self.profile.ell_at_radius(r);
        let th = arg_0_2pi(z);
        (th - T::PI()).abs() * r <= ell / T::lit(2.0) * r + slack
    }

    pub fn in_r(&self, p: (T, T)) -> bool {
        let slack = self.tol() * self.sigma;
        p.0 >= self.l1 - slack
            && p.0 <= self.l2 + slack
            && p.1.abs() <= self.sigma / T::lit(2.0) + slack
    }

    /// `w` in `Q~_t = { -t^2 <= x <= -(t/2)^2, |y| <= a |x|^s }`.
    pub fn in_q_tilde(&self, w: Complex<T>) -> bool {
        let slack = self.tol() * self.x_hi();
        let u = -w.re;
        u >= self.x_lo() - slack
            && u <= self.x_hi() + slack
            && w.im.abs() <= self.profile.height(u.max(T::zero())) * (T::one() + self.tol())
    }

    pub fn in_r_tilde(&self, p: (T, T)) -> bool {
        let slack = self.tol() * self.x_hi();
        p.0 >= self.x_lo() - slack
            && p.0 <= self.x_hi() + slack
            && p.1.abs() <= self.beta() / T::lit(2.0) * (T::one() + self.tol())
    }

    /// `f2(r, theta) = (r, sigma (pi - theta) / ell(r))`.
    pub fn f2(&self, r: T, theta: T) -> Result<(T, T)> {
        let (ell, _, _) = self.profile.ell_at_radius(r);
        let slack = self.tol() * self.l2;
        if r < self.l1 - slack
            || r > self.l2 + slack
            || (T::PI() - theta).abs() > ell / T::lit(2.0) + self.tol()
        {
            return Err(Error::OutsideDomain {
                map: "f2",
                x: r.as_f64(),
                y: theta.as_f64(),
            });
        }
        Ok((r, self.sigma * (T::PI() - theta) / ell))
    }

    pub fn f2_inv(&self, x: T, y: T) -> Result<(T, T)> {
        if !self.in_r((x, y)) {
            return Err(Error::OutsideDomain {
                map: "f2_inv",
                x: x.as_f64(),
                y: y.as_f64(),
            });
        }
        let (ell, _, _) = self.profile.ell_at_radius(x);
        Ok((x, T::PI() - ell * y / self.sigma))
    }

    /// `f3(u, v) = (-u, t^(2s) (-u)^(-s) v)` and its Jacobian.
    pub fn f3(&self, w: Complex<T>) -> Result<((T, T), Jacobian<T>)> {
        if !(w.re < T::zero()) {
            return out_of_range("u", w.re.as_f64(), "(-inf, 0)");
        }
        let mu = -w.re;
        let s = self.s();
        let k = self.t2s() / mu.powf(s);
        let jac = Jacobian::new(-T::one(), T::zero(), s * k / mu * w.im, k);
        Ok(((mu, k * w.im), jac))
    }

    /// `f3^-1(x, y) = (-x, x^s y / t^(2s))` and its Jacobian.
    pub fn f3_inv(&self, p: (T, T)) -> Result<(Complex<T>, Jacobian<T>)> {
        if !(p.0 > T::zero()) {
            return out_of_range("x", p.0.as_f64(), "(0, inf)");
        }
        Ok(self.f3_inv_unchecked(p))
    }

    pub(crate) fn f3_inv_unchecked(&self, p: (T, T)) -> (Complex<T>, Jacobian<T>) {
        let s = self.s();
        let k = p.0.powf(s) / self.t2s();
        let jac = Jacobian::new(-T::one(), T::zero(), s * k / p.0 * p.1, k);
        (Complex::new(-p.0, k * p.1), jac)
    }

    /// Simple `f4(u, v) = (eta(u), sigma v / (2 a t^(2s)))`.
    pub fn f4(&self, p: (T, T)) -> Result<((T, T), Jacobian<T>)> {
        if !self.in_r_tilde(p) {
            return Err(Error::OutsideDomain {
                map: "f4",
                x: p.0.as_f64(),
                y: p.1.as_f64(),
            });
        }
        let ky = self.sigma / self.beta();
        let x = p.0.max(T::min_positive_value());
        Ok((
            (self.profile.eta_unchecked(x), ky * p.1),
            Jacobian::diag(self.profile.eta_prime_unchecked(x), ky),
        ))
    }

    /// Simple `f4^-1(x, y) = (eta^-1(x), 2 a t^(2s) y / sigma)`.
    pub fn f4_inv(&self, p: (T, T)) -> Result<((T, T), Jacobian<T>)> {
        if !self.in_r(p) {
            return Err(Error::OutsideDomain {
                map: "f4_inv",
                x: p.0.as_f64(),
                y: p.1.as_f64(),
            });
        }
        let x = self.profile.eta_inverse_unchecked(p.0);
        Ok(self.f4_inv_from_x(x, p.1))
    }

    pub(crate) fn f4_inv_from_x(&self, x: T, y: T) -> ((T, T), Jacobian<T>) {
        let ky = self.beta() / self.sigma;
        (
            (x, ky * y),
            Jacobian::diag(T::one() / self.profile.eta_prime_unchecked(x), ky),
        )
    }

    /// `g = f1 o f2^-1 : R_t -> Q_t` and `Dg`, from a precomputed `X = eta^-1(x)`.
    pub(crate) fn g_from_x(&self, p: (T, T), big_x: T) -> (Complex<T>, Jacobian<T>) {
        let (ell, dell, _) = self.profile.ell_from_x(big_x);
        let (x, y) = p;
        let phi = ell * y / self.sigma;
        let phi_x = dell * y / self.sigma;
        let (sn, cs) = phi.sin_cos();
        let k = ell / self.sigma;
        let z = Complex::new(-x * cs, x * sn);
        let jac = Jacobian::new(-cs + x * sn * phi_x, x * sn * k, sn + x * cs * phi_x, x * cs * k);
        (z, jac)
    }

    pub fn g(&self, p: (T, T)) -> Result<(Complex<T>, Jacobian<T>)> {
        if !self.in_r(p) {
            return Err(Error::OutsideDomain {
                map: "g",
                x: p.0.as_f64(),
                y: p.1.as_f64(),
            });
        }
        Ok(self.g_from_x(p, self.profile.eta_inverse_unchecked(p.0)))
    }

    /// `g^-1 = f2 o f1^-1 : Q_t -> R_t`, with `(r, theta)` taken on `[0, 2 pi)`.
    pub fn g_inv(&self, z: Complex<T>) -> Result<(T, T)> {
        let (r, th) = f1_inv(z)?;
        self.f2(r, th)
    }

    /// The simple cell map `F_t : Q_t -> Q~_t` and its Jacobian.
    pub fn forward(&self, z: Complex<T>) -> Result<(Complex<T>, Jacobian<T>)> {
        let p = self.g_inv(z)?;
        Ok(self.forward_at_rect(p))
    }

    /// `F_t(g(p))` and `DF_t(g(p))` for `p` in `R_t`.
    pub fn forward_at_rect(&self, p: (T, T)) -> (Complex<T>, Jacobian<T>) {
        let big_x = self.profile.eta_inverse_unchecked(p.0);
        let (_, dg) = self.g_from_x(p, big_x);
        let (q, df4i) = self.f4_inv_from_x(big_x, p.1);
        let (w, df3i) = self.f3_inv_unchecked(q);
        let dgi = dg.inverse().unwrap_or_else(|| Jacobian::diag(T::nan(), T::nan()));
        (w, df3i * df4i * dgi)
    }

    /// `F_t^-1 = g o f4 o f3 : Q~_t -> Q_t` and its Jacobian.
    pub fn inverse(&self, w: Complex<T>) -> Result<(Complex<T>, Jacobian<T>)> {
        if !self.in_q_tilde(w) {
            return Err(Error::OutsideDomain {
                map: "F_t^-1",
                x: w.re.as_f64(),
                y: w.im.as_f64(),
            });
        }
        let (q, df3) = self.f3(w)?;
        let q = (q.0, clamp_abs(q.1, self.beta() / T::lit(2.0)));
        Ok(self.inverse_at_target_rect(q, df3))
    }

    /// Inverse evaluated from a point `q` of `R~_t` with `Df3` at its preimage.
    pub(crate) fn inverse_at_target_rect(
        &self,
        q: (T, T),
        df3: Jacobian<T>,
    ) -> (Complex<T>, Jacobian<T>) {
        let ky = self.sigma / self.beta();
        let x = self.profile.eta_unchecked(q.0);
        let p = (x, ky * q.1);
        let df4 = Jacobian::diag(self.profile.eta_prime_unchecked(q.0), ky);
        let (z, dg) = self.g_from_x(p, q.0);
        (z, dg * df4 * df3)
    }
}

pub(crate) fn clamp_abs<T: Real>(v: T, m: T) -> T {
    v.max(-m).min(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn prof(s: f64) -> CuspProfile<f64> {
        CuspProfile::unit(s).unwrap()
    }

    #[test]
    fn eta_examples() {
        let p = prof(1.5);
        assert!((p.eta(1.0).unwrap() - 2f64.powf(0.25)).abs() < 1e-15);
        let v = p.eta(1.0 / 256.0).unwrap();
        assert!((v - (1.0 / 16.0) * (257.0f64 / 256.0).powf(0.25)).abs() < 1e-16);
        assert!(p.eta(-1.0).is_err());
        assert_eq!(p.eta(0.0).unwrap(), 0.0);
    }

    #[test]
    fn eta_prime_closed_form_at_one() {
        let p = prof(1.5);
        let v = p.eta_prime(1.0).unwrap();
        assert!((v - 5.0 * 2f64.powf(0.25) / 8.0).abs() < 1e-15);
        assert!(p.eta_prime(0.0).is_err());
    }

    #[test]
    fn eta_inverse_examples() {
        let p = prof(1.5);
        assert_eq!(p.eta_inverse(0.0).unwrap(), 0.0);
        assert!((p.eta_inverse(2f64.powf(0.25)).unwrap() - 1.0).abs() < 1e-15);
        let q = CuspProfile::new(1.5f64, (4.0f64 / 3.0).sqrt()).unwrap();
        for &x in &[1e-12, 3e-7, 0.01, 0.5] {
            let r = q.eta(x).unwrap();
            assert!((q.eta_inverse(r).unwrap() - x).abs() <= 1e-14 * x);
        }
    }

    #[test]
    fn cell_example_values() {
        let c = CellScale::new(prof(1.5), 0.125).unwrap();
        assert_eq!(c.l1, prof(1.5).eta(1.0 / 256.0).unwrap());
        assert_eq!(c.l2, prof(1.5).eta(1.0 / 64.0).unwrap());
        assert!(CellScale::new(prof(1.5), 0.2).is_err());
        // corner of the cusp cell lies on the profile
        let w = Complex::new(-c.x_hi(), c.t2s());
        assert_eq!(w.im, (-w.re).powf(1.5));
    }

    #[test]
    fn ell_endpoints() {
        let c = CellScale::dyadic(prof(1.5), 7).unwrap();
        let t = c.t;
        let (a, _, _) = c.profile.ell_at_radius(c.l2);
        assert!((a - (std::f64::consts::PI + (t * t).powf(0.5).atan())).abs() < 1e-14);
        let (b, _, _) = c.profile.ell_at_radius(c.l1);
        assert!((b - (std::f64::consts::PI + (t / 2.0).atan())).abs() < 1e-14);
    }

    #[test]
    fn f1_examples() {
        let (z, j) = f1(1.0f64, std::f64::consts::FRAC_PI_2).unwrap();
        assert!(z.re.abs() < 1e-16 && (z.im - 1.0).abs() < 1e-16);
        assert!((j.det() - 1.0).abs() < 1e-15);
        let (z0, _) = f1(0.0f64, 2.3).unwrap();
        assert_eq!(z0, Complex::new(0.0, 0.0));
        let (r, th) = f1_inv(Complex::new(-1.0f64, 0.0)).unwrap();
        assert_eq!((r, th), (1.0, std::f64::consts::PI));
        assert!(f1_inv(Complex::new(0.0f64, 0.0)).is_err());
    }

    #[test]
    fn corners_and_axis() {
        let c = CellScale::dyadic(prof(1.5), 6).unwrap();
        let ((x, y), _) = c.f4((c.x_lo(), -c.t2s())).unwrap();
        assert!((x - c.l1).abs() < 1e-17 && (y + c.sigma / 2.0).abs() < 1e-17);
        let ((x, y), _) = c.f4((c.x_hi(), c.t2s())).unwrap();
        assert!((x - c.l2).abs() < 1e-17 && (y - c.sigma / 2.0).abs() < 1e-17);
        let ((u, v), j3) = c.f3(Complex::new(-c.x_hi(), c.t2s())).unwrap();
        assert_eq!(u, c.x_hi());
        assert!((v - c.t2s()).abs() <= 1e-15 * c.t2s());
        assert!(j3.det() < 0.0);
        let (w, _) = c.forward(Complex::new(-c.l2, 0.0)).unwrap();
        assert!((w.re + c.x_hi()).abs() < 1e-18 && w.im.abs() < 1e-30);
    }

    #[test]
    fn generic_f32_cell() {
        let p = CuspProfile::<f32>::unit(1.5).unwrap();
        let c = CellScale::dyadic(p, 6).unwrap();
        let (w, j) = c.forward(Complex::new(-c.l2 * 0.9, c.l2 * 0.1)).unwrap();
        assert!(w.re < 0.0 && j.det() > 0.0);
    }
}

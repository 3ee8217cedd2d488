//! The global extension `E`: `z^2` on the conformal part, the dyadic cell maps on the cusp
//! region `Omega1`, and `E2` on the unbounded remainder `Omega2`.
//!
//! Both models are star-shaped about the cusp tip at the origin. `E2` first continues the cell
//! formula over the cusp gap up to a radius `r_a` (for `M_s` the point `|z1|` where the cusp
//! arcs end), then blends the resulting inner boundary to the circle `|z| = R0` in
//! `(log r, angle)` coordinates, and is `kappa z |z|` outside `R0`. `rho_k(phi)` is the radial
//! function of `C u Omega1` (`C` the conformal part); `collar_inner` and `collar_target` are
//! those of the collar's inner boundary and its image.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::cusp::{arg_0_2pi, CellScale, CuspProfile};
use crate::error::{out_of_range, Error, Result};
use crate::geometry::{BoundaryCurve, CardioidLocalData};
use crate::jacobian::Jacobian;
use crate::numdiff::jacobian_fd;
use crate::scalar::Real;
use crate::squeeze::{DeltaMode, SqueezeParams, SqueezedCell};

/// Largest cell index used by pointwise dispatch; deeper points are clamped into it.
pub const MAX_CELL: u32 = 500;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "construction", rename_all = "snake_case")]
pub enum Construction<T> {
    Simple,
    Squeezed { params: SqueezeParams<T> },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RegionLabel {
    MsClosure,
    Omega1(u32),
    Omega2,
    /// On the interface between `Omega1` and `Omega2`.
    Boundary,
}

impl std::fmt::Display for RegionLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RegionLabel::MsClosure => write!(f, "Ms_closure"),
            RegionLabel::Omega1(j) => write!(f, "Omega1({j})"),
            RegionLabel::Omega2 => write!(f, "Omega2"),
            RegionLabel::Boundary => write!(f, "boundary"),
        }
    }
}

#[derive(Clone, Debug)]
pub enum Model<T> {
    /// The model domain `M_s` with its closing arc.
    CardioidType { boundary: BoundaryCurve<T> },
    /// The disk `D + 1`, whose square is the standard cardioid moved to the cusp at 0.
    StandardCardioid {
        local: CardioidLocalData<T>,
        /// Polar angle where the circle `|z - 1| = 1` meets `Re z^2 = -2^-2j0`.
        theta_disk: T,
    },
}

/// A cell map of either construction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CellMap<T> {
    Simple(CellScale<T>),
    Squeezed(SqueezedCell<T>),
}

impl<T: Real> CellMap<T> {
    pub fn cell(&self) -> &CellScale<T> {
        match self {
            CellMap::Simple(c) => c,
            CellMap::Squeezed(c) => c.cell(),
        }
    }

    pub fn forward_at_rect(&self, p: (T, T)) -> (Complex<T>, Jacobian<T>) {
        match self {
            CellMap::Simple(c) => c.forward_at_rect(p),
            CellMap::Squeezed(c) => c.forward_at_rect(p),
        }
    }

    /// `F_t(z)` for `z` in `Q_t`; `z` is first clamped onto the polar rectangle of the cell so
    /// that points on interfaces evaluate without tolerance failures.
    pub fn forward_clamped(&self, z: Complex<T>) -> (Complex<T>, Jacobian<T>) {
        let c = self.cell();
        let r = z.norm().max(c.l1).min(c.l2);
        let (ell, _, _) = c.profile.ell_at_radius(r);
        let th = arg_0_2pi(z);
        let h = c.sigma / T::lit(2.0);
        let y = (c.sigma * (T::PI() - th) / ell).max(-h).min(h);
        self.forward_at_rect((r, y))
    }

    pub fn forward(&self, z: Complex<T>) -> Result<(Complex<T>, Jacobian<T>)> {
        match self {
            CellMap::Simple(c) => c.forward(z),
            CellMap::Squeezed(c) => c.forward(z),
        }
    }

    pub fn inverse(&self, w: Complex<T>) -> Result<(Complex<T>, Jacobian<T>)> {
        match self {
            CellMap::Simple(c) => c.inverse(w),
            CellMap::Squeezed(c) => c.inverse(w),
        }
    }

    /// `F_t^-1(w)` with `w` clamped into `Q~_t`.
    pub fn inverse_clamped(&self, w: Complex<T>) -> Result<(Complex<T>, Jacobian<T>)> {
        let c = self.cell();
        let x = (-w.re).max(c.x_lo()).min(c.x_hi());
        let h = c.profile.height(x);
        self.inverse(Complex::new(-x, w.im.max(-h).min(h)))
    }
}

/// Value and (where defined) Jacobian of `E` at a point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvalSample<T> {
    pub region: RegionLabel,
    pub image: Complex<T>,
    pub jacobian: Option<Jacobian<T>>,
}

/// Reproducibility record of an assembled extension.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioDescriptor {
    pub model: String,
    pub s: f64,
    pub j0: u32,
    pub construction: String,
    pub delta_mode: Option<String>,
    pub delta_p: Option<f64>,
    pub r0: f64,
    pub kappa: f64,
    pub c1: Option<f64>,
    pub c2: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct Extension<T> {
    pub model: Model<T>,
    pub profile: CuspProfile<T>,
    pub j0: u32,
    pub construction: Construction<T>,
    /// `t0 = 2^-j0`.
    pub t0: T,
    /// Outer radius `L2` of the first cell.
    pub r_cell: T,
    /// `pi - ell(r_cell)/2`: beyond this polar angle the inner collar boundary is `|z| = r_cell`.
    pub theta_a: T,
    /// Outer radius of the cusp continuation zone (`= r_cell` when there is none).
    pub r_a: T,
    /// `eta^-1(r_a)`: the zone maps onto `{-x_a <= Re w <= -t0^2}` of the cusp.
    pub x_a: T,
    /// Polar angle where the collar's inner boundary leaves the conformal part.
    pub theta_j: T,
    pub r0: T,
    pub kappa: T,
    /// Coefficient of the arc-to-segment boundary correspondence.
    seg_coef: T,
}

fn pick_r0<T: Real>(max_radius: T) -> T {
    let need = T::lit(1.25) * max_radius;
    let mut r = T::lit(4.0);
    while r < need {
        r = r * T::lit(2.0);
    }
    r
}

impl<T: Real> Extension<T> {
    /// Extension for `M_s` (cusp amplitude 1), first cell `t0 = 2^-j0`.
    pub fn cardioid_type(s: T, j0: u32, construction: Construction<T>) -> Result<Self> {
        let boundary = BoundaryCurve::new(s)?;
        let profile = boundary.degree.profile();
        Self::assemble(Model::CardioidType { boundary }, profile, j0, construction)
    }

    /// Extension for the disk `D + 1`; `f0(z) = E(z + 1)` maps `D` onto the standard cardioid.
    ///
    /// The cusp profile is `|y| <= sqrt(c1) |x|^(3/2)` with `c1 = 1` the infimum of
    /// `d(x)/|x|^3`; the first cell covers `Re w` in `[-2^-6, -2^-8]` (`t0 = 1/8`).
    pub fn standard_cardioid(construction: Construction<T>) -> Result<Self> {
        let j0 = 3;
        let local = CardioidLocalData::<T>::fit(2 * j0)?;
        let profile = CuspProfile::new(T::lit(1.5), local.c1.sqrt())?;
        let x0 = local.x0();
        // Re (2 cos p e^(ip))^2 = 4 cos^2 p cos 2p is increasing on [pi/3, pi/2]
        let f = |p: T| {
            let c = p.cos();
            T::lit(4.0) * c * c * (T::lit(2.0) * p).cos() + x0
        };
        let (mut lo, mut hi) = (T::FRAC_PI_3(), T::FRAC_PI_2());
        for _ in 0..200 {
            let mid = (lo + hi) / T::lit(2.0);
            if f(mid) < T::zero() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let theta_disk = (lo + hi) / T::lit(2.0);
        Self::assemble(
            Model::StandardCardioid { local, theta_disk },
            profile,
            j0,
            construction,
        )
    }

    fn assemble(
        model: Model<T>,
        profile: CuspProfile<T>,
        j0: u32,
        construction: Construction<T>,
    ) -> Result<Self> {
        if !(3..=40).contains(&j0) {
            return out_of_range("j0", j0 as f64, "[3, 40]");
        }
        if let Construction::Squeezed { params } = construction {
            if let DeltaMode::PowerLog { p } = params.mode {
                if !(p > T::one()) {
                    return out_of_range("p", p.as_f64(), "(1, inf)");
                }
            }
        }
        let cell = CellScale::dyadic(profile, j0)?;
        let (ell, _, _) = profile.ell_from_x(cell.x_hi());
        let theta_a = T::PI() - ell / T::lit(2.0);
        let max_radius = match &model {
            Model::CardioidType { boundary } => boundary.arc.ray_radius(T::zero()),
            Model::StandardCardioid { .. } => T::lit(2.0),
        };
        let t0 = cell.t;
        // For M_s the cusp gap is continued by the cell formula up to |z1| = eta(1), where the
        // closing arc begins; the collar then never meets the nearly radial cusp arcs.
        let (r_a, x_a, theta_j) = match &model {
            Model::CardioidType { boundary } => {
                (boundary.z1.norm(), T::one(), boundary.junction_angle())
            }
            Model::StandardCardioid { .. } => (cell.l2, cell.x_hi(), theta_a),
        };
        let (ell_a, _, _) = profile.ell_from_x(x_a);
        let mut ext = Self {
            model,
            profile,
            j0,
            construction,
            t0,
            r_cell: cell.l2,
            theta_a,
            r_a,
            x_a,
            theta_j,
            r0: pick_r0(max_radius),
            kappa: T::one(),
            seg_coef: T::lit(2.0) * profile.amplitude * x_a.powf(profile.s) / ell_a,
        };
        if let Model::StandardCardioid { theta_disk, .. } = ext.model {
            if !(theta_disk < theta_a) {
                return Err(Error::Degenerate(
                    "disk boundary does not reach the first cell".into(),
                ));
            }
        }
        ext.kappa = T::one();
        Ok(ext)
    }

    pub fn s(&self) -> T {
        self.profile.s
    }

    /// `kappa R0^2`, the radius of the outer image circle.
    pub fn r0_tilde(&self) -> T {
        self.kappa * self.r0 * self.r0
    }

    pub fn cell(&self, j: u32) -> Result<CellScale<T>> {
        if j < self.j0 {
            return out_of_range("j", j as f64, "[j0, 500]");
        }
        CellScale::dyadic(self.profile, j)
    }

    pub fn cell_map(&self, j: u32) -> Result<CellMap<T>> {
        let c = self.cell(j)?;
        Ok(match self.construction {
            Construction::Simple => CellMap::Simple(c),
            Construction::Squeezed { params } => CellMap::Squeezed(SqueezedCell::new(c, &params)?),
        })
    }

    /// Cell index for `X = eta^-1(|z|)` (or `X = -Re w` on the target side); within `1e-12`
    /// of an interface the lower index wins.
    pub fn cell_index_from_x(&self, x: T) -> u32 {
        if !(x > T::zero()) {
            return MAX_CELL;
        }
        let jf = -x.log2() / T::lit(2.0);
        let j = (jf - T::lit(1e-12)).ceil() - T::one();
        let j = j.max(T::lit(self.j0 as f64)).min(T::lit(MAX_CELL as f64));
        j.to_u32().unwrap_or(MAX_CELL)
    }

    /// Cusp-arc angle `pi - ell(r)/2`: at radius `r <= r_cell` the conformal part occupies
    /// `|arg z| <= theta_b(r)`.
    pub fn theta_b(&self, r: T) -> T {
        let (ell, _, _) = self.profile.ell_at_radius(r);
        T::PI() - ell / T::lit(2.0)
    }

    /// Radial function of `C u Omega1`, `phi` in `(-pi, pi]`.
    pub fn rho_k(&self, phi: T) -> T {
        let a = phi.abs();
        if a > self.theta_a {
            return self.r_cell;
        }
        match &self.model {
            Model::CardioidType { boundary } => boundary.radial(a).unwrap_or(self.r_cell),
            Model::StandardCardioid { local, theta_disk } => {
                if a <= *theta_disk {
                    T::lit(2.0) * a.cos()
                } else {
                    (local.x0() / (T::lit(2.0) * a).cos().abs()).sqrt()
                }
            }
        }
    }

    /// Radial function of the inner boundary of the collar.
    pub fn collar_inner(&self, phi: T) -> T {
        if phi.abs() > self.theta_j {
            self.r_a
        } else {
            self.rho_k(phi)
        }
    }

    /// Radial function of the image of the collar's inner boundary, `psi` in `(-pi, pi]`.
    pub fn collar_target(&self, psi: T) -> T {
        let a = psi.abs();
        if a <= T::lit(2.0) * self.theta_j {
            let r = self.rho_k(a / T::lit(2.0));
            return r * r;
        }
        self.x_a / a.cos().abs()
    }

    /// Angle of the boundary correspondence on the collar's inner boundary: `2 phi` where
    /// `E = z^2`, the image angle of the cusp map on `|z| = r_a` otherwise. Odd in `phi`.
    pub fn boundary_angle(&self, phi: T) -> T {
        let a = phi.abs();
        let v = if a <= self.theta_j {
            T::lit(2.0) * a
        } else {
            (self.seg_coef * (T::PI() - a)).atan2(-self.x_a)
        };
        v.copysign(phi)
    }

    /// The cell formula without its scale, `z -> (-X, 2a X^s (pi - theta) / ell(|z|))` with
    /// `X = eta^-1(|z|)`, `theta = arg z` in `[0, 2 pi)`; and its Jacobian.
    pub fn cusp_map(&self, z: Complex<T>) -> (Complex<T>, Jacobian<T>) {
        let r = z.norm();
        let th = arg_0_2pi(z);
        let (ell, dell, x) = self.profile.ell_at_radius(r);
        let s = self.profile.s;
        let two_a = T::lit(2.0) * self.profile.amplitude;
        let xs = x.powf(s);
        let dx = T::one() / self.profile.eta_prime_unchecked(x);
        let d = T::PI() - th;
        let w = Complex::new(-x, two_a * xs * d / ell);
        let w1_r = -dx;
        let w2_r = two_a * d * (s * xs / x * dx * ell - xs * dell) / (ell * ell);
        let w2_t = -two_a * xs / ell;
        let (c, sn) = (z.re / r, z.im / r);
        let jac = Jacobian::new(
            c * w1_r,
            sn * w1_r,
            c * w2_r - sn / r * w2_t,
            sn * w2_r + c / r * w2_t,
        );
        (w, jac)
    }

    pub fn cusp_map_inverse(&self, w: Complex<T>) -> Complex<T> {
        let x = -w.re;
        let r = self.profile.eta_unchecked(x);
        let (ell, _, _) = self.profile.ell_from_x(x);
        let th = T::PI() - w.im * ell / (T::lit(2.0) * self.profile.amplitude * x.powf(self.profile.s));
        Complex::from_polar(r, th)
    }

    fn conformal_contains(&self, r: T, phi: T, tol: T) -> bool {
        let a = phi.abs();
        if a <= self.theta_a {
            return r <= self.rho_k(phi) + tol;
        }
        r <= self.r_cell + tol && a * r <= self.theta_b(r.min(self.r_cell)) * r + tol
    }

    fn tol_at(&self, r: T) -> T {
        T::lit(1e-12) * (T::one() + r)
    }

    pub fn classify(&self, z: Complex<T>) -> RegionLabel {
        let r = z.norm();
        if r == T::zero() {
            return RegionLabel::MsClosure;
        }
        let phi = z.im.atan2(z.re);
        let tol = self.tol_at(r);
        if self.conformal_contains(r, phi, tol) {
            return RegionLabel::MsClosure;
        }
        if phi.abs() > self.theta_a && r <= self.r_cell + tol {
            if (r - self.r_cell).abs() <= tol {
                return RegionLabel::Boundary;
            }
            let x = self.profile.eta_inverse_unchecked(r);
            return RegionLabel::Omega1(self.cell_index_from_x(x));
        }
        RegionLabel::Omega2
    }

    /// `E2` from its closed form, valid on the whole plane minus the origin (the inner part
    /// continues the collar formula beyond its boundary).
    pub fn e2_unchecked(&self, z: Complex<T>) -> Complex<T> {
        let r = z.norm();
        if r >= self.r0 {
            return z * (self.kappa * r);
        }
        let phi = z.im.atan2(z.re);
        if r < self.r_a && phi.abs() > self.theta_j {
            return self.cusp_map(z).0;
        }
        let ln_in = self.collar_inner(phi).ln();
        let lam = (r.ln() - ln_in) / (self.r0.ln() - ln_in);
        let psi = (T::one() - lam) * self.boundary_angle(phi) + lam * phi;
        let ln_out = self.collar_target(psi).ln();
        let lw = (T::one() - lam) * ln_out + lam * self.r0_tilde().ln();
        Complex::from_polar(lw.exp(), psi)
    }

    pub fn e2(&self, z: Complex<T>) -> Result<Complex<T>> {
        let label = self.classify(z);
        if label != RegionLabel::Omega2 && label != RegionLabel::Boundary {
            return Err(Error::OutsideDomain {
                map: "E2",
                x: z.re.as_f64(),
                y: z.im.as_f64(),
            });
        }
        Ok(self.e2_unchecked(z))
    }

    /// Inverse of `E2`: `lambda` is read off from `|w|` along the ray of `w`, then the angle
    /// equation is monotone in `phi` and solved by bisection.
    pub fn e2_inverse_unchecked(&self, w: Complex<T>) -> Complex<T> {
        let rw = w.norm();
        if rw >= self.r0_tilde() {
            let r = (rw / self.kappa).sqrt();
            return w / (self.kappa * r);
        }
        if self.in_continuation_target(w) {
            return self.cusp_map_inverse(w);
        }
        let psi = w.im.atan2(w.re);
        let ln_out = self.collar_target(psi).ln();
        let lam = (rw.ln() - ln_out) / (self.r0_tilde().ln() - ln_out);
        let g = |p: T| (T::one() - lam) * self.boundary_angle(p) + lam * p;
        let (mut lo, mut hi) = (-T::PI(), T::PI());
        for _ in 0..200 {
            let mid = (lo + hi) / T::lit(2.0);
            if g(mid) < psi {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= T::epsilon() * T::lit(4.0) {
                break;
            }
        }
        let phi = (lo + hi) / T::lit(2.0);
        let ln_in = self.collar_inner(phi).ln();
        let lr = ln_in + lam * (self.r0.ln() - ln_in);
        Complex::from_polar(lr.exp(), phi)
    }

    /// `w` in the part of the cusp `{-x_a <= Re w < -t0^2}` covered by the continuation zone.
    fn in_continuation_target(&self, w: Complex<T>) -> bool {
        let x = -w.re;
        x > self.t0 * self.t0 && x < self.x_a && w.im.abs() <= self.profile.height(x)
    }

    /// Jacobian of `E2` by Richardson-extrapolated central differences.
    pub fn e2_jacobian(&self, z: Complex<T>) -> Result<Jacobian<T>> {
        if z.norm() < self.r_a && z.im.atan2(z.re).abs() > self.theta_j {
            return Ok(self.cusp_map(z).1);
        }
        let h = T::lit(1e-5) * z.norm().max(T::lit(1e-3));
        jacobian_fd(|u| Ok(self.e2_unchecked(u)), z, h, true)
    }

    fn e1_at(&self, j: u32, z: Complex<T>) -> Result<(Complex<T>, Jacobian<T>)> {
        Ok(self.cell_map(j)?.forward_clamped(z))
    }

    pub fn eval(&self, z: Complex<T>) -> Result<Complex<T>> {
        Ok(match self.classify(z) {
            RegionLabel::MsClosure => z * z,
            RegionLabel::Omega1(j) => self.e1_at(j, z)?.0,
            RegionLabel::Boundary => self.e1_at(self.j0, z)?.0,
            RegionLabel::Omega2 => self.e2_unchecked(z),
        })
    }

    /// `E(z)` with its Jacobian (analytic on `C` and `Omega1`, finite differences on `Omega2`).
    pub fn eval_jet(&self, z: Complex<T>) -> Result<EvalSample<T>> {
        let region = self.classify(z);
        let (image, jacobian) = match region {
            RegionLabel::MsClosure => {
                let two = T::lit(2.0);
                (
                    z * z,
                    Some(Jacobian::new(two * z.re, -two * z.im, two * z.im, two * z.re)),
                )
            }
            RegionLabel::Omega1(j) => {
                let (w, d) = self.e1_at(j, z)?;
                (w, Some(d))
            }
            RegionLabel::Boundary => (self.e1_at(self.j0, z)?.0, None),
            RegionLabel::Omega2 => (self.e2_unchecked(z), Some(self.e2_jacobian(z)?)),
        };
        Ok(EvalSample {
            region,
            image,
            jacobian,
        })
    }

    /// `w` in the closed cusp `{-t0^2 <= Re w <= 0, |Im w| <= a |Re w|^s}` covered by the cells.
    pub fn in_target_cusp(&self, w: Complex<T>) -> bool {
        let x = -w.re;
        let tol = self.tol_at(T::zero()) * self.t0 * self.t0;
        x >= T::zero() && x <= self.t0 * self.t0 + tol && w.im.abs() <= self.profile.height(x)
    }

    /// `E^-1(w)` with the region of the preimage.
    pub fn inverse_jet(&self, w: Complex<T>) -> Result<EvalSample<T>> {
        if w.norm() == T::zero() {
            return Ok(EvalSample {
                region: RegionLabel::MsClosure,
                image: w,
                jacobian: None,
            });
        }
        if self.in_target_cusp(w) && w.re < T::zero() {
            let j = self.cell_index_from_x(-w.re);
            let (z, d) = self.cell_map(j)?.inverse_clamped(w)?;
            return Ok(EvalSample {
                region: RegionLabel::Omega1(j),
                image: z,
                jacobian: Some(d),
            });
        }
        let psi = w.im.atan2(w.re);
        let rw = w.norm();
        if rw <= self.collar_target(psi) * (T::one() + self.tol_at(T::zero()))
            && !self.in_continuation_target(w)
        {
            let z = w.sqrt();
            let dz = (z * T::lit(2.0)).inv();
            return Ok(EvalSample {
                region: RegionLabel::MsClosure,
                image: z,
                jacobian: Some(Jacobian::new(dz.re, -dz.im, dz.im, dz.re)),
            });
        }
        if self.in_continuation_target(w) {
            let z = self.cusp_map_inverse(w);
            return Ok(EvalSample {
                region: RegionLabel::Omega2,
                image: z,
                jacobian: self.cusp_map(z).1.inverse(),
            });
        }
        let z = self.e2_inverse_unchecked(w);
        let h = T::lit(1e-5) * rw.max(T::lit(1e-3));
        let d = jacobian_fd(|u| Ok(self.e2_inverse_unchecked(u)), w, h, true)?;
        Ok(EvalSample {
            region: RegionLabel::Omega2,
            image: z,
            jacobian: Some(d),
        })
    }

    pub fn inverse(&self, w: Complex<T>) -> Result<Complex<T>> {
        Ok(self.inverse_jet(w)?.image)
    }

    /// `f0(z) = E(z + 1)`; only for the standard cardioid.
    pub fn cardioid_f0(&self, z: Complex<T>) -> Result<Complex<T>> {
        self.require_cardioid()?;
        self.eval(z + T::one())
    }

    pub fn cardioid_f0_jet(&self, z: Complex<T>) -> Result<EvalSample<T>> {
        self.require_cardioid()?;
        self.eval_jet(z + T::one())
    }

    pub fn cardioid_f0_inverse(&self, w: Complex<T>) -> Result<Complex<T>> {
        self.require_cardioid()?;
        Ok(self.inverse(w)? - T::one())
    }

    fn require_cardioid(&self) -> Result<()> {
        match self.model {
            Model::StandardCardioid { .. } => Ok(()),
            Model::CardioidType { .. } => Err(Error::Config(
                "f0 is defined for the standard cardioid model only".into(),
            )),
        }
    }

    pub fn descriptor(&self) -> ScenarioDescriptor {
        let (model, c1, c2) = match &self.model {
            Model::CardioidType { .. } => ("cardioid_type", None, None),
            Model::StandardCardioid { local, .. } => (
                "standard_cardioid",
                Some(local.c1.as_f64()),
                Some(local.c2.as_f64()),
            ),
        };
        let (construction, delta_mode, delta_p) = match self.construction {
            Construction::Simple => ("simple", None, None),
            Construction::Squeezed { params } => match params.mode {
                DeltaMode::Exp => ("squeezed", Some("exp".to_string()), None),
                DeltaMode::PowerLog { p } => {
                    ("squeezed", Some("power_log".to_string()), Some(p.as_f64()))
                }
            },
        };
        ScenarioDescriptor {
            model: model.into(),
            s: self.s().as_f64(),
            j0: self.j0,
            construction: construction.into(),
            delta_mode,
            delta_p,
            r0: self.r0.as_f64(),
            kappa: self.kappa.as_f64(),
            c1,
            c2,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{ellm_point, Branch, CuspDegree};

    fn ext(s: f64) -> Extension<f64> {
        Extension::cardioid_type(s, 6, Construction::Simple).unwrap()
    }

    #[test]
    fn classification_examples() {
        let e = ext(1.5);
        assert_eq!(e.classify(Complex::new(11.0, 3.0)), RegionLabel::Omega2);
        assert_eq!(e.classify(Complex::new(0.5, 0.0)), RegionLabel::MsClosure);
        let c = e.cell(7).unwrap();
        let z = Complex::from_polar((c.l1 + c.l2) / 2.0, 3.0);
        assert_eq!(e.classify(z), RegionLabel::Omega1(7));
        let c6 = e.cell(6).unwrap();
        assert_eq!(e.classify(Complex::from_polar(c6.l1, 3.0)), RegionLabel::Omega1(6));
        assert_eq!(e.classify(Complex::from_polar(c6.l2, 3.0)), RegionLabel::Boundary);
        assert_eq!(e.r0, 8.0);
    }

    #[test]
    fn square_on_ms_and_boundary_compatibility() {
        let e = ext(1.5);
        assert_eq!(e.eval(Complex::new(0.5, 0.0)).unwrap(), Complex::new(0.25, 0.0));
        let deg = CuspDegree::new(1.5).unwrap();
        for k in 1..200 {
            let u = -(2f64.powi(-12)) * k as f64 / 200.0;
            for b in [Branch::Upper, Branch::Lower] {
                let z = ellm_point(deg, u, b).unwrap().z();
                let j = e.cell_index_from_x(e.profile.eta_inverse(z.norm()).unwrap());
                let (w, _) = e.cell_map(j).unwrap().forward_clamped(z);
                assert!((w - z * z).norm() <= 1e-9, "{w} {}", z * z);
            }
        }
    }

    #[test]
    fn collar_matches_boundary_and_far_field() {
        let e = ext(1.5);
        // on dM_s away from the cusp
        let b = match &e.model {
            Model::CardioidType { boundary } => boundary.clone(),
            _ => unreachable!(),
        };
        for k in 0..50 {
            let phi = -1.2 + 2.4 * k as f64 / 49.0;
            let z = Complex::from_polar(b.radial(phi).unwrap(), phi);
            assert!((e.e2_unchecked(z) - z * z).norm() <= 1e-8 * (1.0 + z.norm_sqr()));
        }
        // on the circle |z| = r_cell against E1
        for k in 0..50 {
            let phi = e.theta_a + (std::f64::consts::PI - e.theta_a) * k as f64 / 49.0;
            let z = Complex::from_polar(e.r_cell, phi);
            let (w, _) = e.cell_map(6).unwrap().forward_clamped(z);
            assert!((e.e2_unchecked(z) - w).norm() <= 1e-8 * e.t0, "{phi}");
        }
        let z = Complex::new(0.0, 2.0 * e.r0);
        assert_eq!(e.e2(z).unwrap(), z * z.norm());
        assert!(e.e2(Complex::new(0.5, 0.0)).is_err());
    }

    #[test]
    fn inverse_round_trips() {
        let e = ext(1.5);
        let pts = [
            Complex::new(0.5, 0.1),
            Complex::new(-0.01, 0.001),
            Complex::new(-0.004, 0.0),
            Complex::new(2.0, 4.0),
            Complex::new(-3.0, -0.5),
            Complex::new(20.0, 1.0),
            Complex::new(-0.02, 0.0),
        ];
        for z in pts {
            let w = e.eval(z).unwrap();
            let back = e.inverse(w).unwrap();
            assert!((back - z).norm() <= 1e-9 * (1.0 + z.norm()), "{z} -> {w} -> {back}");
        }
    }

    #[test]
    fn cardioid_examples() {
        let e = Extension::<f64>::standard_cardioid(Construction::Simple).unwrap();
        assert_eq!(e.cardioid_f0(Complex::new(0.0, 0.0)).unwrap(), Complex::new(1.0, 0.0));
        let w = e.cardioid_f0(Complex::new(-0.5, 0.5)).unwrap();
        assert!((w - Complex::new(0.0, 0.5)).norm() < 1e-15);
        assert!(ext(1.5).cardioid_f0(Complex::new(0.0, 0.0)).is_err());
        let d = e.descriptor();
        assert_eq!(d.model, "standard_cardioid");
        assert_eq!(d.c1, Some(1.0));
        assert_eq!(e.r0, 4.0);
    }
}

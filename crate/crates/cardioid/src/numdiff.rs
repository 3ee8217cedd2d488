//! Finite-difference Jacobians of planar maps.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::jacobian::Jacobian;
use crate::scalar::Real;

fn central<T: Real, F>(f: &F, z: Complex<T>, h: T) -> Result<Jacobian<T>>
where
    F: Fn(Complex<T>) -> Result<Complex<T>>,
{
    let two_h = T::lit(2.0) * h;
    let dx = (f(z + Complex::new(h, T::zero()))? - f(z - Complex::new(h, T::zero()))?) / two_h;
    let dy = (f(z + Complex::new(T::zero(), h))? - f(z - Complex::new(T::zero(), h))?) / two_h;
    Ok(Jacobian::new(dx.re, dy.re, dx.im, dy.im))
}

/// Central-difference Jacobian with step `h`; with `richardson` the `h` and `h/2` estimates are
/// combined to fourth order. Stencil evaluation failures are returned, not skipped.
pub fn jacobian_fd<T: Real, F>(f: F, z: Complex<T>, h: T, richardson: bool) -> Result<Jacobian<T>>
where
    F: Fn(Complex<T>) -> Result<Complex<T>>,
{
    if !(h > T::zero()) {
        return Err(Error::OutOfRange {
            name: "h",
            value: h.as_f64(),
            expected: "(0, inf)",
        });
    }
    let d1 = central(&f, z, h)?;
    if !richardson {
        return Ok(d1);
    }
    let d2 = central(&f, z, h / T::lit(2.0))?;
    let three = T::lit(3.0);
    Ok(d2.scale(T::lit(4.0) / three).add(&d1.scale(-T::one() / three)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_and_square() {
        let id = jacobian_fd(|z: Complex<f64>| Ok(z), Complex::new(0.3, -0.2), 1e-3, false).unwrap();
        assert!((id.a11 - 1.0).abs() < 1e-12 && id.a12.abs() < 1e-12);
        assert!(id.a21.abs() < 1e-12 && (id.a22 - 1.0).abs() < 1e-12);
        let sq = jacobian_fd(|z: Complex<f64>| Ok(z * z), Complex::new(1.0, 0.0), 1e-4, true).unwrap();
        assert!((sq.a11 - 2.0).abs() < 1e-10 && (sq.a22 - 2.0).abs() < 1e-10);
        assert!(sq.a12.abs() < 1e-10 && sq.a21.abs() < 1e-10);
        assert!(jacobian_fd(|z: Complex<f64>| Ok(z), Complex::new(0.0, 0.0), 0.0, false).is_err());
    }
}

//! 2x2 derivative matrices with closed-form singular values.

use std::ops::Mul;

use serde::{Deserialize, Serialize};

use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Jacobian<T> {
    pub a11: T,
    pub a12: T,
    pub a21: T,
    pub a22: T,
}

impl<T: Real> Jacobian<T> {
    pub fn new(a11: T, a12: T, a21: T, a22: T) -> Self {
        Self { a11, a12, a21, a22 }
    }

    pub fn identity() -> Self {
        Self::diag(T::one(), T::one())
    }

    pub fn diag(d1: T, d2: T) -> Self {
        Self::new(d1, T::zero(), T::zero(), d2)
    }

    pub fn det(&self) -> T {
        self.a11 * self.a22 - self.a12 * self.a21
    }

    pub fn scale(&self, k: T) -> Self {
        Self::new(self.a11 * k, self.a12 * k, self.a21 * k, self.a22 * k)
    }

    pub fn add(&self, o: &Self) -> Self {
        Self::new(
            self.a11 + o.a11,
            self.a12 + o.a12,
            self.a21 + o.a21,
            self.a22 + o.a22,
        )
    }

    pub fn transpose(&self) -> Self {
        Self::new(self.a11, self.a21, self.a12, self.a22)
    }

    /// `None` when the determinant is zero.
    pub fn inverse(&self) -> Option<Self> {
        let d = self.det();
        if d == T::zero() || !d.is_finite() {
            return None;
        }
        Some(Self::new(self.a22 / d, -self.a12 / d, -self.a21 / d, self.a11 / d))
    }

    pub fn apply(&self, v: (T, T)) -> (T, T) {
        (
            self.a11 * v.0 + self.a12 * v.1,
            self.a21 * v.0 + self.a22 * v.1,
        )
    }

    pub fn frobenius(&self) -> T {
        self.a11
            .hypot(self.a12)
            .hypot(self.a21.hypot(self.a22))
    }

    /// `(sigma_max, sigma_min)`.
    ///
    /// sigma_max = (p + q)/2 with p = |(a11 + a22, a21 - a12)|, q = |(a11 - a22, a12 + a21)|;
    /// sigma_min is taken as |det|/sigma_max, which avoids the cancellation in (p - q)/2.
    pub fn singular_values(&self) -> (T, T) {
        let two = T::lit(2.0);
        let p = (self.a11 + self.a22).hypot(self.a21 - self.a12);
        let q = (self.a11 - self.a22).hypot(self.a12 + self.a21);
        let smax = (p + q) / two;
        if smax == T::zero() {
            return (T::zero(), T::zero());
        }
        (smax, self.det().abs() / smax)
    }

    /// Operator norm |A|.
    pub fn opnorm(&self) -> T {
        self.singular_values().0
    }

    /// |A|^2 / |det A|, or 1 where det A = 0.
    pub fn distortion(&self) -> T {
        let d = self.det().abs();
        if d == T::zero() {
            return T::one();
        }
        let n = self.opnorm();
        n / d * n
    }

    pub fn cast<U: Real>(&self) -> Jacobian<U> {
        Jacobian::new(
            U::lit(self.a11.as_f64()),
            U::lit(self.a12.as_f64()),
            U::lit(self.a21.as_f64()),
            U::lit(self.a22.as_f64()),
        )
    }

    pub fn is_finite(&self) -> bool {
        self.a11.is_finite() && self.a12.is_finite() && self.a21.is_finite() && self.a22.is_finite()
    }
}

impl<T: Real> Mul for Jacobian<T> {
    type Output = Jacobian<T>;

    fn mul(self, o: Self) -> Self {
        Self::new(
            self.a11 * o.a11 + self.a12 * o.a21,
            self.a11 * o.a12 + self.a12 * o.a22,
            self.a21 * o.a11 + self.a22 * o.a21,
            self.a21 * o.a12 + self.a22 * o.a22,
        )
    }
}

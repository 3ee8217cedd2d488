//! Closed-form integrability thresholds, exact over any ordered field (`f64` or
//! `Ratio<i64>`).

use num_traits::{FromPrimitive, Num};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub trait Field: Num + Copy + PartialOrd + FromPrimitive + std::fmt::Debug {}

impl<T: Num + Copy + PartialOrd + FromPrimitive + std::fmt::Debug> Field for T {}

fn k<T: Field>(v: i64) -> T {
    T::from_i64(v).expect("small integer")
}

fn max<T: Field>(a: T, b: T) -> T {
    if a >= b {
        a
    } else {
        b
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdSet<T> {
    pub s: T,
    /// `max{1, 1/(s-1)}`.
    pub q_kf: T,
    /// `2(s+1)/(2s-1)`.
    pub p_inv: T,
    /// `(s+1)/(s-1)`.
    pub q_kfinv: T,
    pub p: Option<T>,
    /// `max{1/(s-1), M(p,s)}` when `p` is given.
    pub q_combined: Option<T>,
}

/// `M(p, s) = 3p / ((2s-1)p + 4 - 2s)`.
pub fn m_exponent<T: Field>(p: T, s: T) -> T {
    let one = T::one();
    let two = k::<T>(2);
    k::<T>(3) * p / ((two * s - one) * p + k::<T>(4) - two * s)
}

pub fn thresholds<T: Field>(s: T, p: Option<T>) -> Result<ThresholdSet<T>> {
    let one = T::one();
    let two = k::<T>(2);
    if !(s > one) {
        return Err(Error::OutOfRange {
            name: "s",
            value: f64::NAN,
            expected: "(1, inf)",
        });
    }
    if let Some(p) = p {
        if !(p > one) {
            return Err(Error::OutOfRange {
                name: "p",
                value: f64::NAN,
                expected: "(1, inf)",
            });
        }
    }
    let inv = one / (s - one);
    Ok(ThresholdSet {
        s,
        q_kf: max(one, inv),
        p_inv: two * (s + one) / (two * s - one),
        q_kfinv: (s + one) / (s - one),
        p,
        q_combined: p.map(|p| max(inv, m_exponent(p, s))),
    })
}

/// `r(p, q) = ((q+1)p - 2q) / (p - q)`: the Sobolev exponent of the inverse obtained from
/// `f in W^{1,p}` and `K_f in L^q`.
pub fn r_transfer<T: Field>(p: T, q: T) -> Result<T> {
    if p == q {
        return Err(Error::Degenerate("r(p, q) needs p != q".into()));
    }
    let two = k::<T>(2);
    Ok(((q + T::one()) * p - two * q) / (p - q))
}

/// Exponent `p/2 - s(p-1)` of `(-x)` in the oscillation lower bound for `|DE^-1|^p`; the bound
/// is integrable at 0 iff it exceeds `-1`.
pub fn oscillation_exponent<T: Field>(p: T, s: T) -> T {
    p / k::<T>(2) - s * (p - T::one())
}

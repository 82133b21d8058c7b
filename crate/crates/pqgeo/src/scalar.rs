//! Scalar abstraction shared by every module.

use std::fmt::{Debug, Display, LowerExp};

use nalgebra::RealField;
use num_traits::{FromPrimitive, ToPrimitive};

/// Real scalar usable by the toolkit (`f32` or `f64`).
pub trait Real:
    RealField + Copy + FromPrimitive + ToPrimitive + Display + Debug + LowerExp + Send + Sync + 'static
{
    /// Default relative tolerance for sign and rank decisions.
    fn default_tol() -> Self;

    /// Unit roundoff.
    fn epsilon() -> Self;
}

impl Real for f64 {
    fn default_tol() -> Self {
        1e-9
    }

    fn epsilon() -> Self {
        f64::EPSILON
    }
}

impl Real for f32 {
    fn default_tol() -> Self {
        1e-4
    }

    fn epsilon() -> Self {
        f32::EPSILON
    }
}

/// Converts an `f64` literal into `T`.
#[inline]
pub fn lit<T: Real>(x: f64) -> T {
    nalgebra::convert(x)
}

/// Converts `T` back to `f64`.
#[inline]
pub fn to_f64<T: Real>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

#[inline]
pub(crate) fn from_usize<T: Real>(n: usize) -> T {
    lit(n as f64)
}

/// `cos(pi * num / den)` with exact values at multiples of pi/6 and pi/4.
///
/// Keeps right angles at exactly zero, which matters for Cartan entries
/// `-2cos(pi/2)` and for the polygon pairings.
pub fn cos_pi_frac<T: Real>(num: i64, den: i64) -> T {
    assert!(den > 0, "denominator must be positive");
    // reduce the angle num/den (in units of pi) to [0, 2)
    let period = 2 * den;
    let mut n = num.rem_euclid(period);
    // cos(pi x) = cos(pi (2 - x))
    if n > den {
        n = period - n;
    }
    // now x = n/den in [0, 1]; cos(pi x) = -cos(pi (1 - x))
    let (n, sign) = if 2 * n > den { (den - n, -1.0) } else { (n, 1.0) };
    // x in [0, 1/2]
    let exact = if n == 0 {
        Some(1.0)
    } else if 2 * n == den {
        Some(0.0)
    } else if 3 * n == den {
        Some(0.5)
    } else if 4 * n == den {
        Some(std::f64::consts::FRAC_1_SQRT_2)
    } else if 6 * n == den {
        Some(0.75f64.sqrt())
    } else {
        None
    };
    match exact {
        Some(v) => lit(sign * v),
        None => {
            let x: T = lit::<T>(n as f64) / lit::<T>(den as f64);
            lit::<T>(sign) * (T::pi() * x).cos()
        }
    }
}

/// `sin(pi * num / den)`, exact where [`cos_pi_frac`] is.
pub fn sin_pi_frac<T: Real>(num: i64, den: i64) -> T {
    // sin(pi x) = cos(pi (x - 1/2)) = cos(pi (2 num - den) / (2 den))
    cos_pi_frac(2 * num - den, 2 * den)
}

//! Real scalar abstraction shared by every numeric routine in the crate.
//!
//! All polynomial, matrix and jet computations are written against [`Real`]
//! and the complex numbers built on top of it, so the same code runs in
//! `f64` (the reference precision every tolerance is pinned for) and `f32`.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_complex::Complex;
use num_traits::{Float, FloatConst, NumAssign};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Floating-point real field the crate computes over.
pub trait Real:
    Float
    + FloatConst
    + NumAssign
    + Sum
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    /// Converts an `f64` constant into this precision.
    fn c(x: f64) -> Self;

    /// Converts to `f64` for reporting.
    fn f64(self) -> f64;

    /// A tolerance pinned in `f64`, floored at a small multiple of this
    /// type's machine epsilon so that tight `f64` thresholds stay usable
    /// in lower precision.
    fn tol(x: f64) -> Self {
        let floor = Self::epsilon() * Self::c(64.0);
        let t = Self::c(x);
        if t < floor {
            floor
        } else {
            t
        }
    }
}

impl Real for f64 {
    #[inline]
    fn c(x: f64) -> Self {
        x
    }
    #[inline]
    fn f64(self) -> f64 {
        self
    }
}

impl Real for f32 {
    #[inline]
    fn c(x: f64) -> Self {
        x as f32
    }
    #[inline]
    fn f64(self) -> f64 {
        self as f64
    }
}

/// Complex number over a [`Real`] field.
pub type Cx<T> = Complex<T>;

#[inline]
pub fn cx<T: Real>(re: f64, im: f64) -> Cx<T> {
    Complex::new(T::c(re), T::c(im))
}

#[inline]
pub fn cre<T: Real>(re: T) -> Cx<T> {
    Complex::new(re, T::zero())
}

#[inline]
pub fn czero<T: Real>() -> Cx<T> {
    Complex::new(T::zero(), T::zero())
}

#[inline]
pub fn cone<T: Real>() -> Cx<T> {
    Complex::new(T::one(), T::zero())
}

#[inline]
pub fn is_finite<T: Real>(z: Cx<T>) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

/// Binomial coefficient as a float; exact for the small arguments used here.
pub fn binomial<T: Real>(n: u32, k: u32) -> T {
    if k > n {
        return T::zero();
    }
    let k = k.min(n - k);
    let mut acc = T::one();
    for i in 0..k {
        acc = acc * T::c((n - i) as f64) / T::c((i + 1) as f64);
    }
    acc.round()
}

/// Falling factorial `m (m-1) ... (m-k+1)`.
pub fn falling<T: Real>(m: u32, k: u32) -> T {
    if k > m {
        return T::zero();
    }
    (0..k).fold(T::one(), |acc, i| acc * T::c((m - i) as f64))
}

pub fn factorial<T: Real>(n: u32) -> T {
    falling(n, n)
}

/// Integer binomial, used for basis sizes.
pub fn binomial_usize(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: usize = 1;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomials() {
        assert_eq!(binomial_usize(5, 3), 10);
        assert_eq!(binomial::<f64>(10, 4), 210.0);
        assert_eq!(falling::<f64>(5, 2), 20.0);
        assert_eq!(factorial::<f64>(5), 120.0);
        assert_eq!(falling::<f64>(2, 3), 0.0);
    }

    #[test]
    fn tolerance_floor_in_single_precision() {
        assert_eq!(<f64 as Real>::tol(1e-9), 1e-9);
        assert!(<f32 as Real>::tol(1e-9) > 1e-6);
    }
}

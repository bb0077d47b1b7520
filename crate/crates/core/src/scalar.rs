//! Scalar abstraction shared by every routine in the crate.
//!
//! All numerics are written against [`Real`], which is implemented for `f32`
//! and `f64`. Complex data uses [`num_complex::Complex`] over the same real
//! type, so a whole pipeline runs in one precision.

use nalgebra::{DMatrix, DVector, RealField};
use num_complex::Complex;
use num_traits::ToPrimitive;

/// Real floating-point type usable by the solvers.
pub trait Real: RealField + Copy + ToPrimitive {
    /// Converts an `f64` literal into `Self`.
    #[inline]
    fn lit(x: f64) -> Self {
        nalgebra::convert(x)
    }

    /// Lossy conversion back to `f64` (used for I/O and diagnostics).
    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    #[inline]
    fn count(n: usize) -> Self {
        nalgebra::convert(n as f64)
    }

    /// Machine epsilon of the type.
    fn eps() -> Self;
}

impl Real for f32 {
    fn eps() -> Self {
        f32::EPSILON
    }
}

impl Real for f64 {
    fn eps() -> Self {
        f64::EPSILON
    }
}

/// Complex scalar over `T`.
pub type Cplx<T> = Complex<T>;
/// Dense complex matrix.
pub type CMat<T> = DMatrix<Complex<T>>;
/// Dense complex column vector.
pub type CVec<T> = DVector<Complex<T>>;

/// `exp(i * theta)`.
#[inline]
pub fn cis<T: Real>(theta: T) -> Complex<T> {
    Complex::new(theta.cos(), theta.sin())
}

/// Wrap-around distance between two normalized frequencies on `[0, 1)`.
#[inline]
pub fn torus_distance<T: Real>(a: T, b: T) -> T {
    let d = (a - b).abs() % T::one();
    d.min(T::one() - d)
}

/// Maps any real onto `[0, 1)`.
#[inline]
pub fn wrap_unit<T: Real>(f: T) -> T {
    let w = f - f.floor();
    if w >= T::one() {
        T::zero()
    } else {
        w
    }
}

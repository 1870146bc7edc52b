//! Scalar abstraction shared by every numeric routine in the crate.
//!
//! All physics is written against [`Real`], which is implemented for `f32`
//! and `f64`. Amplitudes and matrix entries are `Complex<T>`.

use std::fmt::{Debug, Display};

use nalgebra::{DMatrix, DVector, RealField};
use num_complex::Complex;
use num_traits::FromPrimitive;

/// Real scalar type the simulator can be instantiated with.
pub trait Real: RealField + FromPrimitive + Copy + Display + Debug + Send + Sync + 'static {
    /// Converts an `f64` literal into `Self`.
    #[inline]
    fn lit(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).expect("literal representable in scalar type")
    }

    /// Converts a count into `Self`.
    #[inline]
    fn count(n: usize) -> Self {
        <Self as FromPrimitive>::from_usize(n).expect("count representable in scalar type")
    }

    /// Lossy conversion used for reporting.
    fn to_f64(self) -> f64;

    /// Machine epsilon of the type.
    fn epsilon() -> Self;
}

impl Real for f64 {
    fn to_f64(self) -> f64 {
        self
    }

    fn epsilon() -> Self {
        f64::EPSILON
    }
}

impl Real for f32 {
    fn to_f64(self) -> f64 {
        self as f64
    }

    fn epsilon() -> Self {
        f32::EPSILON
    }
}

pub type C<T> = Complex<T>;
pub type CMatrix<T> = DMatrix<Complex<T>>;
pub type CVector<T> = DVector<Complex<T>>;

#[inline]
pub fn re<T: Real>(x: T) -> Complex<T> {
    Complex::new(x, T::zero())
}

#[inline]
pub fn im<T: Real>(x: T) -> Complex<T> {
    Complex::new(T::zero(), x)
}

/// `exp(i·theta)`
#[inline]
pub fn cis<T: Real>(theta: T) -> Complex<T> {
    Complex::new(theta.cos(), theta.sin())
}

#[inline]
pub fn modulus<T: Real>(z: Complex<T>) -> T {
    z.re.hypot(z.im)
}

#[inline]
pub fn phase_of<T: Real>(z: Complex<T>) -> T {
    z.im.atan2(z.re)
}

/// Largest entrywise modulus of a complex matrix.
pub fn max_abs<T: Real>(m: &CMatrix<T>) -> T {
    m.iter().fold(T::zero(), |acc, z| {
        let a = modulus(*z);
        if a > acc {
            a
        } else {
            acc
        }
    })
}

/// Frobenius norm of a complex matrix.
pub fn frobenius<T: Real>(m: &CMatrix<T>) -> T {
    m.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr()).sqrt()
}

/// `‖v‖₂` of a complex vector.
pub fn norm<T: Real>(v: &CVector<T>) -> T {
    v.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr()).sqrt()
}

/// `⟨a|b⟩`, antilinear in the first argument.
pub fn inner<T: Real>(a: &CVector<T>, b: &CVector<T>) -> Complex<T> {
    a.iter()
        .zip(b.iter())
        .fold(Complex::new(T::zero(), T::zero()), |acc, (x, y)| acc + x.conj() * y)
}

/// Conjugate transpose.
pub fn dagger<T: Real>(m: &CMatrix<T>) -> CMatrix<T> {
    m.map(|z| z.conj()).transpose()
}

/// `AB − BA`
pub fn commutator<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> CMatrix<T> {
    a * b - b * a
}

/// `AB` that skips the zero entries of `a`; operator matrices here have a
/// handful of nonzeros per row, which makes this far cheaper than a dense product.
pub fn sparse_mul<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> CMatrix<T> {
    assert_eq!(a.ncols(), b.nrows(), "sparse_mul shape mismatch");
    let mut c = CMatrix::zeros(a.nrows(), b.ncols());
    for k in 0..a.ncols() {
        for i in 0..a.nrows() {
            let z = a[(i, k)];
            if z.re != T::zero() || z.im != T::zero() {
                for j in 0..b.ncols() {
                    let w = b[(k, j)];
                    if w.re != T::zero() || w.im != T::zero() {
                        c[(i, j)] += z * w;
                    }
                }
            }
        }
    }
    c
}

/// Wraps an angle into `(−π, π]`.
pub fn wrap_angle<T: Real>(theta: T) -> T {
    let two_pi = T::two_pi();
    let k = ((theta + T::pi()) / two_pi).floor();
    let x = theta - k * two_pi;
    if x <= -T::pi() {
        x + two_pi
    } else {
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wrap_angle_range() {
        for k in -20..20 {
            let x = 0.37 * k as f64;
            let w = wrap_angle(x);
            assert!(w > -std::f64::consts::PI && w <= std::f64::consts::PI);
            assert!(((x - w) / std::f64::consts::TAU).fract().abs() < 1e-12
                || ((x - w) / std::f64::consts::TAU).fract().abs() > 1.0 - 1e-12);
        }
        assert_eq!(wrap_angle(std::f64::consts::PI), std::f64::consts::PI);
        assert_eq!(wrap_angle(-std::f64::consts::PI), std::f64::consts::PI);
    }

    #[test]
    fn cis_on_f32() {
        let z = cis(std::f32::consts::FRAC_PI_2);
        assert!(z.re.abs() < 1e-6 && (z.im - 1.0).abs() < 1e-6);
    }
}

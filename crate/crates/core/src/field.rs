//! Scalar fields for concrete operator computations.
//!
//! Exact work happens in a real quadratic field; float work in `Complex64`.

use std::fmt::{Debug, Display};

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::scalars::QuadraticNumber;

/// Zero test tolerance for floating-point entries.
pub const FLOAT_ZERO: f64 = 1e-9;

pub trait Field: Clone + Debug + Display + PartialEq + Send + Sync + 'static {
    const EXACT: bool;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_i64(n: i64) -> Self;
    fn from_rational(r: &BigRational) -> Self;
    fn from_quadratic(q: &QuadraticNumber) -> Self;

    fn add_ref(&self, other: &Self) -> Self;
    fn sub_ref(&self, other: &Self) -> Self;
    fn mul_ref(&self, other: &Self) -> Self;
    fn neg_ref(&self) -> Self;
    /// `None` on a zero divisor.
    fn inv(&self) -> Option<Self>;

    /// Complex conjugation (the identity on real fields).
    fn conj(&self) -> Self;
    fn is_zero(&self) -> bool;
    fn magnitude(&self) -> f64;
    fn to_complex(&self) -> Complex64;
    /// Principal square root of a nonnegative real, when it lies in the field.
    fn sqrt(&self) -> Option<Self>;
    fn imaginary_unit() -> Option<Self>;
    /// Float values embed only into float fields.
    fn from_complex(c: Complex64) -> Option<Self>;
    /// Exact view, for exact fields only.
    fn to_quadratic(&self) -> Option<QuadraticNumber>;
    /// A random entry for identity testing.
    fn sample<R: Rng + ?Sized>(rng: &mut R) -> Self;

    fn from_ratio(n: i64, m: i64) -> Self {
        Self::from_rational(&BigRational::new(n.into(), m.into()))
    }

    fn div_ref(&self, other: &Self) -> Option<Self> {
        other.inv().map(|i| self.mul_ref(&i))
    }

    fn is_one(&self) -> bool {
        self.sub_ref(&Self::one()).is_zero()
    }

    fn approx_eq(&self, other: &Self) -> bool {
        self.sub_ref(other).is_zero()
    }

    fn re(&self) -> f64 {
        self.to_complex().re
    }
}

impl Field for QuadraticNumber {
    const EXACT: bool = true;

    fn zero() -> Self {
        QuadraticNumber::from_integer(0)
    }

    fn one() -> Self {
        QuadraticNumber::from_integer(1)
    }

    fn from_i64(n: i64) -> Self {
        QuadraticNumber::from_integer(n)
    }

    fn from_rational(r: &BigRational) -> Self {
        QuadraticNumber::rational(r.clone())
    }

    fn from_quadratic(q: &QuadraticNumber) -> Self {
        q.clone()
    }

    fn add_ref(&self, other: &Self) -> Self {
        if other.is_zero() {
            return self.clone();
        }
        if QuadraticNumber::is_zero(self) {
            return other.clone();
        }
        self + other
    }

    fn sub_ref(&self, other: &Self) -> Self {
        if other.is_zero() {
            return self.clone();
        }
        self - other
    }

    fn mul_ref(&self, other: &Self) -> Self {
        if QuadraticNumber::is_zero(self) || other.is_zero() {
            return <Self as Field>::zero();
        }
        self * other
    }

    fn neg_ref(&self) -> Self {
        -self
    }

    fn inv(&self) -> Option<Self> {
        self.inverse().ok()
    }

    fn conj(&self) -> Self {
        self.clone()
    }

    fn is_zero(&self) -> bool {
        QuadraticNumber::is_zero(self)
    }

    fn magnitude(&self) -> f64 {
        self.approx().abs()
    }

    fn to_complex(&self) -> Complex64 {
        Complex64::new(self.to_f64(), 0.0)
    }

    fn sqrt(&self) -> Option<Self> {
        QuadraticNumber::sqrt(self)
    }

    fn imaginary_unit() -> Option<Self> {
        None
    }

    fn from_complex(_: Complex64) -> Option<Self> {
        None
    }

    fn to_quadratic(&self) -> Option<QuadraticNumber> {
        Some(self.clone())
    }

    fn sample<R: Rng + ?Sized>(rng: &mut R) -> Self {
        QuadraticNumber::from_integer(rng.gen_range(-4..=4))
    }
}

impl Field for Complex64 {
    const EXACT: bool = false;

    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }

    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }

    fn from_i64(n: i64) -> Self {
        Complex64::new(n as f64, 0.0)
    }

    fn from_rational(r: &BigRational) -> Self {
        Complex64::new(r.to_f64().unwrap_or(f64::NAN), 0.0)
    }

    fn from_quadratic(q: &QuadraticNumber) -> Self {
        Complex64::new(q.to_f64(), 0.0)
    }

    fn add_ref(&self, other: &Self) -> Self {
        self + other
    }

    fn sub_ref(&self, other: &Self) -> Self {
        self - other
    }

    fn mul_ref(&self, other: &Self) -> Self {
        self * other
    }

    fn neg_ref(&self) -> Self {
        -self
    }

    fn inv(&self) -> Option<Self> {
        if self.norm() < 1e-300 {
            None
        } else {
            Some(Complex64::new(1.0, 0.0) / self)
        }
    }

    fn conj(&self) -> Self {
        Complex64::conj(self)
    }

    fn is_zero(&self) -> bool {
        self.norm() <= FLOAT_ZERO
    }

    fn magnitude(&self) -> f64 {
        self.norm()
    }

    fn to_complex(&self) -> Complex64 {
        *self
    }

    fn sqrt(&self) -> Option<Self> {
        if self.re < -FLOAT_ZERO || self.im.abs() > FLOAT_ZERO {
            return None;
        }
        Some(Complex64::new(self.re.max(0.0).sqrt(), 0.0))
    }

    fn imaginary_unit() -> Option<Self> {
        Some(Complex64::new(0.0, 1.0))
    }

    fn from_complex(c: Complex64) -> Option<Self> {
        Some(c)
    }

    fn to_quadratic(&self) -> Option<QuadraticNumber> {
        None
    }

    fn sample<R: Rng + ?Sized>(rng: &mut R) -> Self {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    }
}

/// Lift an exact value to any field.
pub fn lift<F: Field>(q: &QuadraticNumber) -> F {
    F::from_quadratic(q)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_inverse_and_sqrt() {
        let x: QuadraticNumber = "2+√2".parse().unwrap();
        let inv = Field::inv(&x).unwrap();
        assert!(x.mul_ref(&inv).is_one());
        let s: QuadraticNumber = "3-2√2".parse().unwrap();
        assert_eq!(Field::sqrt(&s).unwrap().to_string(), "-1+√2");
        assert!(<QuadraticNumber as Field>::imaginary_unit().is_none());
    }

    #[test]
    fn float_tolerance() {
        let x = Complex64::new(1e-12, -1e-12);
        assert!(Field::is_zero(&x));
        assert_eq!(Field::sqrt(&Complex64::new(4.0, 0.0)), Some(Complex64::new(2.0, 0.0)));
        assert!(Field::sqrt(&Complex64::new(-1.0, 0.0)).is_none());
    }
}

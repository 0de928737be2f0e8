//! Fixed-point evaluation of exact scalars at a requested binary precision.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

use super::{DeltaPolynomial, DeltaRational, QuadraticNumber, ScalarError};

const GUARD_BITS: u32 = 8;

/// A real number `fixed · 2^-bits`, accurate to within 2 units in the last place.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Approx {
    fixed: BigInt,
    bits: u32,
}

impl Approx {
    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn fixed(&self) -> &BigInt {
        &self.fixed
    }

    pub fn to_f64(&self) -> f64 {
        let r = BigRational::new(self.fixed.clone(), BigInt::from(1) << self.bits);
        r.to_f64().unwrap_or(f64::NAN)
    }

    /// Square root at the same precision; negative inputs clamp to zero.
    pub fn sqrt(&self) -> Approx {
        if self.fixed.is_negative() {
            return Approx { fixed: BigInt::zero(), bits: self.bits };
        }
        // √(F·2^-p) = √(F·2^p) · 2^-p
        let scaled: BigInt = &self.fixed << self.bits;
        Approx { fixed: scaled.sqrt(), bits: self.bits }
    }

    /// Truncated decimal rendering with `digits` fractional digits.
    pub fn to_decimal(&self, digits: usize) -> String {
        let neg = self.fixed.is_negative();
        let abs = self.fixed.abs();
        let scale = BigInt::from(10).pow(digits as u32);
        let scaled: BigInt = (&abs * &scale) >> self.bits;
        let (int, frac) = scaled.div_rem(&scale);
        let sign = if neg { "-" } else { "" };
        if digits == 0 {
            return format!("{sign}{int}");
        }
        format!("{sign}{int}.{:0>width$}", frac.to_string(), width = digits)
    }
}

impl fmt::Display for Approx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = (self.bits as f64 * std::f64::consts::LOG10_2).floor() as usize;
        f.write_str(&self.to_decimal(digits.min(60)))
    }
}

fn floor_scaled(r: &BigRational, bits: u32) -> BigInt {
    let n: BigInt = r.numer() << bits;
    n.div_floor(r.denom())
}

fn round_off(fixed_guarded: BigInt, bits: u32) -> Approx {
    let half = BigInt::from(1) << (GUARD_BITS - 1);
    let fixed = (fixed_guarded + half) >> GUARD_BITS;
    Approx { fixed, bits }
}

/// `a + b√d` at `bits` binary digits after the point.
pub fn evaluate_quadratic(x: &QuadraticNumber, bits: u32) -> Approx {
    let p = bits + GUARD_BITS;
    let a = floor_scaled(x.rational_part(), p);
    let b = x.irrational_part();
    let irr = if b.is_zero() {
        BigInt::zero()
    } else {
        // |b|√d·2^p = √(n²·d·4^p)/m for b = n/m
        let n = b.numer().abs();
        let m = b.denom();
        let radicand: BigInt = (&n * &n * BigInt::from(x.radicand())) << (2 * p);
        let root = radicand.sqrt() / m;
        if b.is_negative() {
            -root
        } else {
            root
        }
    };
    round_off(a + irr, bits)
}

/// Exact rational evaluation of a δ-polynomial at a binary64 value of δ.
pub fn evaluate_polynomial(poly: &DeltaPolynomial, delta: f64, bits: u32) -> Approx {
    let x = BigRational::from_float(delta).unwrap_or_else(BigRational::zero);
    round_off(floor_scaled(&poly.eval_rational(&x), bits + GUARD_BITS), bits)
}

pub fn evaluate_rational_function(
    f: &DeltaRational,
    delta: f64,
    bits: u32,
) -> Result<Approx, ScalarError> {
    let x = BigRational::from_float(delta).unwrap_or_else(BigRational::zero);
    let den = f.denominator().eval_rational(&x);
    if den.is_zero() {
        return Err(ScalarError::DivisionByZero);
    }
    let v = f.numerator().eval_rational(&x) / den;
    Ok(round_off(floor_scaled(&v, bits + GUARD_BITS), bits))
}

/// Anything that can be specialized to a real number.
pub trait Evaluate {
    /// Evaluates at `delta` (ignored by constants) with at least 53 bits.
    fn evaluate(&self, delta: f64, bits: u32) -> Result<Approx, ScalarError>;
}

impl Evaluate for QuadraticNumber {
    fn evaluate(&self, _delta: f64, bits: u32) -> Result<Approx, ScalarError> {
        Ok(evaluate_quadratic(self, bits.max(53)))
    }
}

impl Evaluate for DeltaPolynomial {
    fn evaluate(&self, delta: f64, bits: u32) -> Result<Approx, ScalarError> {
        Ok(evaluate_polynomial(self, delta, bits.max(53)))
    }
}

impl Evaluate for DeltaRational {
    fn evaluate(&self, delta: f64, bits: u32) -> Result<Approx, ScalarError> {
        evaluate_rational_function(self, delta, bits.max(53))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(s: &str) -> QuadraticNumber {
        s.parse().unwrap()
    }

    // Independent oracle: Newton iteration for √2 on big rationals, quadratic convergence.
    fn sqrt2_oracle(iterations: u32) -> BigRational {
        let mut x = BigRational::new(3.into(), 2.into());
        let two = BigRational::from_integer(2.into());
        for _ in 0..iterations {
            x = (&x + &two / &x) / &two;
        }
        x
    }

    #[test]
    fn two_minus_sqrt2() {
        let v = evaluate_quadratic(&q("2-√2"), 200);
        let oracle = BigRational::from_integer(2.into()) - sqrt2_oracle(9);
        let oracle_fixed = floor_scaled(&oracle, 200);
        assert!((v.fixed() - oracle_fixed).abs() <= BigInt::from(2));
        assert_eq!(v.to_decimal(6), "0.585786");
    }

    #[test]
    fn sqrt_of_two_sqrt2_minus_two() {
        let v = evaluate_quadratic(&q("2√2-2"), 128).sqrt();
        assert!((v.to_f64() - 0.910_179_721_124_455).abs() < 1e-15);
        assert_eq!(v.to_decimal(6), "0.910179");
    }

    #[test]
    fn polynomial_at_two() {
        let p = DeltaPolynomial::from_integers(&[-1, 0, 1]);
        assert_eq!(p.evaluate(2.0, 64).unwrap().to_f64(), 3.0);
    }

    #[test]
    fn precision_is_clamped() {
        assert_eq!(q("1/3").evaluate(0.0, 10).unwrap().bits(), 53);
    }
}

use std::cell::Cell;
use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::ScalarError;

/// Default radicand. Every exact constant of the index-(2+√2) computations lives in ℚ(√2).
pub const DEFAULT_RADICAND: u64 = 2;

thread_local! {
    static FIELD_RADICAND: Cell<u64> = const { Cell::new(DEFAULT_RADICAND) };
}

/// Radicand used for rationals created on this thread (see [`with_field`]).
pub fn current_radicand() -> u64 {
    FIELD_RADICAND.with(|d| d.get())
}

/// Runs `f` with ℚ(√d) as the ambient quadratic field for newly created rationals.
///
/// The radicand only matters when a square root is taken: `sqrt(d/4)` succeeds
/// inside ℚ(√d) and fails elsewhere.
pub fn with_field<R>(d: u64, f: impl FnOnce() -> R) -> R {
    assert!(is_squarefree(d) && d >= 2, "radicand must be squarefree and > 1");
    let prev = FIELD_RADICAND.with(|c| c.replace(d));
    let out = f();
    FIELD_RADICAND.with(|c| c.set(prev));
    out
}

pub fn is_squarefree(d: u64) -> bool {
    if d == 0 {
        return false;
    }
    let mut p = 2u64;
    while p * p <= d {
        if d % (p * p) == 0 {
            return false;
        }
        p += 1;
    }
    true
}

/// Splits a positive integer into `s² · k` with `k` squarefree.
pub fn squarefree_decomposition(n: &BigInt) -> (BigInt, BigInt) {
    let mut square = BigInt::one();
    let mut rest = n.clone();
    let mut p = BigInt::from(2);
    while &p * &p <= rest {
        let pp = &p * &p;
        while (&rest % &pp).is_zero() {
            rest /= &pp;
            square *= &p;
        }
        p += 1;
    }
    (square, rest)
}

pub(crate) fn rational_sqrt(r: &BigRational) -> Option<BigRational> {
    if r.is_negative() {
        return None;
    }
    let n = r.numer().sqrt();
    let d = r.denom().sqrt();
    if &(&n * &n) == r.numer() && &(&d * &d) == r.denom() {
        Some(BigRational::new(n, d))
    } else {
        None
    }
}

/// An element `a + b√d` of the real quadratic field ℚ(√d).
#[derive(Clone, Debug)]
pub struct QuadraticNumber {
    a: BigRational,
    b: BigRational,
    d: u64,
}

impl QuadraticNumber {
    pub fn new(a: BigRational, b: BigRational, d: u64) -> Result<Self, ScalarError> {
        if d < 2 || !is_squarefree(d) {
            return Err(ScalarError::NotSquarefree(d));
        }
        Ok(Self { a, b, d })
    }

    /// A rational number, placed in the thread's current field.
    pub fn rational(a: BigRational) -> Self {
        Self {
            a,
            b: BigRational::zero(),
            d: current_radicand(),
        }
    }

    pub fn from_integer(n: i64) -> Self {
        Self::rational(BigRational::from_integer(n.into()))
    }

    pub fn from_ratio(n: i64, m: i64) -> Self {
        Self::rational(BigRational::new(n.into(), m.into()))
    }

    /// `√d` itself.
    pub fn sqrt_radicand(d: u64) -> Result<Self, ScalarError> {
        Self::new(BigRational::zero(), BigRational::one(), d)
    }

    /// Convenience constructor `p/q + (r/s)√d` with small integer parts.
    pub fn from_parts(a: (i64, i64), b: (i64, i64), d: u64) -> Result<Self, ScalarError> {
        Self::new(
            BigRational::new(a.0.into(), a.1.into()),
            BigRational::new(b.0.into(), b.1.into()),
            d,
        )
    }

    pub fn rational_part(&self) -> &BigRational {
        &self.a
    }

    pub fn irrational_part(&self) -> &BigRational {
        &self.b
    }

    pub fn radicand(&self) -> u64 {
        self.d
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    fn field_of(&self, other: &Self) -> Result<u64, ScalarError> {
        match (self.b.is_zero(), other.b.is_zero()) {
            (_, true) => Ok(self.d),
            (true, false) => Ok(other.d),
            (false, false) if self.d == other.d => Ok(self.d),
            _ => Err(ScalarError::MismatchedField(self.d, other.d)),
        }
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self, ScalarError> {
        let d = self.field_of(other)?;
        Ok(Self {
            a: &self.a + &other.a,
            b: &self.b + &other.b,
            d,
        })
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self, ScalarError> {
        let d = self.field_of(other)?;
        Ok(Self {
            a: &self.a - &other.a,
            b: &self.b - &other.b,
            d,
        })
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self, ScalarError> {
        let d = self.field_of(other)?;
        if self.b.is_zero() && other.b.is_zero() {
            return Ok(Self {
                a: &self.a * &other.a,
                b: BigRational::zero(),
                d,
            });
        }
        let dd = BigRational::from_integer(d.into());
        Ok(Self {
            a: &self.a * &other.a + &self.b * &other.b * dd,
            b: &self.a * &other.b + &self.b * &other.a,
            d,
        })
    }

    pub fn checked_div(&self, other: &Self) -> Result<Self, ScalarError> {
        let inv = other.inverse()?;
        self.checked_mul(&inv)
    }

    /// Galois conjugate `a − b√d`.
    pub fn conj(&self) -> Self {
        Self {
            a: self.a.clone(),
            b: -&self.b,
            d: self.d,
        }
    }

    /// Field norm `a² − d b²`.
    pub fn norm(&self) -> BigRational {
        &self.a * &self.a - &self.b * &self.b * BigRational::from_integer(self.d.into())
    }

    pub fn inverse(&self) -> Result<Self, ScalarError> {
        if self.is_zero() {
            return Err(ScalarError::DivisionByZero);
        }
        if self.b.is_zero() {
            return Ok(Self {
                a: self.a.recip(),
                b: BigRational::zero(),
                d: self.d,
            });
        }
        let n = self.norm();
        Ok(Self {
            a: &self.a / &n,
            b: -&self.b / &n,
            d: self.d,
        })
    }

    /// Sign under the real embedding with `√d > 0`.
    pub fn signum(&self) -> Ordering {
        let sa = self.a.cmp(&BigRational::zero());
        let sb = self.b.cmp(&BigRational::zero());
        match (sa, sb) {
            (x, Ordering::Equal) => x,
            (Ordering::Equal, y) => y,
            (x, y) if x == y => x,
            (x, _) => {
                // opposite signs: compare a² with d b²
                let a2 = &self.a * &self.a;
                let b2d = &self.b * &self.b * BigRational::from_integer(self.d.into());
                match a2.cmp(&b2d) {
                    Ordering::Greater => x,
                    Ordering::Less => x.reverse(),
                    Ordering::Equal => Ordering::Equal,
                }
            }
        }
    }

    pub fn compare(&self, other: &Self) -> Result<Ordering, ScalarError> {
        Ok(self.checked_sub(other)?.signum())
    }

    pub fn is_positive(&self) -> bool {
        self.signum() == Ordering::Greater
    }

    /// Exact square root inside the same field, if one exists.
    ///
    /// For a rational argument this also succeeds when the root is a rational
    /// multiple of `√d` for the value's own radicand.
    pub fn sqrt(&self) -> Option<Self> {
        if self.signum() == Ordering::Less {
            return None;
        }
        if self.b.is_zero() {
            if let Some(r) = rational_sqrt(&self.a) {
                return Some(Self {
                    a: r,
                    b: BigRational::zero(),
                    d: self.d,
                });
            }
            let over_d = &self.a / BigRational::from_integer(self.d.into());
            return rational_sqrt(&over_d).map(|r| Self {
                a: BigRational::zero(),
                b: r,
                d: self.d,
            });
        }
        // (x + y√d)² = a + b√d  ⇒  x² = (a ± √(a² − d b²)) / 2, y = b / 2x
        let s = rational_sqrt(&self.norm())?;
        let two = BigRational::from_integer(2.into());
        for x2 in [(&self.a + &s) / &two, (&self.a - &s) / &two] {
            if let Some(x) = rational_sqrt(&x2) {
                if x.is_zero() {
                    continue;
                }
                let y = &self.b / (&two * &x);
                let cand = Self {
                    a: x,
                    b: y,
                    d: self.d,
                };
                let cand = if cand.signum() == Ordering::Less { -cand } else { cand };
                return Some(cand);
            }
        }
        None
    }

    /// Nearest `f64` (via the high-precision evaluator, so cancellation is harmless).
    pub fn to_f64(&self) -> f64 {
        super::precision::evaluate_quadratic(self, 80).to_f64()
    }
}

impl PartialEq for QuadraticNumber {
    fn eq(&self, other: &Self) -> bool {
        self.a == other.a && self.b == other.b && (self.b.is_zero() || self.d == other.d)
    }
}

impl Eq for QuadraticNumber {}

macro_rules! forward_binop {
    ($tr:ident, $method:ident, $checked:ident) => {
        impl $tr<&QuadraticNumber> for &QuadraticNumber {
            type Output = QuadraticNumber;
            fn $method(self, rhs: &QuadraticNumber) -> QuadraticNumber {
                self.$checked(rhs).expect("quadratic arithmetic")
            }
        }
        impl $tr for QuadraticNumber {
            type Output = QuadraticNumber;
            fn $method(self, rhs: QuadraticNumber) -> QuadraticNumber {
                (&self).$checked(&rhs).expect("quadratic arithmetic")
            }
        }
    };
}

forward_binop!(Add, add, checked_add);
forward_binop!(Sub, sub, checked_sub);
forward_binop!(Mul, mul, checked_mul);
forward_binop!(Div, div, checked_div);

impl Neg for QuadraticNumber {
    type Output = QuadraticNumber;
    fn neg(self) -> QuadraticNumber {
        Self {
            a: -self.a,
            b: -self.b,
            d: self.d,
        }
    }
}

impl Neg for &QuadraticNumber {
    type Output = QuadraticNumber;
    fn neg(self) -> QuadraticNumber {
        -self.clone()
    }
}

fn fmt_rational(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

impl fmt::Display for QuadraticNumber {
    /// Renders as e.g. `3-2√2`, `√2/2`, `1/3`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.b.is_zero() {
            return write!(f, "{}", fmt_rational(&self.a));
        }
        let mut out = String::new();
        if !self.a.is_zero() {
            out.push_str(&fmt_rational(&self.a));
            out.push(if self.b.is_negative() { '-' } else { '+' });
        } else if self.b.is_negative() {
            out.push('-');
        }
        let num = self.b.numer().abs();
        if !num.is_one() {
            out.push_str(&num.to_string());
        }
        out.push_str(&format!("√{}", self.d));
        if !self.b.denom().is_one() {
            out.push_str(&format!("/{}", self.b.denom()));
        }
        f.write_str(&out)
    }
}

fn parse_rational(s: &str) -> Result<BigRational, ScalarError> {
    let bad = || ScalarError::Parse(s.to_string());
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(ScalarError::DivisionByZero);
        }
        Ok(BigRational::new(n, d))
    } else if let Some((i, frac)) = s.split_once('.') {
        let digits = frac.len() as u32;
        let whole: BigInt = format!("{i}{frac}").parse().map_err(|_| bad())?;
        Ok(BigRational::new(whole, BigInt::from(10).pow(digits)))
    } else {
        Ok(BigRational::from_integer(s.trim().parse().map_err(|_| bad())?))
    }
}

impl FromStr for QuadraticNumber {
    type Err = ScalarError;

    /// Accepts the `Display` form (`3-2√2`, `√2/2`, `-1/2+3√2/4`) and `sqrt` as
    /// an ASCII spelling of `√`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let text: String = s.replace("sqrt", "√").chars().filter(|c| !c.is_whitespace()).collect();
        if text.is_empty() {
            return Err(ScalarError::Parse(s.to_string()));
        }
        // split into signed terms
        let mut terms = Vec::new();
        let mut cur = String::new();
        for (i, c) in text.chars().enumerate() {
            if (c == '+' || c == '-') && i > 0 {
                terms.push(std::mem::take(&mut cur));
            }
            cur.push(c);
        }
        terms.push(cur);
        let mut a = BigRational::zero();
        let mut b = BigRational::zero();
        let mut d: Option<u64> = None;
        for term in terms {
            let (neg, body) = match term.strip_prefix('-') {
                Some(rest) => (true, rest),
                None => (false, term.strip_prefix('+').unwrap_or(&term)),
            };
            let value;
            if let Some((coef, rest)) = body.split_once('√') {
                let coef = if coef.is_empty() { BigRational::one() } else { parse_rational(coef)? };
                let (rad, den) = match rest.split_once('/') {
                    Some((r, q)) => (r, parse_rational(q)?),
                    None => (rest, BigRational::one()),
                };
                let rad = rad.trim_start_matches('(').trim_end_matches(')');
                let rad: u64 = rad.parse().map_err(|_| ScalarError::Parse(s.to_string()))?;
                if !is_squarefree(rad) || rad < 2 {
                    return Err(ScalarError::NotSquarefree(rad));
                }
                if d.is_some_and(|d0| d0 != rad) {
                    return Err(ScalarError::MismatchedField(d.unwrap(), rad));
                }
                d = Some(rad);
                value = coef / den;
                b += if neg { -value } else { value };
            } else {
                value = parse_rational(body)?;
                a += if neg { -value } else { value };
            }
        }
        Ok(Self {
            a,
            b,
            d: d.unwrap_or_else(current_radicand),
        })
    }
}

impl QuadraticNumber {
    /// Lossy view for diagnostics.
    pub fn approx(&self) -> f64 {
        self.a.to_f64().unwrap_or(f64::NAN)
            + self.b.to_f64().unwrap_or(f64::NAN) * (self.d as f64).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(s: &str) -> QuadraticNumber {
        s.parse().unwrap()
    }

    #[test]
    fn difference_of_squares() {
        assert_eq!(q("1+√2") * q("1-√2"), QuadraticNumber::from_integer(-1));
    }

    #[test]
    fn lambda_is_positive() {
        assert_eq!(q("3-2√2").signum(), Ordering::Greater);
        assert_eq!(q("2-3√2").signum(), Ordering::Less);
        assert_eq!(q("-3+2√2").signum(), Ordering::Less);
    }

    #[test]
    fn rationalized_inverse() {
        let x = q("2+√2");
        let inv = x.inverse().unwrap();
        assert_eq!(inv, q("1-√2/2"));
        assert_eq!(&x * &inv, QuadraticNumber::from_integer(1));
    }

    #[test]
    fn division_by_zero_and_mismatch() {
        assert_eq!(
            q("1").checked_div(&q("0")).unwrap_err(),
            ScalarError::DivisionByZero
        );
        let a = q("√2");
        let b = q("√3");
        assert!(matches!(a.checked_add(&b), Err(ScalarError::MismatchedField(2, 3))));
        // rationals combine with any field
        assert_eq!(a.checked_add(&q("1")).unwrap().radicand(), 2);
        assert_eq!(q("1").checked_mul(&b).unwrap().radicand(), 3);
    }

    #[test]
    fn square_roots() {
        assert_eq!(q("3-2√2").sqrt().unwrap(), q("√2-1"));
        assert_eq!(q("1/2").sqrt().unwrap(), q("√2/2"));
        assert_eq!(q("9/4").sqrt().unwrap(), q("3/2"));
        assert!(q("2-√2").sqrt().is_none());
        assert!(q("-1").sqrt().is_none());
        assert!(with_field(6, || QuadraticNumber::from_integer(6).sqrt()).is_some());
    }

    #[test]
    fn display_round_trip() {
        for s in ["3-2√2", "√2/2", "-1/2+3√2/4", "7", "-√2", "-2+2√2"] {
            assert_eq!(q(s).to_string(), s);
        }
        assert_eq!(q("sqrt2"), q("√2"));
    }

    #[test]
    fn squarefree_parts() {
        let (s, k) = squarefree_decomposition(&BigInt::from(72));
        assert_eq!((s, k), (BigInt::from(6), BigInt::from(2)));
        assert!(is_squarefree(6));
        assert!(!is_squarefree(12));
    }
}

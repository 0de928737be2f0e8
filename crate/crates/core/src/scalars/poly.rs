use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::{QuadraticNumber, ScalarError};

/// Polynomial in the loop parameter δ with rational coefficients, lowest degree first.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct DeltaPolynomial {
    coeffs: Vec<BigRational>,
}

impl DeltaPolynomial {
    pub fn new(mut coeffs: Vec<BigRational>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn from_integers(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| BigRational::from_integer(c.into())).collect())
    }

    pub fn zero() -> Self {
        Self { coeffs: vec![] }
    }

    pub fn one() -> Self {
        Self::constant(BigRational::one())
    }

    pub fn constant(c: BigRational) -> Self {
        Self::new(vec![c])
    }

    /// The monomial δ.
    pub fn delta() -> Self {
        Self::from_integers(&[0, 1])
    }

    pub fn monomial(c: BigRational, degree: usize) -> Self {
        let mut coeffs = vec![BigRational::zero(); degree + 1];
        coeffs[degree] = c;
        Self::new(coeffs)
    }

    pub fn coefficients(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, with `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Option<&BigRational> {
        self.coeffs.last()
    }

    pub fn as_constant(&self) -> Option<BigRational> {
        match self.coeffs.len() {
            0 => Some(BigRational::zero()),
            1 => Some(self.coeffs[0].clone()),
            _ => None,
        }
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        Self::new(self.coeffs.iter().map(|x| x * c).collect())
    }

    pub fn monic(&self) -> Self {
        match self.leading() {
            Some(l) => self.scale(&l.recip()),
            None => Self::zero(),
        }
    }

    /// Euclidean division; panics on a zero divisor.
    pub fn div_rem(&self, divisor: &Self) -> (Self, Self) {
        let dd = divisor.degree().expect("division by zero polynomial");
        let lead = divisor.leading().unwrap().clone();
        let mut rem = self.coeffs.clone();
        let mut quot = vec![BigRational::zero(); rem.len().saturating_sub(dd).max(1)];
        while rem.len() > dd && !rem.is_empty() {
            let shift = rem.len() - 1 - dd;
            let c = rem.last().unwrap() / &lead;
            for (i, dc) in divisor.coeffs.iter().enumerate() {
                rem[shift + i] -= &c * dc;
            }
            quot[shift] = c;
            rem.pop();
            while rem.last().is_some_and(|c| c.is_zero()) {
                rem.pop();
            }
        }
        (Self::new(quot), Self::new(rem))
    }

    /// Monic greatest common divisor.
    pub fn gcd(&self, other: &Self) -> Self {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    pub fn eval_rational(&self, x: &BigRational) -> BigRational {
        self.coeffs
            .iter()
            .rev()
            .fold(BigRational::zero(), |acc, c| acc * x + c)
    }

    pub fn eval_quadratic(&self, x: &QuadraticNumber) -> QuadraticNumber {
        let zero = QuadraticNumber::rational(BigRational::zero());
        self.coeffs.iter().rev().fold(zero, |acc, c| {
            &(&acc * x) + &QuadraticNumber::rational(c.clone())
        })
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        self.coeffs
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * x + c.to_f64().unwrap_or(f64::NAN))
    }

    /// Sign as δ → +∞.
    pub fn eventual_sign(&self) -> i32 {
        match self.leading() {
            None => 0,
            Some(l) if l.is_positive() => 1,
            Some(_) => -1,
        }
    }
}

impl Add<&DeltaPolynomial> for &DeltaPolynomial {
    type Output = DeltaPolynomial;
    fn add(self, rhs: &DeltaPolynomial) -> DeltaPolynomial {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let z = BigRational::zero();
        DeltaPolynomial::new(
            (0..n)
                .map(|i| self.coeffs.get(i).unwrap_or(&z) + rhs.coeffs.get(i).unwrap_or(&z))
                .collect(),
        )
    }
}

impl Sub<&DeltaPolynomial> for &DeltaPolynomial {
    type Output = DeltaPolynomial;
    fn sub(self, rhs: &DeltaPolynomial) -> DeltaPolynomial {
        self + &(-rhs)
    }
}

impl Mul<&DeltaPolynomial> for &DeltaPolynomial {
    type Output = DeltaPolynomial;
    fn mul(self, rhs: &DeltaPolynomial) -> DeltaPolynomial {
        if self.is_zero() || rhs.is_zero() {
            return DeltaPolynomial::zero();
        }
        let mut out = vec![BigRational::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        DeltaPolynomial::new(out)
    }
}

impl Neg for &DeltaPolynomial {
    type Output = DeltaPolynomial;
    fn neg(self) -> DeltaPolynomial {
        DeltaPolynomial::new(self.coeffs.iter().map(|c| -c).collect())
    }
}

fn fmt_coeff(c: &BigRational) -> String {
    if c.is_integer() {
        c.numer().to_string()
    } else {
        format!("{}/{}", c.numer(), c.denom())
    }
}

impl fmt::Display for DeltaPolynomial {
    /// Highest degree first, e.g. `δ^2-1`, `-1/2δ+3`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut first = true;
        for (deg, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            if first {
                if neg {
                    f.write_str("-")?;
                }
            } else {
                f.write_str(if neg { "-" } else { "+" })?;
            }
            first = false;
            let abs = c.abs();
            let show_coeff = deg == 0 || !abs.is_one();
            if show_coeff {
                f.write_str(&fmt_coeff(&abs))?;
            }
            match deg {
                0 => {}
                1 => f.write_str("δ")?,
                _ => write!(f, "δ^{deg}")?,
            }
        }
        Ok(())
    }
}

/// Rational function in δ, kept in lowest terms with a monic denominator.
///
/// Temperley–Lieb coefficients need these: the Wenzl recursion divides by
/// quantum integers and the normalized Jones projection is `E₁/δ`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DeltaRational {
    num: DeltaPolynomial,
    den: DeltaPolynomial,
}

impl DeltaRational {
    pub fn new(num: DeltaPolynomial, den: DeltaPolynomial) -> Result<Self, ScalarError> {
        if den.is_zero() {
            return Err(ScalarError::DivisionByZero);
        }
        if num.is_zero() {
            return Ok(Self::zero());
        }
        let g = num.gcd(&den);
        let (num, _) = num.div_rem(&g);
        let (den, _) = den.div_rem(&g);
        let lead = den.leading().unwrap().recip();
        Ok(Self {
            num: num.scale(&lead),
            den: den.scale(&lead),
        })
    }

    pub fn zero() -> Self {
        Self {
            num: DeltaPolynomial::zero(),
            den: DeltaPolynomial::one(),
        }
    }

    pub fn one() -> Self {
        Self::from_poly(DeltaPolynomial::one())
    }

    pub fn delta() -> Self {
        Self::from_poly(DeltaPolynomial::delta())
    }

    pub fn from_poly(p: DeltaPolynomial) -> Self {
        Self {
            num: p,
            den: DeltaPolynomial::one(),
        }
    }

    pub fn from_integer(n: i64) -> Self {
        Self::from_poly(DeltaPolynomial::from_integers(&[n]))
    }

    pub fn from_rational(r: BigRational) -> Self {
        Self::from_poly(DeltaPolynomial::constant(r))
    }

    pub fn numerator(&self) -> &DeltaPolynomial {
        &self.num
    }

    pub fn denominator(&self) -> &DeltaPolynomial {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn as_polynomial(&self) -> Option<&DeltaPolynomial> {
        (self.den.degree() == Some(0)).then_some(&self.num)
    }

    pub fn as_rational(&self) -> Option<BigRational> {
        self.as_polynomial().and_then(|p| p.as_constant())
    }

    pub fn inverse(&self) -> Result<Self, ScalarError> {
        Self::new(self.den.clone(), self.num.clone())
    }

    pub fn checked_div(&self, rhs: &Self) -> Result<Self, ScalarError> {
        if rhs.is_zero() {
            return Err(ScalarError::DivisionByZero);
        }
        Self::new(&self.num * &rhs.den, &self.den * &rhs.num)
    }

    pub fn powi(&self, k: u32) -> Self {
        (0..k).fold(Self::one(), |acc, _| &acc * self)
    }

    /// Exact specialization at a quadratic value of δ.
    pub fn eval_quadratic(&self, x: &QuadraticNumber) -> Result<QuadraticNumber, ScalarError> {
        let den = self.den.eval_quadratic(x);
        if den.is_zero() {
            return Err(ScalarError::DivisionByZero);
        }
        self.num.eval_quadratic(x).checked_div(&den)
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        self.num.eval_f64(x) / self.den.eval_f64(x)
    }

    /// Sign as δ → +∞ (the regime of generic symbolic δ).
    pub fn eventual_sign(&self) -> i32 {
        self.num.eventual_sign() * self.den.eventual_sign()
    }
}

impl Default for DeltaRational {
    fn default() -> Self {
        Self::zero()
    }
}

impl Add<&DeltaRational> for &DeltaRational {
    type Output = DeltaRational;
    fn add(self, rhs: &DeltaRational) -> DeltaRational {
        if self.den == rhs.den {
            return DeltaRational::new(&self.num + &rhs.num, self.den.clone()).unwrap();
        }
        DeltaRational::new(
            &(&self.num * &rhs.den) + &(&rhs.num * &self.den),
            &self.den * &rhs.den,
        )
        .unwrap()
    }
}

impl Sub<&DeltaRational> for &DeltaRational {
    type Output = DeltaRational;
    fn sub(self, rhs: &DeltaRational) -> DeltaRational {
        self + &(-rhs)
    }
}

impl Mul<&DeltaRational> for &DeltaRational {
    type Output = DeltaRational;
    fn mul(self, rhs: &DeltaRational) -> DeltaRational {
        if self.is_zero() || rhs.is_zero() {
            return DeltaRational::zero();
        }
        DeltaRational::new(&self.num * &rhs.num, &self.den * &rhs.den).unwrap()
    }
}

impl Div<&DeltaRational> for &DeltaRational {
    type Output = DeltaRational;
    fn div(self, rhs: &DeltaRational) -> DeltaRational {
        self.checked_div(rhs).expect("division by zero rational function")
    }
}

impl Neg for &DeltaRational {
    type Output = DeltaRational;
    fn neg(self) -> DeltaRational {
        DeltaRational {
            num: -&self.num,
            den: self.den.clone(),
        }
    }
}

macro_rules! owned_ops {
    ($($tr:ident $m:ident),*) => {$(
        impl $tr for DeltaRational {
            type Output = DeltaRational;
            fn $m(self, rhs: DeltaRational) -> DeltaRational { (&self).$m(&rhs) }
        }
    )*};
}
owned_ops!(Add add, Sub sub, Mul mul, Div div);

impl Neg for DeltaRational {
    type Output = DeltaRational;
    fn neg(self) -> DeltaRational {
        -&self
    }
}

fn wrap(p: &DeltaPolynomial) -> String {
    let s = p.to_string();
    let terms = p.coefficients().iter().filter(|c| !c.is_zero()).count();
    if terms > 1 {
        format!("({s})")
    } else {
        s
    }
}

impl fmt::Display for DeltaRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.degree() == Some(0) {
            return write!(f, "{}", self.num);
        }
        // monic denominator: a lone δ^k reads better than (δ^k)
        write!(f, "{}/{}", wrap(&self.num), wrap(&self.den))
    }
}

/// Quantum integer `[n]`: `[0]=0`, `[1]=1`, `[k+1] = δ[k] − [k−1]`.
pub fn quantum_integer(n: usize) -> DeltaPolynomial {
    let mut prev = DeltaPolynomial::zero();
    let mut cur = DeltaPolynomial::one();
    if n == 0 {
        return prev;
    }
    for _ in 1..n {
        let next = &(&DeltaPolynomial::delta() * &cur) - &prev;
        prev = cur;
        cur = next;
    }
    cur
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64) -> DeltaRational {
        DeltaRational::from_integer(n)
    }

    #[test]
    fn lowest_terms() {
        let d = DeltaRational::delta();
        let x = &(&(&d * &d) - &r(1)) / &(&d - &r(1));
        assert_eq!(x, &d + &r(1));
        assert_eq!(x.to_string(), "δ+1");
        let y = &r(1) / &d;
        assert_eq!(y.to_string(), "1/δ");
        assert_eq!((&y * &d), r(1));
    }

    #[test]
    fn quantum_integers_are_chebyshev() {
        assert_eq!(quantum_integer(2), DeltaPolynomial::delta());
        assert_eq!(quantum_integer(3).to_string(), "δ^2-1");
        assert_eq!(quantum_integer(4).to_string(), "δ^3-2δ");
        // [n](2) = n at δ = 2
        for n in 1..8 {
            assert_eq!(quantum_integer(n).eval_f64(2.0), n as f64);
        }
    }

    #[test]
    fn evaluate_polynomial() {
        let p = DeltaPolynomial::from_integers(&[-1, 0, 1]);
        assert_eq!(p.eval_f64(2.0), 3.0);
        assert_eq!(p.to_string(), "δ^2-1");
    }

    #[test]
    fn gcd_is_monic() {
        let a = DeltaPolynomial::from_integers(&[-2, 0, 2]); // 2(δ²−1)
        let b = DeltaPolynomial::from_integers(&[3, 3]); // 3(δ+1)
        assert_eq!(a.gcd(&b), DeltaPolynomial::from_integers(&[1, 1]));
    }
}

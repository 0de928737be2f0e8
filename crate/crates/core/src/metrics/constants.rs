use num_complex::Complex64;

use crate::scalars::{evaluate_quadratic, QuadraticNumber};
use crate::spectral::{hermitian_eigen, CMatrix};

use super::MetricsError;

/// `√r` for an exact radicand `r`.
#[derive(Clone, Debug, PartialEq)]
pub struct SsConstant {
    pub radicand: QuadraticNumber,
    /// Present when `r` is a square in the current field.
    pub exact: Option<QuadraticNumber>,
    pub value: f64,
    pub decimal: String,
}

fn root(radicand: QuadraticNumber, bits: u32) -> SsConstant {
    let exact = radicand.sqrt();
    let approx = evaluate_quadratic(&radicand, bits).sqrt();
    let digits = ((bits as f64) * std::f64::consts::LOG10_2).floor() as usize;
    SsConstant { value: approx.to_f64(), decimal: approx.to_decimal(digits.clamp(1, 60)), exact, radicand }
}

/// `√((I − 2)/(I − 1))`.
pub fn ss_constant(index: &QuadraticNumber, bits: u32) -> Result<SsConstant, MetricsError> {
    let two = QuadraticNumber::from_integer(2);
    if !index.checked_sub(&two)?.is_positive() {
        return Err(MetricsError::Degenerate(format!("index {index} must exceed 2")));
    }
    let one = QuadraticNumber::from_integer(1);
    let radicand = index.checked_sub(&two)?.checked_div(&index.checked_sub(&one)?)?;
    Ok(root(radicand, bits))
}

/// The 2×2 model pair and the positive eigenvalue of `A − B`.
#[derive(Clone, Debug)]
pub struct AngleModel {
    pub a: CMatrix,
    pub b: CMatrix,
    /// `(1 − λ)² + λ(1 − λ)`, the square of the positive eigenvalue.
    pub eigenvalue_squared: QuadraticNumber,
    pub eigenvalue: SsConstant,
    /// Largest eigenvalue of `A − B` from a floating-point diagonalization.
    pub float_eigenvalue: f64,
}

pub fn angle_model(lambda: &QuadraticNumber, bits: u32) -> Result<AngleModel, MetricsError> {
    let one = QuadraticNumber::from_integer(1);
    let rest = one.checked_sub(lambda)?;
    if !lambda.is_positive() || !rest.is_positive() {
        return Err(MetricsError::Degenerate(format!("λ = {lambda} must lie in (0, 1)")));
    }
    let cross = lambda.checked_mul(&rest)?;
    let squared = rest.checked_mul(&rest)?.checked_add(&cross)?;
    let (l, s) = (lambda.to_f64(), cross.to_f64().sqrt());
    let c = |x: f64| Complex64::new(x, 0.0);
    let a = CMatrix::from_vec(2, 2, vec![c(1.0), c(0.0), c(0.0), c(0.0)]);
    let b = CMatrix::from_vec(2, 2, vec![c(l), c(s), c(s), c(1.0 - l)]);
    let (vals, _) = hermitian_eigen(&a.sub(&b));
    Ok(AngleModel { a, b, eigenvalue: root(squared.clone(), bits), eigenvalue_squared: squared, float_eigenvalue: vals[1] })
}

//! Exact scalars: the real quadratic fields ℚ(√d), polynomials and rational
//! functions in the loop parameter δ, and fixed-point evaluation.

mod poly;
mod precision;
mod quadratic;

pub use poly::{quantum_integer, DeltaPolynomial, DeltaRational};
pub use precision::{
    evaluate_polynomial, evaluate_quadratic, evaluate_rational_function, Approx, Evaluate,
};
pub use quadratic::{
    current_radicand, is_squarefree, squarefree_decomposition, with_field, QuadraticNumber,
    DEFAULT_RADICAND,
};


use std::cmp::Ordering;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScalarError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("mismatched quadratic fields: √{0} and √{1}")]
    MismatchedField(u64, u64),
    #[error("radicand {0} is not a squarefree integer > 1")]
    NotSquarefree(u64),
    #[error("cannot parse scalar literal `{0}`")]
    Parse(String),
}

/// Binary operation selector for [`quad_arith`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuadOp {
    Add,
    Sub,
    Mul,
    Div,
    Conj,
    Compare,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum QuadResult {
    Value(QuadraticNumber),
    Ordering(Ordering),
}

/// Checked dispatcher over field operations; `Conj` ignores `y`.
pub fn quad_arith(
    x: &QuadraticNumber,
    y: &QuadraticNumber,
    op: QuadOp,
) -> Result<QuadResult, ScalarError> {
    Ok(match op {
        QuadOp::Add => QuadResult::Value(x.checked_add(y)?),
        QuadOp::Sub => QuadResult::Value(x.checked_sub(y)?),
        QuadOp::Mul => QuadResult::Value(x.checked_mul(y)?),
        QuadOp::Div => QuadResult::Value(x.checked_div(y)?),
        QuadOp::Conj => QuadResult::Value(x.conj()),
        QuadOp::Compare => QuadResult::Ordering(x.compare(y)?),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;
    use proptest::prelude::*;

    fn arb_q() -> impl Strategy<Value = QuadraticNumber> {
        (-20i64..20, 1i64..8, -20i64..20, 1i64..8).prop_map(|(a, b, c, d)| {
            QuadraticNumber::new(
                BigRational::new(a.into(), b.into()),
                BigRational::new(c.into(), d.into()),
                2,
            )
            .unwrap()
        })
    }

    proptest! {
        #[test]
        fn field_axioms(x in arb_q(), y in arb_q(), z in arb_q()) {
            prop_assert_eq!(&(&x * &y) * &z, &x * &(&y * &z));
            prop_assert_eq!(&x * &(&y + &z), &(&x * &y) + &(&x * &z));
            prop_assert_eq!(&(&x + &y) + &z, &x + &(&y + &z));
            if !x.is_zero() {
                prop_assert_eq!(&x * &x.inverse().unwrap(), QuadraticNumber::from_integer(1));
            }
        }

        #[test]
        fn evaluation_is_multiplicative(x in arb_q(), y in arb_q()) {
            let bits = 64;
            let xy = evaluate_quadratic(&(&x * &y), bits).to_f64();
            let prod = evaluate_quadratic(&x, bits).to_f64() * evaluate_quadratic(&y, bits).to_f64();
            let scale = 1.0 + x.approx().abs() * y.approx().abs();
            prop_assert!((xy - prod).abs() <= 1e-13 * scale);
        }

        #[test]
        fn compare_agrees_with_floats(x in arb_q(), y in arb_q()) {
            if let QuadResult::Ordering(o) = quad_arith(&x, &y, QuadOp::Compare).unwrap() {
                let fx = x.approx();
                let fy = y.approx();
                if (fx - fy).abs() > 1e-9 {
                    prop_assert_eq!(o, fx.partial_cmp(&fy).unwrap());
                }
            }
        }
    }

    #[test]
    fn dispatcher() {
        let x: QuadraticNumber = "1+√2".parse().unwrap();
        let y: QuadraticNumber = "1-√2".parse().unwrap();
        assert_eq!(
            quad_arith(&x, &y, QuadOp::Mul).unwrap(),
            QuadResult::Value(QuadraticNumber::from_integer(-1))
        );
        assert_eq!(
            quad_arith(&x, &y, QuadOp::Conj).unwrap(),
            QuadResult::Value(y.clone())
        );
        assert_eq!(
            quad_arith(&"3-2√2".parse().unwrap(), &QuadraticNumber::from_integer(0), QuadOp::Compare)
                .unwrap(),
            QuadResult::Ordering(Ordering::Greater)
        );
        assert!(quad_arith(&x, &QuadraticNumber::from_integer(0), QuadOp::Div).is_err());
    }
}

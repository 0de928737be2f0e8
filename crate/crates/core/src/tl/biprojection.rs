use crate::scalars::DeltaRational;

use super::{PlanarDiagram, TLElement, TlError};

#[derive(Clone, Debug, PartialEq)]
pub struct BiprojectionReport {
    pub is_biprojection: bool,
    pub projection: bool,
    pub dominates_jones: bool,
    /// `c` with `F(q)² = c·F(q)`, when it exists.
    pub rotation_scalar: Option<DeltaRational>,
    pub rotation_positive: bool,
    /// Basis diagrams `x` with `q·(q∘x) ≠ q∘(q·x)`.
    pub exchange_failures: usize,
    pub exchange_checked: usize,
}

fn sign_of(c: &DeltaRational, delta: Option<f64>) -> i32 {
    match delta {
        Some(v) => {
            let x = c.eval_f64(v);
            if x > 0.0 {
                1
            } else if x < 0.0 {
                -1
            } else {
                0
            }
        }
        None => c.eventual_sign(),
    }
}

/// Scalar `c` with `r² = c·r`, if any.
fn idempotent_scalar(r: &TLElement) -> Result<Option<DeltaRational>, TlError> {
    let sq = r.compose(r)?;
    let Some((d, coeff)) = r.terms().iter().next() else {
        return Ok(None);
    };
    let c = &sq.coefficient(d) / coeff;
    Ok((sq == r.scale(&c)).then_some(c))
}

/// Biprojection test for a 2-box; `delta` fixes a numeric regime for signs,
/// otherwise signs are taken as δ → ∞.
pub fn is_biprojection(q: &TLElement, delta: Option<f64>) -> Result<BiprojectionReport, TlError> {
    if q.box_size() != 2 {
        return Err(TlError::BoxSize(format!("biprojection test needs a 2-box, have {}", q.box_size())));
    }
    let projection = q.is_projection();
    let e = TLElement::generator(2, 1)?;
    let dominates_jones = q.compose(&e)? == e;
    let r = q.rotate()?;
    let rotation_scalar = idempotent_scalar(&r)?;
    let rotation_positive = rotation_scalar.as_ref().map_or(false, |c| sign_of(c, delta) > 0);

    let basis = PlanarDiagram::enumerate(2);
    let mut exchange_failures = 0;
    for d in &basis {
        let x = TLElement::from_diagram(d.clone());
        let lhs = q.compose(&q.comultiply(&x)?)?;
        let rhs = q.comultiply(&q.compose(&x)?)?;
        if lhs != rhs {
            exchange_failures += 1;
        }
    }
    Ok(BiprojectionReport {
        is_biprojection: projection && dominates_jones && rotation_positive,
        projection,
        dominates_jones,
        rotation_scalar,
        rotation_positive,
        exchange_failures,
        exchange_checked: basis.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tl::jones_wenzl;

    #[test]
    fn standard_cases() {
        let inv = DeltaRational::delta().inverse().unwrap();
        let e = TLElement::generator(2, 1).unwrap().scale(&inv);
        let r = is_biprojection(&e, None).unwrap();
        assert!(r.is_biprojection);
        assert_eq!(r.exchange_failures, 0);
        assert!(is_biprojection(&TLElement::identity(2), None).unwrap().is_biprojection);
        let p2 = jones_wenzl(2).unwrap();
        let r = is_biprojection(&p2, None).unwrap();
        assert!(!r.is_biprojection);
        assert!(r.rotation_scalar.is_none());
    }
}

use crate::field::Field;
use crate::inclusions::{BasicConstruction, Inclusion, InclusionError, PimsnerPopaBasis};
use crate::linalg::Matrix;

use super::{check_unitary, MetricsError};

#[derive(Clone, Debug)]
pub struct WahpSample<F: Field> {
    /// `Σ_{i,j≥2} ‖E_N(λᵢ* u λⱼ)‖₂²`.
    pub sum: F,
    pub residual: f64,
    /// Zero-based indices of the largest term.
    pub max_pair: (usize, usize),
    pub max_norm: f64,
    pub bound_holds: bool,
}

#[derive(Clone, Debug)]
pub struct WahpReport<F: Field> {
    pub basis_size: usize,
    /// `[M:N] − 1`.
    pub target: F,
    /// `√([M:N] − 1)/(k − 1)`.
    pub bound: f64,
    pub samples: Vec<WahpSample<F>>,
    pub max_residual: f64,
    /// `1 − e_N`.
    pub obstruction: Matrix<F>,
    pub obstruction_trace: F,
    pub obstruction_valid: bool,
}

/// Sum identity and pair bound over the given unitaries of `N`.
pub fn wahp_witness<F: Field>(
    inc: &Inclusion<F>,
    bc: &BasicConstruction<F>,
    basis: &PimsnerPopaBasis<F>,
    unitaries: &[Matrix<F>],
) -> Result<WahpReport<F>, MetricsError> {
    let index = bc.index().clone();
    let target = index.sub_ref(&F::one());
    if target.re() <= 1e-12 {
        return Err(MetricsError::Degenerate(format!("index {index} must exceed 1")));
    }
    let k = basis.len();
    if k < 2 {
        return Err(MetricsError::Degenerate("basis has a single element".into()));
    }
    let bound = target.re().sqrt() / (k - 1) as f64;
    let mut samples = Vec::new();
    for u in unitaries {
        check_unitary(inc, u)?;
        if !inc.n().contains(u) {
            return Err(InclusionError::NotInAlgebra("u must lie in N".into()).into());
        }
        let mut sum = F::zero();
        let mut max_pair = (1, 1);
        let mut max_norm = -1.0;
        for i in 1..k {
            let left = basis.lambdas[i].adjoint().mul(u);
            for j in 1..k {
                let term = inc.norm2_sq(&inc.cond_expect(&left.mul(&basis.lambdas[j]))?);
                let norm = term.re().max(0.0).sqrt();
                if norm > max_norm {
                    max_norm = norm;
                    max_pair = (i, j);
                }
                sum = sum.add_ref(&term);
            }
        }
        let residual = sum.sub_ref(&target).magnitude();
        samples.push(WahpSample { sum, residual, max_pair, max_norm, bound_holds: max_norm + 1e-12 >= bound });
    }
    let e = bc.e_n();
    let obstruction = Matrix::identity(e.rows()).sub(e);
    let obstruction_trace = bc.tr(&obstruction);
    let n_gens: Vec<Matrix<F>> = inc.n().generating_set().iter().map(|x| bc.left(x)).collect();
    let obstruction_valid = bc.contains(&obstruction)
        && obstruction.mul(&obstruction).approx_eq(&obstruction)
        && n_gens.iter().all(|g| g.commutator(&obstruction).is_zero())
        && e.mul(&obstruction).is_zero()
        && obstruction_trace.approx_eq(&target);
    Ok(WahpReport {
        basis_size: k,
        target,
        bound,
        max_residual: samples.iter().map(|s| s.residual).fold(0.0, f64::max),
        samples,
        obstruction,
        obstruction_trace,
        obstruction_valid,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inclusions::{basic_construction, build_group_inclusion, build_matrix_inclusion, pimsner_popa_basis, PermGroup};
    use crate::metrics::random_unitaries;
    use crate::scalars::QuadraticNumber as Q;
    use num_complex::Complex64;

    #[test]
    fn s3_transposition_sum_is_two() {
        let g = PermGroup::named("S3").unwrap();
        let exact: Inclusion<Q> = build_group_inclusion(&g, &[g.parse_element("(12)").unwrap()]).unwrap();
        let bc = basic_construction(&exact).unwrap();
        let basis = pimsner_popa_basis(&exact, &bc).unwrap();
        let s = g.regular::<Q>(&g.parse_element("(12)").unwrap());
        let r = wahp_witness(&exact, &bc, &basis, &[Matrix::identity(6), s]).unwrap();
        assert!(r.samples.iter().all(|x| x.sum == Q::from_integer(2)));
        assert!(r.obstruction_valid);

        let inc = exact.to_float();
        let bc = basic_construction(&inc).unwrap();
        let basis = pimsner_popa_basis(&inc, &bc).unwrap();
        let us = random_unitaries(inc.n(), 20, 8);
        let r = wahp_witness(&inc, &bc, &basis, &us).unwrap();
        assert!(r.max_residual < 1e-8);
        assert!(r.samples.iter().all(|x| x.bound_holds));
        assert!((r.bound - 2f64.sqrt() / 2.0).abs() < 1e-12);
    }

    #[test]
    fn unitaries_outside_n_are_rejected() {
        let g = PermGroup::named("S3").unwrap();
        let inc: Inclusion<Complex64> = build_group_inclusion(&g, &[g.parse_element("(12)").unwrap()]).unwrap();
        let bc = basic_construction(&inc).unwrap();
        let basis = pimsner_popa_basis(&inc, &bc).unwrap();
        let u = g.regular::<Complex64>(&g.parse_element("(23)").unwrap());
        assert!(wahp_witness(&inc, &bc, &basis, &[u]).is_err());
    }

    #[test]
    fn index_one_is_rejected() {
        let gens = vec![Matrix::unit(2, 0, 1), Matrix::unit(2, 1, 0)];
        let inc: Inclusion<Q> = build_matrix_inclusion("M2 in M2", 2, gens.clone(), gens, None).unwrap();
        let bc = basic_construction(&inc).unwrap();
        let basis = pimsner_popa_basis(&inc, &bc).unwrap();
        assert!(matches!(wahp_witness(&inc, &bc, &basis, &[]), Err(MetricsError::Degenerate(_))));
    }
}

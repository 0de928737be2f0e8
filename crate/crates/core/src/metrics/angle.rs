use num_complex::Complex64;

use crate::field::Field;
use crate::inclusions::{subspace_projection, BasicConstruction, Inclusion, StarAlgebra};
use crate::linalg::Matrix;
use crate::spectral::{hermitian_eigen, CMatrix};

use super::MetricsError;

/// Spectrum of `e_P e_Q e_P` on `L²(M) ⊖ L²(N)`.
#[derive(Clone, Debug, PartialEq)]
pub struct AngleReport {
    /// Descending, clamped to `[0, 1]`.
    pub eigenvalues: Vec<f64>,
    /// `arccos √μ`, ascending.
    pub angles: Vec<f64>,
    pub lambda_min: f64,
    pub lambda_max: f64,
}

pub fn angle<F: Field>(
    inc: &Inclusion<F>,
    bc: &BasicConstruction<F>,
    p: &StarAlgebra<F>,
    q: &StarAlgebra<F>,
) -> Result<AngleReport, MetricsError> {
    let ep = subspace_projection(inc, bc, p, p)?;
    let eq = subspace_projection(inc, bc, q, q)?;

    // Pass to orthonormal coordinates: T ↦ G^{1/2} T G^{-1/2}.
    let gram = bc.gns().gram().to_complex();
    let (vals, vecs) = hermitian_eigen(&gram);
    let n = gram.rows();
    let diag = |f: &dyn Fn(f64) -> f64| {
        CMatrix::from_fn(n, n, |i, j| if i == j { Complex64::new(f(vals[i]), 0.0) } else { Complex64::new(0.0, 0.0) })
    };
    let s = vecs.mul(&diag(&|x| x.sqrt())).mul(&vecs.adjoint());
    let si = vecs.mul(&diag(&|x| 1.0 / x.sqrt())).mul(&vecs.adjoint());
    let on = |t: &Matrix<F>| s.mul(&t.to_complex()).mul(&si);
    let (ep, eq, en) = (on(&ep), on(&eq), on(bc.e_n()));

    let complement = CMatrix::identity(n).sub(&en);
    let (cv, cvecs) = hermitian_eigen(&complement);
    let cols: Vec<Vec<Complex64>> = (0..n).filter(|&j| cv[j] > 0.5).map(|j| cvecs.col_vec(j)).collect();
    if cols.is_empty() {
        return Err(MetricsError::Degenerate("L²(M) ⊖ L²(N) is zero".into()));
    }
    let w = CMatrix::from_columns(n, &cols);
    let x = w.adjoint().mul(&ep).mul(&eq).mul(&ep).mul(&w);
    let (mut mus, _) = hermitian_eigen(&x);
    for m in mus.iter_mut() {
        *m = m.clamp(0.0, 1.0);
    }
    mus.reverse();
    let angles: Vec<f64> = mus.iter().map(|m| m.sqrt().acos()).collect();
    Ok(AngleReport {
        lambda_min: *mus.last().expect("nonempty"),
        lambda_max: mus[0],
        eigenvalues: mus,
        angles,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inclusions::{basic_construction, build_group_inclusion, InclusionError, PermGroup};
    use crate::scalars::{with_field, QuadraticNumber as Q};

    #[test]
    fn commuting_square_is_orthogonal() {
        let g = PermGroup::named("Z2xZ2").unwrap();
        let inc: Inclusion<Q> = build_group_inclusion(&g, &[]).unwrap();
        let bc = basic_construction(&inc).unwrap();
        let p = inc.subgroup_algebra(&[g.parse_element("a").unwrap()]).unwrap();
        let q = inc.subgroup_algebra(&[g.parse_element("b").unwrap()]).unwrap();
        let r = angle(&inc, &bc, &p, &q).unwrap();
        assert_eq!(r.eigenvalues.len(), 3);
        assert!(r.angles.iter().all(|a| (a - std::f64::consts::FRAC_PI_2).abs() < 1e-9));
    }

    #[test]
    fn s3_pair_and_symmetry() {
        with_field(6, || {
            let g = PermGroup::named("S3").unwrap();
            let inc: Inclusion<Q> = build_group_inclusion(&g, &[]).unwrap();
            let bc = basic_construction(&inc).unwrap();
            let p = inc.subgroup_algebra(&[g.parse_element("(12)").unwrap()]).unwrap();
            let q = inc.subgroup_algebra(&[g.parse_element("(13)").unwrap()]).unwrap();
            let a = angle(&inc, &bc, &p, &q).unwrap();
            let b = angle(&inc, &bc, &q, &p).unwrap();
            assert_eq!(a.eigenvalues.len(), 5);
            for (x, y) in a.eigenvalues.iter().zip(&b.eigenvalues) {
                assert!((x - y).abs() < 1e-12);
            }
            assert!(a.lambda_max < 1e-12);
            let pp = angle(&inc, &bc, &p, &p).unwrap();
            assert!((pp.lambda_max - 1.0).abs() < 1e-12);
        });
    }

    #[test]
    fn rejects_non_intermediate() {
        let g = PermGroup::named("S3").unwrap();
        let inc: Inclusion<Q> = build_group_inclusion(&g, &[g.parse_element("(12)").unwrap()]).unwrap();
        let bc = basic_construction(&inc).unwrap();
        let q = StarAlgebra::generated(6, vec![g.regular(&g.parse_element("(13)").unwrap())]).unwrap();
        let err = angle(&inc, &bc, &q, &q).unwrap_err();
        assert!(matches!(err, MetricsError::Inclusion(InclusionError::NotIntermediate(_))));
    }
}

use crate::field::Field;
use crate::inclusions::{relative_commutant, BasicConstruction, Inclusion};
use crate::linalg::Matrix;

use super::{check_unitary, field_le, MetricsError};

/// `h = E_{(uNu*)'∩M₁}(e_N)` with the identities it is checked against.
#[derive(Clone, Debug)]
pub struct MinimalElement<F: Field> {
    pub h: Matrix<F>,
    pub commutant_dim: usize,
    pub in_commutant: bool,
    /// `‖u − E_N(u)‖₂²`.
    pub k: F,
    /// `[M:N] − 1`.
    pub lambda: F,
    pub trace_h: F,
    pub tr_en_h: F,
    pub tr_h_squared: F,
    /// `Tr`-orthogonal coefficients of `e_N` on `ue_Nu*` and `ue_N^⊥u*`.
    pub span_coefficients: (F, F),
    /// `(1 − k, k/λ)`.
    pub expected_coefficients: (F, F),
    /// `k(2 − (1 + 1/λ)k)`, which is `1 − Tr(e_N h₂)` for the two-term projection `h₂`.
    pub chain_lhs: F,
    /// `1 − Tr(e_N h)`.
    pub chain_rhs: F,
    /// Whether `h` equals the two-term formula; only decided for a 2-dimensional commutant.
    pub two_dim_formula: Option<bool>,
}

impl<F: Field> MinimalElement<F> {
    pub fn trace_residual(&self) -> f64 {
        self.trace_h.sub_ref(&F::one()).magnitude()
    }

    pub fn exchange_residual(&self) -> f64 {
        self.tr_en_h.sub_ref(&self.tr_h_squared).magnitude()
    }

    pub fn coefficient_residual(&self) -> f64 {
        let (a, b) = &self.span_coefficients;
        let (x, y) = &self.expected_coefficients;
        a.sub_ref(x).magnitude().max(b.sub_ref(y).magnitude())
    }

    /// `1 − Tr(e_N h) ≤ estimate²`; a flag, since the estimate only bounds the norm from below.
    pub fn below_norm(&self, estimate: f64) -> bool {
        self.chain_rhs.re() <= estimate * estimate + 1e-9
    }

    /// `1 − Tr(e_N h) ≤ k(2 − (1 + 1/λ)k)`, since the commutant contains both `ue_Nu*` and `ue_N^⊥u*`.
    pub fn chain_bounded(&self) -> bool {
        field_le(&self.chain_rhs, &self.chain_lhs)
    }

    pub fn chain_equal(&self) -> bool {
        self.chain_lhs.approx_eq(&self.chain_rhs)
    }
}

pub fn minimal_element<F: Field>(
    inc: &Inclusion<F>,
    bc: &BasicConstruction<F>,
    u: &Matrix<F>,
) -> Result<MinimalElement<F>, MetricsError> {
    check_unitary(inc, u)?;
    let us = u.adjoint();
    let lu = bc.left(u);
    let lus = bc.left(&us);
    let gens: Vec<Matrix<F>> =
        inc.n().generating_set().iter().map(|n| bc.left(&u.mul(n).mul(&us))).collect();
    let commutant = relative_commutant(&gens, bc.m1_basis(), |s, t| bc.tr_inner(s, t));
    let e = bc.e_n();
    let mut h = Matrix::zeros(e.rows(), e.cols());
    for c in &commutant {
        let cc = bc.tr_inner(c, c);
        let coef = bc
            .tr_inner(e, c)
            .div_ref(&cc)
            .ok_or_else(|| MetricsError::Degenerate("Tr vanishes on the relative commutant".into()))?;
        h = h.add(&c.scale(&coef));
    }
    let in_commutant = bc.contains(&h) && gens.iter().all(|g| g.commutator(&h).is_zero());

    let index = bc.index().clone();
    let lambda = index.sub_ref(&F::one());
    if lambda.is_zero() {
        return Err(MetricsError::Degenerate("index 1 leaves no room for e_N^⊥".into()));
    }
    let k = inc.norm2_sq(&u.sub(&inc.cond_expect(u)?));
    let one = Matrix::identity(e.rows());
    let ue = lu.mul(e).mul(&lus);
    let uep = lu.mul(&one.sub(e)).mul(&lus);
    let coef = |x: &Matrix<F>| -> Result<F, MetricsError> {
        bc.tr_inner(e, x)
            .div_ref(&bc.tr_inner(x, x))
            .ok_or_else(|| MetricsError::Degenerate("zero projection".into()))
    };
    let span_coefficients = (coef(&ue)?, coef(&uep)?);
    let k_over_lambda = k.div_ref(&lambda).expect("λ ≠ 0");
    let expected_coefficients = (F::one().sub_ref(&k), k_over_lambda.clone());
    let trace_h = bc.tr(&h);
    let tr_en_h = bc.tr(&e.mul(&h));
    let tr_h_squared = bc.tr(&h.mul(&h));
    let inv = lambda.inv().expect("λ ≠ 0");
    let two = F::from_i64(2);
    let chain_lhs = k.mul_ref(&two.sub_ref(&F::one().add_ref(&inv).mul_ref(&k)));
    let chain_rhs = F::one().sub_ref(&tr_en_h);
    let two_dim_formula = (commutant.len() == 2).then(|| {
        let h2 = ue.scale(&expected_coefficients.0).add(&uep.scale(&expected_coefficients.1));
        h2.approx_eq(&h)
    });
    Ok(MinimalElement {
        h,
        commutant_dim: commutant.len(),
        in_commutant,
        k,
        lambda,
        trace_h,
        tr_en_h,
        tr_h_squared,
        span_coefficients,
        expected_coefficients,
        chain_lhs,
        chain_rhs,
        two_dim_formula,
    })
}

/// Roots of `(λ² + λ)β² − (λ + k + λk)β + k`.
#[derive(Clone, Debug, PartialEq)]
pub struct BetaRoots<F: Field> {
    /// `k/λ` and `1/(1 + λ)`.
    pub roots: (F, F),
    pub double_root: bool,
    pub residuals: (F, F),
}

pub fn beta_quadratic<F: Field>(lambda: &F, k: &F) -> Result<BetaRoots<F>, MetricsError> {
    if lambda.is_zero() || lambda.re() < 0.0 {
        return Err(MetricsError::Degenerate(format!("λ = {lambda} must be positive")));
    }
    if k.re() < -1e-12 || k.re() > 1.0 + 1e-12 {
        return Err(MetricsError::Degenerate(format!("k = {k} must lie in [0, 1]")));
    }
    let one = F::one();
    let a = lambda.mul_ref(lambda).add_ref(lambda);
    let b = lambda.add_ref(k).add_ref(&lambda.mul_ref(k));
    let poly = |x: &F| a.mul_ref(x).mul_ref(x).sub_ref(&b.mul_ref(x)).add_ref(k);
    let r1 = k.div_ref(lambda).expect("λ ≠ 0");
    let r2 = one.add_ref(lambda).inv().expect("λ > 0");
    let residuals = (poly(&r1), poly(&r2));
    if !residuals.0.is_zero() || !residuals.1.is_zero() {
        return Err(MetricsError::Degenerate("back-substitution failed".into()));
    }
    Ok(BetaRoots { double_root: r1.approx_eq(&r2), roots: (r1, r2), residuals })
}

#[derive(Clone, Debug, PartialEq)]
pub struct Corollary32<F: Field> {
    /// `k ≤ (I − 1)/I`.
    pub applicable: bool,
    /// `2 − (1 + 1/λ)k`.
    pub factor: F,
    pub holds: bool,
}

/// With `k ≤ (I−1)/I` the factor `2 − (1 + 1/λ)k` is at least `1`.
pub fn corollary32_check<F: Field>(index: &F, k: &F) -> Result<Corollary32<F>, MetricsError> {
    let one = F::one();
    let lambda = index.sub_ref(&one);
    let inv = lambda.inv().ok_or_else(|| MetricsError::Degenerate("index 1".into()))?;
    let threshold = lambda.div_ref(index).expect("index ≠ 0");
    let factor = F::from_i64(2).sub_ref(&one.add_ref(&inv).mul_ref(k));
    let applicable = field_le(k, &threshold);
    let holds = !applicable || field_le(&one, &factor);
    Ok(Corollary32 { applicable, factor, holds })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inclusions::{basic_construction, build_group_inclusion, PermGroup};
    use crate::metrics::random_unitaries;
    use crate::scalars::{with_field, QuadraticNumber as Q};
    use num_complex::Complex64;

    fn s3() -> (PermGroup, Inclusion<Q>) {
        let g = PermGroup::named("S3").unwrap();
        let inc = build_group_inclusion(&g, &[g.parse_element("(12)").unwrap()]).unwrap();
        (g, inc)
    }

    #[test]
    fn unitary_in_n_gives_e_n() {
        let (g, inc) = s3();
        let bc = basic_construction(&inc).unwrap();
        let u = g.regular::<Q>(&g.parse_element("(12)").unwrap());
        let m = minimal_element(&inc, &bc, &u).unwrap();
        assert_eq!(&m.h, bc.e_n());
        assert_eq!(m.k, Q::from_integer(0));
    }

    #[test]
    fn transposition_outside_n() {
        let (g, inc) = s3();
        let bc = basic_construction(&inc).unwrap();
        let u = g.regular::<Q>(&g.parse_element("(23)").unwrap());
        let m = minimal_element(&inc, &bc, &u).unwrap();
        assert!(m.in_commutant);
        assert_eq!(m.k, Q::from_integer(1));
        assert_eq!(m.trace_h, Q::from_integer(1));
        assert_eq!(m.tr_en_h, m.tr_h_squared);
        assert_eq!(m.span_coefficients, m.expected_coefficients);
        assert!(m.chain_bounded());
        assert_eq!(m.two_dim_formula, None);
    }

    #[test]
    fn random_float_unitaries() {
        let (_, exact) = s3();
        let inc = exact.to_float();
        let bc = basic_construction(&inc).unwrap();
        for u in random_unitaries(inc.m(), 10, 2) {
            let m = minimal_element(&inc, &bc, &u).unwrap();
            assert!(m.in_commutant);
            assert!(m.trace_residual() < 1e-10 && m.exchange_residual() < 1e-10);
            assert!(m.coefficient_residual() < 1e-10);
            assert!(m.chain_bounded());
        }
    }

    #[test]
    fn beta_examples() {
        let r = beta_quadratic(&Q::from_integer(2), &Q::from_integer(0)).unwrap();
        assert_eq!(r.roots, (Q::from_integer(0), Q::from_ratio(1, 3)));
        with_field(2, || {
            let l = Q::from_parts((1, 1), (1, 1), 2).unwrap();
            let r = beta_quadratic(&l, &Q::from_ratio(1, 2)).unwrap();
            let two = Q::from_integer(2);
            assert_eq!(r.roots.0, two.mul_ref(&l).inv().unwrap());
            assert_eq!(r.roots.1, two.add_ref(&Q::sqrt_radicand(2).unwrap()).inv().unwrap());
            assert!(!r.double_root);
        });
        let l = Q::from_integer(3);
        let r = beta_quadratic(&l, &Q::from_ratio(3, 4)).unwrap();
        assert!(r.double_root);
        assert!(beta_quadratic(&Q::from_integer(0), &Q::from_integer(0)).is_err());
        let f = beta_quadratic(&Complex64::new(1.5, 0.0), &Complex64::new(0.3, 0.0)).unwrap();
        assert!(f.residuals.0.norm() < 1e-12);
    }

    #[test]
    fn corollary_cases() {
        let three = Q::from_integer(3);
        let c = corollary32_check(&three, &Q::from_integer(0)).unwrap();
        assert!(c.applicable && c.holds);
        let c = corollary32_check(&three, &Q::from_ratio(2, 3)).unwrap();
        assert!(c.applicable && c.holds);
        assert_eq!(c.factor, Q::from_integer(1));
        let c = corollary32_check(&three, &Q::from_integer(1)).unwrap();
        assert!(!c.applicable);
    }
}

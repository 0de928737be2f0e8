use crate::field::Field;
use crate::linalg::{Frame, Matrix, SpanBuilder};
use crate::tl::TLElement;

use super::{
    pimsner_popa_basis, relative_commutant, tower_step, BasicConstruction, Inclusion, InclusionError,
    PimsnerPopaBasis, StarAlgebra, TowerStep,
};

/// Intermediate algebras `N ⊆ P, Q ⊆ M` with `P ∨ Q = M` and `P ∩ Q = N`.
#[derive(Clone, Debug)]
pub struct Quadrilateral<F: Field> {
    pub inclusion: Inclusion<F>,
    pub p: StarAlgebra<F>,
    pub q: StarAlgebra<F>,
}

impl<F: Field> Quadrilateral<F> {
    pub fn new(inclusion: Inclusion<F>, p: StarAlgebra<F>, q: StarAlgebra<F>) -> Result<Self, InclusionError> {
        for (name, a) in [("P", &p), ("Q", &q)] {
            if !a.contains_algebra(inclusion.n()) || !inclusion.m().contains_algebra(a) {
                return Err(InclusionError::NotIntermediate(format!("{name} is not between N and M")));
            }
        }
        let mut gens = p.generating_set().to_vec();
        gens.extend(q.generating_set().iter().cloned());
        let joined = StarAlgebra::generated(inclusion.size(), gens)?;
        if joined.dim() != inclusion.m().dim() {
            return Err(InclusionError::NotIntermediate("P and Q do not generate M".into()));
        }
        let mut span = SpanBuilder::new(inclusion.size() * inclusion.size());
        for b in p.basis().iter().chain(q.basis()) {
            span.insert(b.entries());
        }
        let meet = p.dim() + q.dim() - span.dim();
        if meet != inclusion.n().dim() {
            return Err(InclusionError::NotIntermediate("P ∩ Q is larger than N".into()));
        }
        Ok(Quadrilateral { inclusion, p, q })
    }

    pub fn to_float(&self) -> Quadrilateral<num_complex::Complex64> {
        let c = |x: &F| x.to_complex();
        Quadrilateral { inclusion: self.inclusion.to_float(), p: self.p.map(c), q: self.q.map(c) }
    }
}

/// Orthogonal projection of `L²(M)` onto `span{pq : p ∈ P, q ∈ Q}`.
pub fn subspace_projection<F: Field>(
    inc: &Inclusion<F>,
    bc: &BasicConstruction<F>,
    p: &StarAlgebra<F>,
    q: &StarAlgebra<F>,
) -> Result<Matrix<F>, InclusionError> {
    for (name, a) in [("P", p), ("Q", q)] {
        if !a.contains_algebra(inc.n()) || !inc.m().contains_algebra(a) {
            return Err(InclusionError::NotIntermediate(format!("{name} is not between N and M")));
        }
    }
    let mut vectors = Vec::new();
    for x in p.basis() {
        for y in q.basis() {
            vectors.push(bc.gns().vector(&x.mul(y))?);
        }
    }
    Ok(bc.gns().projection(&vectors))
}

/// The second tower level together with `φ : N'∩M₁ → M'∩M₂`.
#[derive(Clone, Debug)]
pub struct FourierModel<F: Field> {
    pub tower: TowerStep<F>,
    pub basis: PimsnerPopaBasis<F>,
    pub delta: F,
    relative: Vec<Matrix<F>>,
    images: Frame<F>,
    n_gens: Vec<Matrix<F>>,
}

impl<F: Field> FourierModel<F> {
    pub fn new(inc: &Inclusion<F>, bc: &BasicConstruction<F>) -> Result<Self, InclusionError> {
        let delta = bc.index().sqrt().ok_or_else(|| match bc.index().to_quadratic() {
            Some(q) => InclusionError::NeedsSqrt(q),
            None => InclusionError::Degenerate("negative index".into()),
        })?;
        let tower = tower_step(bc)?;
        let basis = pimsner_popa_basis(inc, bc)?;
        let n_gens: Vec<Matrix<F>> = inc.n().generating_set().iter().map(|x| bc.left(x)).collect();
        let relative = relative_commutant(&n_gens, bc.m1_basis(), |a, b| bc.tr_inner(a, b));
        let mut model = FourierModel {
            tower,
            basis,
            delta,
            relative: Vec::new(),
            images: Frame::new(Vec::new()).expect("empty frame"),
            n_gens,
        };
        let images: Vec<Vec<F>> = relative.iter().map(|x| model.phi_unchecked(bc, x).entries().to_vec()).collect();
        model.images = Frame::new(images)
            .ok_or_else(|| InclusionError::Degenerate("φ is not injective on N'∩M₁".into()))?;
        model.relative = relative;
        Ok(model)
    }

    /// Basis of `N'∩M₁`.
    pub fn relative_commutant(&self) -> &[Matrix<F>] {
        &self.relative
    }

    fn phi_unchecked(&self, bc: &BasicConstruction<F>, x: &Matrix<F>) -> Matrix<F> {
        let core = self.tower.lift(x).mul(self.tower.e_m()).mul(&self.tower.lift(bc.e_n()));
        let mut out = Matrix::zeros(core.rows(), core.cols());
        for l in &self.basis.lambdas {
            let a = self.tower.lift(&bc.left(l));
            let b = self.tower.lift(&bc.left(&l.adjoint()));
            out = out.add(&a.mul(&core).mul(&b));
        }
        out.scale(&self.delta)
    }

    pub fn in_domain(&self, bc: &BasicConstruction<F>, x: &Matrix<F>) -> bool {
        bc.contains(x) && self.n_gens.iter().all(|g| g.mul(x).approx_eq(&x.mul(g)))
    }

    pub fn phi(&self, bc: &BasicConstruction<F>, x: &Matrix<F>) -> Result<Matrix<F>, InclusionError> {
        if !self.in_domain(bc, x) {
            return Err(InclusionError::NotInAlgebra("φ is defined on N'∩M₁".into()));
        }
        Ok(self.phi_unchecked(bc, x))
    }

    pub fn phi_inverse(&self, y: &Matrix<F>) -> Result<Matrix<F>, InclusionError> {
        let c = self
            .images
            .try_coords(y.entries())
            .ok_or_else(|| InclusionError::NotInAlgebra("not in the image of φ".into()))?;
        let mut out = Matrix::zeros(self.relative[0].rows(), self.relative[0].cols());
        for (ci, r) in c.iter().zip(&self.relative) {
            if !ci.is_zero() {
                out = out.add(&r.scale(ci));
            }
        }
        Ok(out)
    }

    /// `dim N'∩M₁`, `rank φ`, and `dim M'∩M₂` when it is cheap to compute.
    pub fn bijection_ranks(&self, bc: &BasicConstruction<F>) -> (usize, usize, Option<usize>) {
        let target = (self.tower.gns().dim() <= 24).then(|| self.tower.m_prime_m2(bc).len());
        (self.relative.len(), self.images.len(), target)
    }
}

pub fn fourier_phi<F: Field>(
    model: &FourierModel<F>,
    bc: &BasicConstruction<F>,
    x: &Matrix<F>,
) -> Result<Matrix<F>, InclusionError> {
    model.phi(bc, x)
}

/// `x ∘ y = φ⁻¹(φ(y) φ(x))`, so that `e_N ∘ e_N = e_N / δ` and `e_P ∘ e_Q ∝ e_{PQ}`.
pub fn comultiply_model<F: Field>(
    model: &FourierModel<F>,
    bc: &BasicConstruction<F>,
    x: &Matrix<F>,
    y: &Matrix<F>,
) -> Result<Matrix<F>, InclusionError> {
    let prod = model.phi(bc, y)?.mul(&model.phi(bc, x)?);
    model.phi_inverse(&prod)
}

/// One product of the overlap between the TL 2-box calculus and the matrix model.
#[derive(Clone, Debug)]
pub struct OverlapEntry<F: Field> {
    pub x: &'static str,
    pub y: &'static str,
    /// `x ∘ y` computed in TL, then mapped by `1 ↦ 1`, `E₁ ↦ δ e_N`.
    pub tl: Matrix<F>,
    pub model: Matrix<F>,
    pub agrees: bool,
}

/// `TLElement::comultiply` on `{1, E₁}` against [`comultiply_model`].
pub fn tl_overlap<F: Field>(
    model: &FourierModel<F>,
    bc: &BasicConstruction<F>,
) -> Result<Vec<OverlapEntry<F>>, InclusionError> {
    let tl_err = |e: crate::tl::TlError| InclusionError::Degenerate(e.to_string());
    let dim = bc.gns().dim();
    let one = Matrix::identity(dim);
    let e1 = bc.e_n().scale(&model.delta);
    let gens = [
        ("1", TLElement::identity(2), one.clone()),
        ("E1", TLElement::generator(2, 1).map_err(tl_err)?, e1.clone()),
    ];
    let exact = model.delta.to_quadratic();
    let value = |c: &crate::scalars::DeltaRational| -> Result<F, InclusionError> {
        match &exact {
            Some(d) => Ok(F::from_quadratic(&c.eval_quadratic(d)?)),
            None => F::from_complex(c.eval_f64(model.delta.re()).into())
                .ok_or_else(|| InclusionError::ExactUnavailable("δ".into())),
        }
    };
    let mut out = Vec::new();
    for (xn, xt, xm) in &gens {
        for (yn, yt, ym) in &gens {
            let prod = xt.comultiply(yt).map_err(tl_err)?;
            let mut tl = Matrix::zeros(dim, dim);
            for (d, c) in prod.terms() {
                let image = if d.is_identity() { &one } else { &e1 };
                tl = tl.add(&image.scale(&value(c)?));
            }
            let m = comultiply_model(model, bc, xm, ym)?;
            out.push(OverlapEntry { x: xn, y: yn, agrees: tl.approx_eq(&m), tl, model: m });
        }
    }
    Ok(out)
}

/// Both sides of the product formula `e_P ∘ e_Q = (Tr(e_P e_Q)/δ) e_{PQ}` and of the trace identity.
#[derive(Clone, Debug)]
pub struct LandauCheck<F: Field> {
    pub tr_p: F,
    pub tr_q: F,
    pub tr_pq: F,
    pub tr_p_times_q: F,
    /// Largest entry of `e_P ∘ e_Q − (Tr(e_P e_Q)/δ) e_{PQ}`.
    pub product_residual: f64,
    pub product_holds: bool,
    pub trace_identity_holds: bool,
}

pub fn landau_check<F: Field>(
    inc: &Inclusion<F>,
    bc: &BasicConstruction<F>,
    model: &FourierModel<F>,
    p: &StarAlgebra<F>,
    q: &StarAlgebra<F>,
) -> Result<LandauCheck<F>, InclusionError> {
    let e_p = subspace_projection(inc, bc, p, p)?;
    let e_q = subspace_projection(inc, bc, q, q)?;
    let e_pq = subspace_projection(inc, bc, p, q)?;
    let tr_p_times_q = bc.tr(&e_p.mul(&e_q));
    let lhs = comultiply_model(model, bc, &e_p, &e_q)?;
    let coef = tr_p_times_q.div_ref(&model.delta).expect("nonzero δ");
    let diff = lhs.sub(&e_pq.scale(&coef));
    let (tr_p, tr_q, tr_pq) = (bc.tr(&e_p), bc.tr(&e_q), bc.tr(&e_pq));
    let trace_identity_holds = tr_pq.mul_ref(&tr_p_times_q).approx_eq(&tr_p.mul_ref(&tr_q));
    Ok(LandauCheck {
        product_residual: diff.max_abs(),
        product_holds: diff.is_zero(),
        trace_identity_holds,
        tr_p,
        tr_q,
        tr_pq,
        tr_p_times_q,
    })
}

/// Residuals of `(2e_R − 1) ∘ e_P = 0` and `e_{P̄} L¹(2e_R − 1) e_{P̄} = 0`
/// with `e_{P̄} = (δ/Tr(e_P)) φ(e_P)`; the third entry is the idempotence defect of `e_{P̄}`.
pub fn vanishing_check<F: Field>(
    inc: &Inclusion<F>,
    bc: &BasicConstruction<F>,
    model: &FourierModel<F>,
    p: &StarAlgebra<F>,
    r: &StarAlgebra<F>,
) -> Result<(f64, f64, f64), InclusionError> {
    let e_p = subspace_projection(inc, bc, p, p)?;
    let e_r = subspace_projection(inc, bc, r, r)?;
    let dim = e_r.rows();
    let u = e_r.scale(&F::from_i64(2)).sub(&Matrix::identity(dim));
    let first = comultiply_model(model, bc, &u, &e_p)?.max_abs();
    let scale = model.delta.div_ref(&bc.tr(&e_p)).expect("nonzero trace");
    let e_bar = model.phi(bc, &e_p)?.scale(&scale);
    let second = e_bar.mul(&model.tower.lift(&u)).mul(&e_bar).max_abs();
    let idem = e_bar.mul(&e_bar).sub(&e_bar).max_abs();
    Ok((first, second, idem))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inclusions::{basic_construction, build_group_inclusion, PermGroup};
    use crate::scalars::{with_field, QuadraticNumber as Q};

    fn s3() -> (Inclusion<Q>, PermGroup) {
        let g = PermGroup::named("S3").unwrap();
        (build_group_inclusion(&g, &[]).unwrap(), g)
    }

    #[test]
    fn s3_quadrilateral_landau() {
        with_field(6, || {
            let (inc, g) = s3();
            let p = inc.subgroup_algebra(&[g.parse_element("(12)").unwrap()]).unwrap();
            let q = inc.subgroup_algebra(&[g.parse_element("(13)").unwrap()]).unwrap();
            let quad = Quadrilateral::new(inc.clone(), p.clone(), q.clone()).unwrap();
            let bc = basic_construction(&quad.inclusion).unwrap();
            let e_p = subspace_projection(&inc, &bc, &p, &p).unwrap();
            let e_q = subspace_projection(&inc, &bc, &q, &q).unwrap();
            let e_pq = subspace_projection(&inc, &bc, &p, &q).unwrap();
            assert_eq!(bc.tr(&e_p), Q::from_integer(2));
            assert_eq!(bc.tr(&e_pq), Q::from_integer(4));
            let tpq = bc.tr(&e_p.mul(&e_q));
            assert_eq!(tpq, Q::from_integer(1));
            let model = FourierModel::new(&inc, &bc).unwrap();
            let lhs = comultiply_model(&model, &bc, &e_p, &e_q).unwrap();
            let rhs = e_pq.scale(&tpq.div_ref(&model.delta).unwrap());
            assert_eq!(lhs, rhs);
            let e_n = bc.e_n().clone();
            let nn = comultiply_model(&model, &bc, &e_n, &e_n).unwrap();
            assert_eq!(nn, e_n.scale(&model.delta.inv().unwrap()));
            let (a, b, c) = model.bijection_ranks(&bc);
            assert_eq!(a, b);
            assert!(c.is_none() || c == Some(a));
        });
    }

    #[test]
    fn s3_vanishing() {
        with_field(6, || {
            let (inc, g) = s3();
            let p = inc.subgroup_algebra(&[g.parse_element("(12)").unwrap()]).unwrap();
            let r = inc.subgroup_algebra(&[g.parse_element("(123)").unwrap()]).unwrap();
            let bc = basic_construction(&inc).unwrap();
            let model = FourierModel::new(&inc, &bc).unwrap();
            let e_r = subspace_projection(&inc, &bc, &r, &r).unwrap();
            assert_eq!(bc.tr(&e_r), Q::from_integer(3));
            assert_eq!(subspace_projection(&inc, &bc, &r, &p).unwrap(), Matrix::identity(6));
            let (a, b, c) = vanishing_check(&inc, &bc, &model, &p, &r).unwrap();
            assert_eq!((a, b, c), (0.0, 0.0, 0.0));
        });
    }

    #[test]
    fn commuting_square() {
        let g = PermGroup::named("Z2xZ2").unwrap();
        let inc: Inclusion<Q> = build_group_inclusion(&g, &[]).unwrap();
        let p = inc.subgroup_algebra(&[g.parse_element("a").unwrap()]).unwrap();
        let q = inc.subgroup_algebra(&[g.parse_element("b").unwrap()]).unwrap();
        let bc = basic_construction(&inc).unwrap();
        let model = FourierModel::new(&inc, &bc).unwrap();
        let check = landau_check(&inc, &bc, &model, &p, &q).unwrap();
        assert!(check.product_holds && check.trace_identity_holds);
        assert_eq!(check.tr_pq, Q::from_integer(4));
        assert_eq!(check.tr_p_times_q, Q::from_integer(1));
        let e_p = subspace_projection(&inc, &bc, &p, &p).unwrap();
        let e_q = subspace_projection(&inc, &bc, &q, &q).unwrap();
        assert_eq!(e_p.mul(&e_q), *bc.e_n());
    }

    #[test]
    fn tl_overlap_agrees() {
        let gens = vec![Matrix::unit(2, 0, 1), Matrix::unit(2, 1, 0)];
        let inc: Inclusion<Q> = crate::inclusions::build_matrix_inclusion("C in M2", 2, gens, vec![], None).unwrap();
        let bc = basic_construction(&inc).unwrap();
        let model = FourierModel::new(&inc, &bc).unwrap();
        let entries = tl_overlap(&model, &bc).unwrap();
        assert_eq!(entries.len(), 4);
        assert!(entries.iter().all(|e| e.agrees), "{entries:?}");
        with_field(6, || {
            let (inc, _) = s3();
            let bc = basic_construction(&inc).unwrap();
            let model = FourierModel::new(&inc, &bc).unwrap();
            assert!(tl_overlap(&model, &bc).unwrap().iter().all(|e| e.agrees));
        });
    }

    #[test]
    fn quadrilateral_validation() {
        let (inc, g) = s3();
        let p = inc.subgroup_algebra(&[g.parse_element("(12)").unwrap()]).unwrap();
        assert!(Quadrilateral::new(inc.clone(), p.clone(), p.clone()).is_err());
    }
}

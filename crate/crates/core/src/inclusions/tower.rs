use num_complex::Complex64;

use crate::field::Field;
use crate::linalg::{Frame, Matrix, SpanBuilder};
use crate::spectral::hermitian_eigen;

use super::inclusion::{exact_index, gram_of_lambda, lambda_of, spectral_radius};
use super::{BlockStructure, Inclusion, InclusionError, StarAlgebra};

/// `L²(A)` for a finite-dimensional algebra `A` given by a basis, in basis coordinates.
///
/// Vectors are coordinate columns; `⟨ξ, η⟩ = η* G ξ` with `G_ij = ⟨b_j, b_i⟩`.
#[derive(Clone, Debug)]
pub struct Gns<F: Field> {
    basis: Vec<Matrix<F>>,
    frame: Frame<F>,
    gram: Matrix<F>,
    gram_inv: Matrix<F>,
}

impl<F: Field> Gns<F> {
    pub fn new(basis: Vec<Matrix<F>>, gram: Matrix<F>) -> Result<Self, InclusionError> {
        let frame = Frame::new(basis.iter().map(|b| b.entries().to_vec()).collect())
            .ok_or_else(|| InclusionError::Degenerate("dependent GNS basis".into()))?;
        let gram_inv = gram
            .inverse()
            .ok_or_else(|| InclusionError::Degenerate("trace is not faithful".into()))?;
        Ok(Gns { basis, frame, gram, gram_inv })
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Matrix<F>] {
        &self.basis
    }

    pub fn gram(&self) -> &Matrix<F> {
        &self.gram
    }

    pub fn coords(&self, x: &Matrix<F>) -> Option<Vec<F>> {
        self.frame.try_coords(x.entries())
    }

    pub fn element(&self, coords: &[F]) -> Matrix<F> {
        let s = self.basis[0].rows();
        Matrix::from_vec(s, s, self.frame.combine(coords))
    }

    pub fn vector(&self, x: &Matrix<F>) -> Result<Vec<F>, InclusionError> {
        self.coords(x).ok_or_else(|| InclusionError::NotInAlgebra("vector of L²".into()))
    }

    fn column_op(&self, f: impl Fn(&Matrix<F>) -> Matrix<F>) -> Matrix<F> {
        let cols: Vec<Vec<F>> = self
            .basis
            .iter()
            .map(|b| self.frame.coords(f(b).entries()))
            .collect();
        Matrix::from_columns(self.dim(), &cols)
    }

    /// Left multiplication `L_x`.
    pub fn left(&self, x: &Matrix<F>) -> Matrix<F> {
        self.column_op(|b| x.mul(b))
    }

    /// Right multiplication `R_x`.
    pub fn right(&self, x: &Matrix<F>) -> Matrix<F> {
        self.column_op(|b| b.mul(x))
    }

    /// Hilbert space adjoint `G⁻¹ T* G`.
    pub fn star(&self, t: &Matrix<F>) -> Matrix<F> {
        self.gram_inv.mul(&t.adjoint()).mul(&self.gram)
    }

    pub fn inner(&self, xi: &[F], eta: &[F]) -> F {
        let g = self.gram.apply(xi);
        let mut acc = F::zero();
        for (e, x) in eta.iter().zip(&g) {
            acc = acc.add_ref(&e.conj().mul_ref(x));
        }
        acc
    }

    /// Orthogonal projection onto the span of the given vectors.
    pub fn projection(&self, vectors: &[Vec<F>]) -> Matrix<F> {
        let mut span = SpanBuilder::new(self.dim());
        let indep: Vec<Vec<F>> = vectors.iter().filter(|v| span.insert(v)).cloned().collect();
        if indep.is_empty() {
            return Matrix::zeros(self.dim(), self.dim());
        }
        let v = Matrix::from_columns(self.dim(), &indep);
        let vs = v.adjoint().mul(&self.gram);
        let small = vs.mul(&v).inverse().expect("independent vectors have invertible Gram matrix");
        v.mul(&small).mul(&vs)
    }
}

/// `{T ∈ M_dim(F) : T R = R T}` for all given `R`.
pub(crate) fn full_commutant<F: Field>(dim: usize, ops: &[Matrix<F>]) -> Vec<Matrix<F>> {
    let n2 = dim * dim;
    let mut rows: Vec<F> = Vec::new();
    let mut count = 0;
    for r in ops {
        // (TR − RT)_{ij} = Σ_k T_ik R_kj − R_ik T_kj, unknown T_pq at index p·dim+q.
        for i in 0..dim {
            for j in 0..dim {
                let mut row = vec![F::zero(); n2];
                let mut nonzero = false;
                for k in 0..dim {
                    let a = r.get(k, j);
                    if !a.is_zero() {
                        row[i * dim + k] = row[i * dim + k].add_ref(a);
                        nonzero = true;
                    }
                    let b = r.get(i, k);
                    if !b.is_zero() {
                        row[k * dim + j] = row[k * dim + j].sub_ref(b);
                        nonzero = true;
                    }
                }
                if nonzero && row.iter().any(|x| !x.is_zero()) {
                    rows.extend(row);
                    count += 1;
                }
            }
        }
    }
    if count == 0 {
        return (0..dim).flat_map(|i| (0..dim).map(move |j| (i, j))).map(|(i, j)| Matrix::unit(dim, i, j)).collect();
    }
    Matrix::from_vec(count, n2, rows)
        .nullspace()
        .into_iter()
        .map(|v| Matrix::from_vec(dim, dim, v))
        .collect()
}

/// `{x ∈ span(ambient) : xa = ax for all a}`, orthogonalized for `inner`
/// (orthonormal in float mode).
pub fn relative_commutant<F: Field>(
    generators: &[Matrix<F>],
    ambient: &[Matrix<F>],
    inner: impl Fn(&Matrix<F>, &Matrix<F>) -> F,
) -> Vec<Matrix<F>> {
    let k = ambient.len();
    let mut rows: Vec<F> = Vec::new();
    let mut count = 0;
    for a in generators {
        let comms: Vec<Matrix<F>> = ambient.iter().map(|b| b.commutator(a)).collect();
        let len = comms.first().map_or(0, |c| c.entries().len());
        for e in 0..len {
            let row: Vec<F> = comms.iter().map(|c| c.entries()[e].clone()).collect();
            if row.iter().any(|x| !x.is_zero()) {
                rows.extend(row);
                count += 1;
            }
        }
    }
    let raw: Vec<Matrix<F>> = if count == 0 {
        ambient.to_vec()
    } else {
        Matrix::from_vec(count, k, rows)
            .nullspace()
            .iter()
            .map(|c| combine(ambient, c))
            .collect()
    };
    orthogonalize(raw, inner)
}

pub(crate) fn combine<F: Field>(basis: &[Matrix<F>], coords: &[F]) -> Matrix<F> {
    let mut out = Matrix::zeros(basis[0].rows(), basis[0].cols());
    for (c, b) in coords.iter().zip(basis) {
        if !c.is_zero() {
            out = out.add(&b.scale(c));
        }
    }
    out
}

/// Gram–Schmidt; unnormalized in exact mode since norms need square roots.
pub(crate) fn orthogonalize<F: Field>(
    vectors: Vec<Matrix<F>>,
    inner: impl Fn(&Matrix<F>, &Matrix<F>) -> F,
) -> Vec<Matrix<F>> {
    let mut out: Vec<(Matrix<F>, F)> = Vec::new();
    for v in vectors {
        let mut w = v;
        for (u, uu) in &out {
            let c = inner(&w, u).div_ref(uu).expect("nonzero norm");
            w = w.sub(&u.scale(&c));
        }
        let ww = inner(&w, &w);
        if ww.is_zero() {
            continue;
        }
        out.push((w, ww));
    }
    out.into_iter()
        .map(|(w, ww)| if F::EXACT { w } else { w.scale(&F::from_complex(Complex64::new(1.0 / ww.re().sqrt(), 0.0)).unwrap()) })
        .collect()
}

/// First basic construction `N ⊆ M ⊆ M₁ = ⟨M, e_N⟩` on `L²(M)`.
#[derive(Clone, Debug)]
pub struct BasicConstruction<F: Field> {
    l0: Gns<F>,
    e_n: Matrix<F>,
    m1: Vec<Matrix<F>>,
    m1_frame: Frame<F>,
    tr_weight: Matrix<F>,
    index: F,
    n_gens: Vec<Matrix<F>>,
    m_gens: Vec<Matrix<F>>,
}

pub fn basic_construction<F: Field>(inc: &Inclusion<F>) -> Result<BasicConstruction<F>, InclusionError> {
    let m_basis = inc.m().basis().to_vec();
    let k = m_basis.len();
    let gram = Matrix::from_fn(k, k, |i, j| inc.inner(&m_basis[j], &m_basis[i]));
    let l0 = Gns::new(m_basis.clone(), gram)?;
    let n_vectors: Vec<Vec<F>> = inc.n().basis().iter().map(|b| l0.vector(b)).collect::<Result<_, _>>()?;
    let e_n = l0.projection(&n_vectors);

    let right_n: Vec<Matrix<F>> = inc.n().generating_set().iter().map(|x| l0.right(x)).collect();
    let commutant = full_commutant(k, &right_n);
    // Basis with L_M first.
    let mut span = SpanBuilder::new(k * k);
    let mut m1 = Vec::new();
    for b in &m_basis {
        let l = l0.left(b);
        if span.insert(l.entries()) {
            m1.push(l);
        }
    }
    for c in commutant {
        if span.insert(c.entries()) {
            m1.push(c);
        }
    }
    let m1_frame = Frame::new(m1.iter().map(|b| b.entries().to_vec()).collect()).expect("independent basis");

    // Tr(T) = tr(R_z T) with z ∈ N, fixed by Tr(x e_N) = τ(x).
    let n_basis = inc.n().basis();
    let right_basis: Vec<Matrix<F>> = n_basis.iter().map(|x| l0.right(x)).collect();
    let lefts: Vec<Matrix<F>> = m_basis.iter().map(|b| l0.left(b).mul(&e_n)).collect();
    let system = Matrix::from_fn(k, n_basis.len(), |i, j| right_basis[j].trace_product(&lefts[i]));
    let rhs: Vec<F> = m_basis.iter().map(|b| inc.tau(b)).collect();
    let z = system.solve(&rhs).ok_or_else(|| {
        InclusionError::NotMarkov("no trace on M₁ satisfies Tr(x e_N) = τ(x)".into())
    })?;
    let tr_weight = combine(&right_basis, &z);
    let index = tr_weight.trace();
    let bc = BasicConstruction {
        l0,
        e_n,
        m1,
        m1_frame,
        tr_weight,
        index,
        n_gens: inc.n().generating_set().to_vec(),
        m_gens: inc.m().generating_set().to_vec(),
    };
    bc.verify_markov(inc)?;
    Ok(bc)
}

impl<F: Field> BasicConstruction<F> {
    fn verify_markov(&self, inc: &Inclusion<F>) -> Result<(), InclusionError> {
        // e_N x e_N = E_N(x) e_N on a basis of M.
        for b in inc.m().basis() {
            let lhs = self.e_n.mul(&self.l0.left(b)).mul(&self.e_n);
            let rhs = self.l0.left(&inc.cond_expect(b)?).mul(&self.e_n);
            if !lhs.sub(&rhs).approx_eq(&Matrix::zeros(lhs.rows(), lhs.cols())) {
                return Err(InclusionError::NotMarkov("e_N x e_N differs from E_N(x) e_N".into()));
            }
        }
        Ok(())
    }

    pub fn gns(&self) -> &Gns<F> {
        &self.l0
    }

    pub fn e_n(&self) -> &Matrix<F> {
        &self.e_n
    }

    /// Basis of `M₁`; the first `dim M` elements are `L_b` for the basis of `M`.
    pub fn m1_basis(&self) -> &[Matrix<F>] {
        &self.m1
    }

    pub fn m1_dim(&self) -> usize {
        self.m1.len()
    }

    /// `L_x` for `x ∈ M`.
    pub fn left(&self, x: &Matrix<F>) -> Matrix<F> {
        self.l0.left(x)
    }

    pub fn right(&self, x: &Matrix<F>) -> Matrix<F> {
        self.l0.right(x)
    }

    pub fn star(&self, t: &Matrix<F>) -> Matrix<F> {
        self.l0.star(t)
    }

    pub fn contains(&self, t: &Matrix<F>) -> bool {
        self.m1_frame.try_coords(t.entries()).is_some()
    }

    pub fn m1_coords(&self, t: &Matrix<F>) -> Option<Vec<F>> {
        self.m1_frame.try_coords(t.entries())
    }

    /// The trace on `M₁` with `Tr(x e_N y) = τ(xy)`.
    pub fn tr(&self, t: &Matrix<F>) -> F {
        self.tr_weight.trace_product(t)
    }

    /// `Tr(1) = [M : N]`.
    pub fn index(&self) -> &F {
        &self.index
    }

    pub fn tr_inner(&self, s: &Matrix<F>, t: &Matrix<F>) -> F {
        self.tr(&self.star(t).mul(s))
    }

    /// `N' ∩ M₁`, orthogonal for `Tr`.
    pub fn n_prime_m1(&self) -> Vec<Matrix<F>> {
        let gens: Vec<Matrix<F>> = self.n_gens.iter().map(|x| self.left(x)).collect();
        relative_commutant(&gens, &self.m1, |a, b| self.tr_inner(a, b))
    }

    /// `M' ∩ M₁`.
    pub fn m_prime_m1(&self) -> Vec<Matrix<F>> {
        let gens: Vec<Matrix<F>> = self.m_gens.iter().map(|x| self.left(x)).collect();
        relative_commutant(&gens, &self.m1, |a, b| self.tr_inner(a, b))
    }

    pub fn m_generators(&self) -> &[Matrix<F>] {
        &self.m_gens
    }

    /// Orthonormal float coordinates for `M₁`, so that `*` becomes the conjugate transpose.
    fn float_similarity(&self) -> (Matrix<Complex64>, Matrix<Complex64>) {
        let g = self.l0.gram().to_complex();
        let (vals, vecs) = hermitian_eigen(&g);
        let n = vals.len();
        let d = |p: f64| Matrix::from_fn(n, n, |i, j| if i == j { Complex64::new(vals[i].powf(p), 0.0) } else { Complex64::new(0.0, 0.0) });
        let half = vecs.mul(&d(0.5)).mul(&vecs.adjoint());
        let neg_half = vecs.mul(&d(-0.5)).mul(&vecs.adjoint());
        (half, neg_half)
    }

    /// Inclusion matrix of `M ⊆ M₁`.
    pub fn m_in_m1_lambda(&self) -> Result<Vec<Vec<usize>>, InclusionError> {
        let (h, hi) = self.float_similarity();
        let conv = |t: &Matrix<F>| h.mul(&t.to_complex()).mul(&hi);
        let k = self.l0.dim();
        let outer_basis: Vec<Matrix<Complex64>> = self.m1.iter().map(conv).collect();
        let inner_basis: Vec<Matrix<Complex64>> = self.m1[..k].iter().map(conv).collect();
        let outer = StarAlgebra::from_basis(k, Vec::new(), outer_basis)?;
        let inner = StarAlgebra::from_basis(k, Vec::new(), inner_basis)?;
        Ok(lambda_of(&BlockStructure::compute(&outer)?, &BlockStructure::compute(&inner)?))
    }
}

/// Second basic construction `M ⊆ M₁ ⊆ M₂ = ⟨M₁, e_M⟩` on `L²(M₁, Tr)`.
///
/// `M₂` is not enumerated; elements are products of lifted `M₁` elements and `e_M`.
#[derive(Clone, Debug)]
pub struct TowerStep<F: Field> {
    l1: Gns<F>,
    e_m: Matrix<F>,
    tr_weight: Matrix<F>,
    m_dim: usize,
}

pub fn tower_step<F: Field>(bc: &BasicConstruction<F>) -> Result<TowerStep<F>, InclusionError> {
    let basis = bc.m1_basis().to_vec();
    let d = basis.len();
    let stars: Vec<Matrix<F>> = basis.iter().map(|b| bc.star(b)).collect();
    let gram = Matrix::from_fn(d, d, |i, j| bc.tr(&stars[i].mul(&basis[j])));
    let l1 = Gns::new(basis.clone(), gram)?;
    let k = bc.gns().dim();
    let units: Vec<Vec<F>> = (0..k)
        .map(|i| (0..d).map(|j| if i == j { F::one() } else { F::zero() }).collect())
        .collect();
    let e_m = l1.projection(&units);
    // Tr₂(T) = tr(R¹_w T) with w ∈ M, fixed by Tr₂(y e_M) = Tr(y).
    let rights: Vec<Matrix<F>> = basis[..k].iter().map(|b| l1.right(b)).collect();
    let lefts: Vec<Matrix<F>> = basis.iter().map(|y| l1.left(y).mul(&e_m)).collect();
    let system = Matrix::from_fn(d, k, |i, j| rights[j].trace_product(&lefts[i]));
    let rhs: Vec<F> = basis.iter().map(|y| bc.tr(y)).collect();
    let w = system.solve(&rhs).ok_or_else(|| {
        InclusionError::NotMarkov("no trace on M₂ satisfies Tr(y e_M) = Tr(y)".into())
    })?;
    let tr_weight = combine(&rights, &w);
    Ok(TowerStep { l1, e_m, tr_weight, m_dim: k })
}

impl<F: Field> TowerStep<F> {
    pub fn gns(&self) -> &Gns<F> {
        &self.l1
    }

    pub fn e_m(&self) -> &Matrix<F> {
        &self.e_m
    }

    /// `L¹_T` for `T ∈ M₁`.
    pub fn lift(&self, t: &Matrix<F>) -> Matrix<F> {
        self.l1.left(t)
    }

    pub fn tr(&self, s: &Matrix<F>) -> F {
        self.tr_weight.trace_product(s)
    }

    pub fn star(&self, s: &Matrix<F>) -> Matrix<F> {
        self.l1.star(s)
    }

    /// `M' ∩ M₂` (as operators commuting with left and right `M`); quadratic in `dim M₁`.
    pub fn m_prime_m2(&self, bc: &BasicConstruction<F>) -> Vec<Matrix<F>> {
        let right_m: Vec<Matrix<F>> = bc.m1_basis()[..self.m_dim].iter().map(|b| self.l1.right(b)).collect();
        let mut gens: Vec<Matrix<F>> = bc.m_generators().iter().map(|x| self.lift(&bc.left(x))).collect();
        gens.extend(right_m);
        orthogonalize(full_commutant(self.l1.dim(), &gens), |a, b| self.tr(&self.star(b).mul(a)))
    }
}

/// Exact index of `M ⊆ M₁` from its inclusion matrix, when recognizable.
pub fn lambda_index(lambda: &[Vec<usize>]) -> (f64, Option<crate::scalars::QuadraticNumber>) {
    let v = spectral_radius(&gram_of_lambda(lambda));
    (v, exact_index(lambda, v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inclusions::{build_group_inclusion, build_matrix_inclusion, PermGroup};
    use crate::scalars::QuadraticNumber as Q;

    fn c_in_m2() -> Inclusion<Q> {
        build_matrix_inclusion("C in M2", 2, vec![Matrix::unit(2, 0, 1), Matrix::unit(2, 1, 0)], vec![], None).unwrap()
    }

    #[test]
    fn c_in_m2_tower() {
        let inc = c_in_m2();
        let bc = basic_construction(&inc).unwrap();
        assert_eq!(bc.m1_dim(), 16);
        assert_eq!(bc.index(), &Q::from_integer(4));
        assert_eq!(bc.tr(bc.e_n()), Q::from_integer(1));
        assert_eq!(bc.m_in_m1_lambda().unwrap(), vec![vec![2]]);
        let ts = tower_step(&bc).unwrap();
        assert_eq!(ts.tr(&Matrix::identity(16)), Q::from_integer(16));
        let e_n = ts.lift(bc.e_n());
        let lhs = ts.e_m().mul(&e_n).mul(ts.e_m());
        assert_eq!(lhs, ts.e_m().scale(&Q::from_ratio(1, 4)));
    }

    #[test]
    fn s3_transposition_commutants() {
        let g = PermGroup::named("S3").unwrap();
        let inc: Inclusion<Q> = build_group_inclusion(&g, &[g.parse_element("(12)").unwrap()]).unwrap();
        let n_prime_m = relative_commutant(inc.n().generating_set(), inc.m().basis(), |a, b| inc.inner(a, b));
        // Conjugation orbits of (12) on S3: {e}, {(12)}, {(13),(23)}, {(123),(132)}.
        assert_eq!(n_prime_m.len(), 4);
        let bc = basic_construction(&inc).unwrap();
        assert_eq!(bc.index(), &Q::from_integer(3));
        assert_eq!(bc.m1_dim(), 18);
        // Tr(x e_N y) = τ(xy) on basis pairs.
        let basis = inc.m().basis();
        for x in basis {
            for y in basis {
                let t = bc.tr(&bc.left(x).mul(bc.e_n()).mul(&bc.left(y)));
                assert_eq!(t, inc.tau(&x.mul(y)));
            }
        }
        let ts = tower_step(&bc).unwrap();
        assert_eq!(ts.tr(&Matrix::identity(18)), Q::from_integer(9));
    }

    #[test]
    fn diagonal_relative_commutant() {
        let inc: Inclusion<Q> = build_matrix_inclusion(
            "D2 in M2",
            2,
            vec![Matrix::unit(2, 0, 1), Matrix::unit(2, 1, 0)],
            vec![Matrix::unit(2, 0, 0), Matrix::unit(2, 1, 1)],
            None,
        )
        .unwrap();
        let bc = basic_construction(&inc).unwrap();
        assert_eq!(bc.n_prime_m1().len(), 4);
        assert_eq!(bc.m_prime_m1().len(), 2);
        let ts = tower_step(&bc).unwrap();
        assert_eq!(ts.m_prime_m2(&bc).len(), 4);
    }

    #[test]
    fn float_tower_matches() {
        let inc = c_in_m2().to_float();
        let bc = basic_construction(&inc).unwrap();
        assert!((bc.index().re - 4.0).abs() < 1e-10);
    }
}

use num_complex::Complex64;

use crate::field::Field;
use crate::linalg::{Matrix, SpanBuilder};
use crate::scalars::QuadraticNumber;
use crate::spectral::hermitian_eigen;

use super::blocks::{rank_of_projection, recognize_rational};
use super::{BlockStructure, InclusionError, Perm, PermGroup, StarAlgebra};

/// Group data kept alongside group-algebra inclusions.
#[derive(Clone, Debug)]
pub struct GroupData {
    pub group: PermGroup,
    /// Indices (into `group.elements()`) of the subgroup `H`.
    pub subgroup: Vec<usize>,
}

/// `N ⊆ M ⊆ M_size(F)` with a faithful trace `τ(x) = tr(D x)` on `M`.
#[derive(Clone, Debug)]
pub struct Inclusion<F: Field> {
    label: String,
    m: StarAlgebra<F>,
    n: StarAlgebra<F>,
    density: Matrix<F>,
    n_gram_inv: Matrix<F>,
    lambda: Vec<Vec<usize>>,
    m_sizes: Vec<usize>,
    n_sizes: Vec<usize>,
    m_weights: Vec<f64>,
    n_weights: Vec<f64>,
    explicit_trace: bool,
    group: Option<GroupData>,
}

/// How the trace on `M` is chosen.
#[derive(Clone, Debug)]
pub enum TraceSpec<F: Field> {
    /// The Markov trace, which requires a connected inclusion.
    Markov,
    /// `τ` of a minimal projection, per block of `M` (in block order).
    Weights(Vec<F>),
    /// `τ(x) = tr(D x)`.
    Density(Matrix<F>),
}

/// Index and trace data of a connected inclusion.
#[derive(Clone, Debug, PartialEq)]
pub struct MarkovData {
    pub lambda: Vec<Vec<usize>>,
    pub index: f64,
    /// Exact index when `‖Λ‖²` is recognized in a quadratic field.
    pub index_exact: Option<QuadraticNumber>,
    /// `τ` of a minimal projection, per block of `M`.
    pub m_weights: Vec<f64>,
    pub n_weights: Vec<f64>,
    /// `‖ΛᵀΛ s − [M:N] s‖∞` for the trace vector `s` of `M`.
    pub markov_residual: f64,
    pub connected: bool,
}

fn nonunital_span_has_identity<F: Field>(size: usize, gens: &[Matrix<F>]) -> bool {
    if gens.is_empty() {
        return true;
    }
    let mut span = SpanBuilder::new(size * size);
    let mut words: Vec<Matrix<F>> = Vec::new();
    for g in gens {
        if span.insert(g.entries()) {
            words.push(g.clone());
        }
    }
    let mut next = 0;
    while next < words.len() {
        let w = words[next].clone();
        next += 1;
        for g in gens {
            let x = g.mul(&w);
            if span.insert(x.entries()) {
                words.push(x);
            }
        }
    }
    span.contains(Matrix::<F>::identity(size).entries())
}

fn gram_inverse<F: Field>(alg: &StarAlgebra<F>, density: &Matrix<F>) -> Matrix<F> {
    let k = alg.dim();
    let g = Matrix::from_fn(k, k, |i, j| density.mul(&alg.basis()[i].adjoint()).trace_product(&alg.basis()[j]));
    g.inverse().expect("faithful trace gives an invertible Gram matrix")
}

pub(crate) fn spectral_radius(m: &[Vec<f64>]) -> f64 {
    let n = m.len();
    if n == 0 {
        return 0.0;
    }
    let c = Matrix::<Complex64>::from_fn(n, n, |i, j| Complex64::new(m[i][j], 0.0));
    let (vals, _) = hermitian_eigen(&c);
    vals.last().copied().unwrap_or(0.0)
}

pub(crate) fn gram_of_lambda(lambda: &[Vec<usize>]) -> Vec<Vec<f64>> {
    let cols = lambda.first().map_or(0, |r| r.len());
    (0..cols)
        .map(|a| (0..cols).map(|b| lambda.iter().map(|r| (r[a] * r[b]) as f64).sum()).collect())
        .collect()
}

/// Exact value of `‖Λ‖²` when it is an integer or of the form `a + b√d`.
pub(crate) fn exact_index(lambda: &[Vec<usize>], approx: f64) -> Option<QuadraticNumber> {
    let gram = gram_of_lambda(lambda);
    let n = gram.len();
    let check = |v: &QuadraticNumber| {
        let m = Matrix::<QuadraticNumber>::from_fn(n, n, |i, j| {
            let x = QuadraticNumber::from_integer(gram[i][j] as i64);
            if i == j {
                x.sub_ref(v)
            } else {
                x
            }
        });
        m.rank() < n
    };
    if let Some(r) = recognize_rational(approx) {
        let v = QuadraticNumber::rational(r);
        if check(&v) {
            return Some(v);
        }
    }
    for d in 2u64..=30 {
        if !crate::scalars::is_squarefree(d) {
            continue;
        }
        let s = (d as f64).sqrt();
        for den in 1i64..=4 {
            for bn in -40i64..=40 {
                if bn == 0 {
                    continue;
                }
                let b = bn as f64 / den as f64;
                let a = approx - b * s;
                let an = (a * den as f64).round();
                if (an / den as f64 - a).abs() > 1e-9 {
                    continue;
                }
                let v = QuadraticNumber::from_parts((an as i64, den), (bn, den), d).ok()?;
                if check(&v) {
                    return Some(v);
                }
            }
        }
    }
    None
}

fn is_connected(lambda: &[Vec<usize>]) -> bool {
    let nb = lambda.len();
    let ma = lambda.first().map_or(0, |r| r.len());
    if nb == 0 || ma == 0 {
        return false;
    }
    // Nodes 0..nb are N blocks, nb..nb+ma are M blocks.
    let mut seen = vec![false; nb + ma];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(v) = stack.pop() {
        let nbrs: Vec<usize> = if v < nb {
            (0..ma).filter(|&a| lambda[v][a] > 0).map(|a| nb + a).collect()
        } else {
            (0..nb).filter(|&b| lambda[b][v - nb] > 0).collect()
        };
        for w in nbrs {
            if !seen[w] {
                seen[w] = true;
                stack.push(w);
            }
        }
    }
    seen.iter().all(|&s| s)
}

impl<F: Field> Inclusion<F> {
    /// Validates `N ⊆ M`, computes `Λ` and fixes the trace.
    ///
    /// Without explicit weights the normalized representation trace is used when it is
    /// Markov; otherwise the Perron–Frobenius trace, which must be rational in exact mode.
    pub fn new(
        label: &str,
        m: StarAlgebra<F>,
        n: StarAlgebra<F>,
        trace: TraceSpec<F>,
    ) -> Result<Self, InclusionError> {
        if m.size() != n.size() {
            return Err(InclusionError::Schema("N and M act on different spaces".into()));
        }
        if !m.contains_algebra(&n) {
            return Err(InclusionError::NotIntermediate("N is not contained in M".into()));
        }
        let fm = m.map(|x| x.to_complex());
        let fn_ = n.map(|x| x.to_complex());
        let mb = BlockStructure::compute(&fm)?;
        let nb = BlockStructure::compute(&fn_)?;
        let lambda = lambda_of(&mb, &nb);
        let m_sizes = mb.sizes();
        let n_sizes = nb.sizes();
        let connected = is_connected(&lambda);
        let size = m.size();

        let explicit_trace = !matches!(trace, TraceSpec::Markov);
        let density = match trace {
            TraceSpec::Density(d) => d,
            TraceSpec::Weights(w) => {
                if w.len() != mb.len() {
                    return Err(InclusionError::Schema(format!(
                        "trace has {} weights but M has {} blocks",
                        w.len(),
                        mb.len()
                    )));
                }
                density_from_weights(&m, &w)?
            }
            TraceSpec::Markov => {
                if !connected {
                    return Err(InclusionError::Disconnected);
                }
                let rep: Vec<f64> = mb.blocks.iter().map(|b| b.multiplicity as f64 / size as f64).collect();
                if markov_residual(&lambda, &rep) < 1e-9 {
                    Matrix::identity(size).scale(&F::from_ratio(1, size as i64))
                } else {
                    let pf = perron_frobenius(&lambda, &m_sizes);
                    let exact: Option<Vec<F>> =
                        pf.iter().map(|x| recognize_rational(*x).map(|r| F::from_rational(&r))).collect();
                    match exact {
                        Some(w) => density_from_weights(&m, &w)?,
                        None if !F::EXACT => density_from_weights(
                            &m,
                            &pf.iter().map(|x| F::from_complex(Complex64::new(*x, 0.0)).unwrap()).collect::<Vec<_>>(),
                        )?,
                        None => {
                            return Err(InclusionError::ExactUnavailable(
                                "the Markov trace has irrational weights".into(),
                            ))
                        }
                    }
                }
            }
        };
        // τ of a minimal projection per block, evaluated through the density.
        let m_weights: Vec<f64> =
            mb.blocks.iter().map(|b| tau_f64(&density, &b.minimal[0])).collect();
        let n_weights: Vec<f64> =
            nb.blocks.iter().map(|b| tau_f64(&density, &b.minimal[0])).collect();
        if m_weights.iter().any(|w| *w <= 0.0) {
            return Err(InclusionError::Schema("trace is not faithful".into()));
        }
        let n_gram_inv = gram_inverse(&n, &density);
        Ok(Inclusion {
            label: label.to_string(),
            m,
            n,
            density,
            n_gram_inv,
            lambda,
            m_sizes,
            n_sizes,
            m_weights,
            n_weights,
            explicit_trace,
            group: None,
        })
    }

    pub fn with_group(mut self, data: GroupData) -> Self {
        self.group = Some(data);
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn size(&self) -> usize {
        self.m.size()
    }

    pub fn m(&self) -> &StarAlgebra<F> {
        &self.m
    }

    pub fn n(&self) -> &StarAlgebra<F> {
        &self.n
    }

    pub fn density(&self) -> &Matrix<F> {
        &self.density
    }

    pub fn group(&self) -> Option<&GroupData> {
        self.group.as_ref()
    }

    pub fn lambda(&self) -> &[Vec<usize>] {
        &self.lambda
    }

    pub fn m_block_sizes(&self) -> &[usize] {
        &self.m_sizes
    }

    pub fn n_block_sizes(&self) -> &[usize] {
        &self.n_sizes
    }

    pub fn tau(&self, x: &Matrix<F>) -> F {
        self.density.trace_product(x)
    }

    /// `⟨x, y⟩ = τ(y* x)`.
    pub fn inner(&self, x: &Matrix<F>, y: &Matrix<F>) -> F {
        self.tau(&y.adjoint().mul(x))
    }

    pub fn norm2_sq(&self, x: &Matrix<F>) -> F {
        self.inner(x, x)
    }

    /// Trace-preserving conditional expectation onto `N`.
    pub fn cond_expect(&self, x: &Matrix<F>) -> Result<Matrix<F>, InclusionError> {
        if !self.m.contains(x) {
            return Err(InclusionError::NotInAlgebra("argument of E_N".into()));
        }
        Ok(self.expect_with(&self.n, &self.n_gram_inv, x))
    }

    fn expect_with(&self, alg: &StarAlgebra<F>, gram_inv: &Matrix<F>, x: &Matrix<F>) -> Matrix<F> {
        let rhs: Vec<F> = alg.basis().iter().map(|b| self.inner(x, b)).collect();
        alg.element(&gram_inv.apply(&rhs))
    }

    /// Conditional expectation onto any *-subalgebra of `M` (trace restricted).
    pub fn expectation_onto(&self, alg: &StarAlgebra<F>, x: &Matrix<F>) -> Matrix<F> {
        let gi = gram_inverse(alg, &self.density);
        self.expect_with(alg, &gi, x)
    }

    pub fn markov_data(&self) -> Result<MarkovData, InclusionError> {
        let connected = is_connected(&self.lambda);
        if !connected && !self.explicit_trace {
            return Err(InclusionError::Disconnected);
        }
        let index = spectral_radius(&gram_of_lambda(&self.lambda));
        Ok(MarkovData {
            lambda: self.lambda.clone(),
            index,
            index_exact: exact_index(&self.lambda, index),
            m_weights: self.m_weights.clone(),
            n_weights: self.n_weights.clone(),
            markov_residual: markov_residual(&self.lambda, &self.m_weights),
            connected,
        })
    }

    pub fn is_connected(&self) -> bool {
        is_connected(&self.lambda)
    }

    /// The same inclusion over `Complex64`.
    pub fn to_float(&self) -> Inclusion<Complex64> {
        let c = |x: &F| x.to_complex();
        Inclusion {
            label: self.label.clone(),
            m: self.m.map(c),
            n: self.n.map(c),
            density: self.density.map(c),
            n_gram_inv: self.n_gram_inv.map(c),
            lambda: self.lambda.clone(),
            m_sizes: self.m_sizes.clone(),
            n_sizes: self.n_sizes.clone(),
            m_weights: self.m_weights.clone(),
            n_weights: self.n_weights.clone(),
            explicit_trace: self.explicit_trace,
            group: self.group.clone(),
        }
    }

    /// A subalgebra of `M` generated by the given elements, checked to lie between `N` and `M`.
    pub fn intermediate(&self, gens: Vec<Matrix<F>>) -> Result<StarAlgebra<F>, InclusionError> {
        let mut all = gens;
        all.extend(self.n.generating_set().iter().cloned());
        let p = StarAlgebra::generated(self.size(), all)?;
        if !self.m.contains_algebra(&p) {
            return Err(InclusionError::NotIntermediate("generators leave M".into()));
        }
        Ok(p)
    }

    /// Group algebra of a subgroup (given by generators) for group inclusions.
    pub fn subgroup_algebra(&self, gens: &[Perm]) -> Result<StarAlgebra<F>, InclusionError> {
        let g = self
            .group
            .as_ref()
            .ok_or_else(|| InclusionError::Schema("not a group inclusion".into()))?;
        let idx = g.group.subgroup(gens);
        if !g.subgroup.iter().all(|h| idx.contains(h)) {
            return Err(InclusionError::NotIntermediate("subgroup does not contain H".into()));
        }
        let basis: Vec<Matrix<F>> = idx.iter().map(|&i| g.group.regular(&g.group.elements()[i])).collect();
        let gens_m: Vec<Matrix<F>> = gens.iter().map(|p| g.group.regular(p)).collect();
        StarAlgebra::from_basis(self.size(), gens_m, basis)
    }
}

/// `Λ_{ba} = rank(f_b z_a)/μ_a` for minimal `f_b` of the inner algebra and central `z_a` of the outer.
pub(crate) fn lambda_of(outer: &BlockStructure<Complex64>, inner: &BlockStructure<Complex64>) -> Vec<Vec<usize>> {
    inner
        .blocks
        .iter()
        .map(|b| {
            outer
                .blocks
                .iter()
                .map(|a| rank_of_projection(&b.minimal[0].mul(&a.central)) / a.multiplicity)
                .collect()
        })
        .collect()
}

fn tau_f64<F: Field>(density: &Matrix<F>, p: &Matrix<Complex64>) -> f64 {
    density.to_complex().trace_product(p).re
}

fn markov_residual(lambda: &[Vec<usize>], s: &[f64]) -> f64 {
    let gram = gram_of_lambda(lambda);
    let index = spectral_radius(&gram);
    gram.iter()
        .zip(s)
        .map(|(row, si)| (row.iter().zip(s).map(|(g, x)| g * x).sum::<f64>() - index * si).abs())
        .fold(0.0, f64::max)
}

/// Perron–Frobenius trace vector of `ΛᵀΛ`, normalized by `Σ m_a s_a = 1`.
fn perron_frobenius(lambda: &[Vec<usize>], sizes: &[usize]) -> Vec<f64> {
    let gram = gram_of_lambda(lambda);
    let n = gram.len();
    let c = Matrix::<Complex64>::from_fn(n, n, |i, j| Complex64::new(gram[i][j], 0.0));
    let (_, vecs) = hermitian_eigen(&c);
    let v: Vec<f64> = (0..n).map(|i| vecs.get(i, n - 1).re.abs()).collect();
    let total: f64 = v.iter().zip(sizes).map(|(x, m)| x * *m as f64).sum();
    v.iter().map(|x| x / total).collect()
}

/// Density `Σ_a (t_a/μ_a) z_a` for minimal-projection weights `t_a`.
fn density_from_weights<F: Field>(m: &StarAlgebra<F>, w: &[F]) -> Result<Matrix<F>, InclusionError> {
    let blocks = BlockStructure::compute(m)?;
    let mut total = F::zero();
    let mut d = Matrix::zeros(m.size(), m.size());
    for (b, t) in blocks.blocks.iter().zip(w) {
        total = total.add_ref(&t.mul_ref(&F::from_i64(b.size() as i64)));
        d = d.add(&b.central.scale(&t.mul_ref(&F::from_ratio(1, b.multiplicity as i64))));
    }
    if !total.is_one() {
        return Err(InclusionError::Schema(format!("trace weights give τ(1) = {total}, expected 1")));
    }
    Ok(d)
}

/// `ℂ[H] ⊆ ℂ[G]` in the left regular representation with the canonical trace.
pub fn build_group_inclusion<F: Field>(group: &PermGroup, h_gens: &[Perm]) -> Result<Inclusion<F>, InclusionError> {
    let all: Vec<Matrix<F>> = group.elements().iter().map(|g| group.regular(g)).collect();
    let h = group.subgroup(h_gens);
    let n_basis: Vec<Matrix<F>> = h.iter().map(|&i| all[i].clone()).collect();
    let n_gens: Vec<Matrix<F>> = h_gens.iter().map(|p| group.regular(p)).collect();
    let size = group.order();
    let m = StarAlgebra::from_basis(size, all.clone(), all)?;
    let n = StarAlgebra::from_basis(size, n_gens, n_basis)?;
    let label = format!(
        "C[<{}>] in C[{}]",
        h_gens.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(","),
        group.name()
    );
    let density = Matrix::identity(size).scale(&F::from_ratio(1, size as i64));
    Ok(Inclusion::new(&label, m, n, TraceSpec::Density(density))?.with_group(GroupData { group: group.clone(), subgroup: h }))
}

/// Inclusion given by generators of `N` and `M` on a common space.
pub fn build_matrix_inclusion<F: Field>(
    label: &str,
    size: usize,
    m_gens: Vec<Matrix<F>>,
    n_gens: Vec<Matrix<F>>,
    weights: Option<Vec<F>>,
) -> Result<Inclusion<F>, InclusionError> {
    if !nonunital_span_has_identity(size, &m_gens) || !nonunital_span_has_identity(size, &n_gens) {
        return Err(InclusionError::NotUnital);
    }
    let m = StarAlgebra::generated(size, m_gens)?;
    let n = StarAlgebra::generated(size, n_gens)?;
    let trace = weights.map_or(TraceSpec::Markov, TraceSpec::Weights);
    Inclusion::new(label, m, n, trace)
}

/// `M_n ⊗ 1 ⊆ M_n ⊗ M_k`.
pub fn build_tensor_inclusion<F: Field>(n: usize, k: usize) -> Result<Inclusion<F>, InclusionError> {
    if n == 0 || k == 0 {
        return Err(InclusionError::Schema("tensor factors must be positive".into()));
    }
    let units = |d: usize| -> Vec<Matrix<F>> {
        (0..d.saturating_sub(1)).flat_map(|i| [Matrix::unit(d, i, i + 1), Matrix::unit(d, i + 1, i)]).collect()
    };
    let one_n = Matrix::<F>::identity(n);
    let one_k = Matrix::<F>::identity(k);
    let left: Vec<Matrix<F>> = units(n).iter().map(|u| u.kron(&one_k)).collect();
    let right: Vec<Matrix<F>> = units(k).iter().map(|u| one_n.kron(u)).collect();
    let mut m_gens = left.clone();
    m_gens.extend(right);
    build_matrix_inclusion(&format!("M{n} in M{n}xM{k}"), n * k, m_gens, left, None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalars::QuadraticNumber as Q;

    fn s3_pair(h: &str) -> Inclusion<Q> {
        let g = PermGroup::named("S3").unwrap();
        let p = g.parse_element(h).unwrap();
        build_group_inclusion(&g, &[p]).unwrap()
    }

    #[test]
    fn s3_transposition_index_three() {
        let inc = s3_pair("(12)");
        let md = inc.markov_data().unwrap();
        assert!((md.index - 3.0).abs() < 1e-9);
        assert_eq!(md.index_exact.unwrap(), Q::from_integer(3));
        assert!(md.markov_residual < 1e-9);
    }

    #[test]
    fn coset_expectation() {
        let inc = s3_pair("(12)");
        let g = &inc.group().unwrap().group;
        let els = g.elements();
        // x = Σ (i+1) g_i
        let mut x = Matrix::zeros(6, 6);
        for (i, e) in els.iter().enumerate() {
            x = x.add(&g.regular::<Q>(e).scale(&Q::from_integer(i as i64 + 1)));
        }
        let ex = inc.cond_expect(&x).unwrap();
        let s = g.parse_element("(12)").unwrap();
        let si = g.index_of(&s).unwrap();
        let expected = Matrix::identity(6).add(&g.regular::<Q>(&s).scale(&Q::from_integer(si as i64 + 1)));
        assert_eq!(ex, expected);
    }

    #[test]
    fn matrix_examples() {
        let c_in_m2: Inclusion<Q> =
            build_matrix_inclusion("C in M2", 2, vec![Matrix::unit(2, 0, 1), Matrix::unit(2, 1, 0)], vec![], None)
                .unwrap();
        assert_eq!(c_in_m2.markov_data().unwrap().index_exact.unwrap(), Q::from_integer(4));
        let d2: Inclusion<Q> = build_matrix_inclusion(
            "D2 in M2",
            2,
            vec![Matrix::unit(2, 0, 1), Matrix::unit(2, 1, 0)],
            vec![Matrix::unit(2, 0, 0), Matrix::unit(2, 1, 1)],
            None,
        )
        .unwrap();
        let md = d2.markov_data().unwrap();
        assert_eq!(md.index_exact.unwrap(), Q::from_integer(2));
        assert_eq!(md.n_weights, vec![0.5, 0.5]);
        let t: Inclusion<Q> = build_tensor_inclusion(2, 2).unwrap();
        assert_eq!(t.markov_data().unwrap().index_exact.unwrap(), Q::from_integer(4));
    }

    #[test]
    fn build_errors() {
        let err = build_matrix_inclusion::<Q>("bad", 2, vec![Matrix::unit(2, 0, 1)], vec![], None).unwrap_err();
        assert!(matches!(err, InclusionError::NotUnital | InclusionError::NotStarClosed(_)));
        let err = build_matrix_inclusion::<Q>(
            "nonunital",
            2,
            vec![Matrix::unit(2, 0, 1), Matrix::unit(2, 1, 0)],
            vec![Matrix::unit(2, 0, 0)],
            None,
        )
        .unwrap_err();
        assert_eq!(err, InclusionError::NotUnital);
        let d2 = || StarAlgebra::<Q>::generated(2, vec![Matrix::unit(2, 0, 0), Matrix::unit(2, 1, 1)]).unwrap();
        let err = Inclusion::new("D2 in D2", d2(), d2(), TraceSpec::Markov).unwrap_err();
        assert_eq!(err, InclusionError::Disconnected);
        let w = vec![Q::from_ratio(1, 2), Q::from_ratio(1, 2)];
        assert!(Inclusion::new("D2 in D2", d2(), d2(), TraceSpec::Weights(w)).is_ok());
    }
}

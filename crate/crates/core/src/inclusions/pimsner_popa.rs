use crate::field::Field;
use crate::linalg::Matrix;

use super::{BasicConstruction, BlockStructure, Inclusion, InclusionError};

/// `λ₁ = 1, …, λ_k ∈ M` with `Σ λⱼ e_N λⱼ* = 1` and `E_N(λᵢ*λⱼ) = δᵢⱼ qⱼ`.
#[derive(Clone, Debug)]
pub struct PimsnerPopaBasis<F: Field> {
    pub lambdas: Vec<Matrix<F>>,
    /// Support projections `qⱼ = E_N(λⱼ*λⱼ)` in `N`.
    pub supports: Vec<Matrix<F>>,
    /// `pⱼ = λⱼ e_N λⱼ*` in `M₁`.
    pub projections: Vec<Matrix<F>>,
    /// `vⱼ = λⱼ e_N` in `M₁`.
    pub partial_isometries: Vec<Matrix<F>>,
}

impl<F: Field> PimsnerPopaBasis<F> {
    pub fn len(&self) -> usize {
        self.lambdas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambdas.is_empty()
    }

    /// `Σⱼ λⱼ E_N(λⱼ* x)`.
    pub fn expand(&self, inc: &Inclusion<F>, x: &Matrix<F>) -> Result<Matrix<F>, InclusionError> {
        let mut out = Matrix::zeros(x.rows(), x.cols());
        for l in &self.lambdas {
            out = out.add(&l.mul(&inc.cond_expect(&l.adjoint().mul(x))?));
        }
        Ok(out)
    }
}

pub fn pimsner_popa_basis<F: Field>(
    inc: &Inclusion<F>,
    bc: &BasicConstruction<F>,
) -> Result<PimsnerPopaBasis<F>, InclusionError> {
    let lambdas = match inc.group() {
        Some(g) => coset_representatives(inc, g),
        None => packed_basis(inc)?,
    };
    let size = inc.size();
    let mut supports = Vec::new();
    for l in &lambdas {
        supports.push(inc.cond_expect(&l.adjoint().mul(l))?);
    }
    let projections: Vec<Matrix<F>> =
        lambdas.iter().map(|l| bc.left(l).mul(bc.e_n()).mul(&bc.left(&l.adjoint()))).collect();
    let partial_isometries: Vec<Matrix<F>> = lambdas.iter().map(|l| bc.left(l).mul(bc.e_n())).collect();
    let basis = PimsnerPopaBasis { lambdas, supports, projections, partial_isometries };
    verify(inc, bc, &basis, size)?;
    Ok(basis)
}

fn verify<F: Field>(
    inc: &Inclusion<F>,
    bc: &BasicConstruction<F>,
    b: &PimsnerPopaBasis<F>,
    size: usize,
) -> Result<(), InclusionError> {
    let fail = |what: &str| Err(InclusionError::Degenerate(format!("basis check failed: {what}")));
    if !b.lambdas[0].approx_eq(&Matrix::identity(size)) {
        return fail("λ₁ ≠ 1");
    }
    let dim = bc.gns().dim();
    let mut total = Matrix::zeros(dim, dim);
    for p in &b.projections {
        total = total.add(p);
    }
    if !total.approx_eq(&Matrix::identity(dim)) {
        return fail("Σ λ e_N λ* ≠ 1");
    }
    for (i, li) in b.lambdas.iter().enumerate() {
        let q = &b.supports[i];
        if !q.mul(q).approx_eq(q) {
            return fail("E_N(λ*λ) is not a projection");
        }
        for lj in &b.lambdas[i + 1..] {
            if !inc.cond_expect(&li.adjoint().mul(lj))?.approx_eq(&Matrix::zeros(size, size)) {
                return fail("E_N(λᵢ*λⱼ) ≠ 0");
            }
        }
    }
    let traces: Vec<f64> = b.projections.iter().map(|p| bc.tr(p).re()).collect();
    let last = traces.len() - 1;
    for (j, t) in traces.iter().enumerate() {
        if *t > 1.0 + 1e-9 || (j < last && *t < 1.0 - 1e-9) {
            return fail("Tr(pⱼ) pattern");
        }
    }
    let k = b.lambdas.len();
    let index = bc.index().re();
    if k != (index - 1e-9).ceil() as usize {
        return Err(InclusionError::RankObstruction(format!(
            "{k} basis elements for index {index}"
        )));
    }
    Ok(())
}

/// One representative per left coset `gH`, identity first.
fn coset_representatives<F: Field>(inc: &Inclusion<F>, g: &super::GroupData) -> Vec<Matrix<F>> {
    let els = g.group.elements();
    let mut seen = vec![false; els.len()];
    let mut reps = Vec::new();
    for (i, x) in els.iter().enumerate() {
        if seen[i] {
            continue;
        }
        for &h in &g.subgroup {
            let y = x.compose(&els[h]);
            seen[g.group.index_of(&y).expect("closed group")] = true;
        }
        reps.push(g.group.regular::<F>(x));
    }
    debug_assert_eq!(reps.len() * g.subgroup.len(), inc.m().dim());
    reps
}

/// Packs an orthonormal basis of `(M ⊖ N) f^b_{11}` into the slots `(b, t)`,
/// slots ordered by descending block size, then block index, then `t`.
fn packed_basis<F: Field>(inc: &Inclusion<F>) -> Result<Vec<Matrix<F>>, InclusionError> {
    let size = inc.size();
    let nb = BlockStructure::compute(inc.n())?;
    let mut order: Vec<usize> = (0..nb.len()).collect();
    order.sort_by_key(|&b| (std::cmp::Reverse(nb.blocks[b].size()), b));

    let mut units: Vec<Vec<Matrix<F>>> = Vec::new();
    let mut atoms: Vec<Vec<Matrix<F>>> = Vec::new();
    for block in &nb.blocks {
        let u = block.matrix_units(inc.n())?;
        let f = u[0].clone();
        let tf = inc.tau(&f);
        let mut found: Vec<Matrix<F>> = Vec::new();
        for b in inc.m().basis() {
            let x = b.mul(&f);
            let mut w = x.sub(&inc.cond_expect(&x)?);
            for a in &found {
                let c = inc.inner(&w, a).div_ref(&tf).expect("nonzero trace");
                w = w.sub(&a.scale(&c));
            }
            let nn = inc.norm2_sq(&w).div_ref(&tf).expect("nonzero trace");
            if nn.is_zero() {
                continue;
            }
            let s = nn.sqrt().ok_or_else(|| match nn.to_quadratic() {
                Some(q) => InclusionError::NeedsSqrt(q),
                None => InclusionError::Degenerate("negative norm".into()),
            })?;
            found.push(w.scale(&s.inv().expect("nonzero norm")));
        }
        units.push(u);
        atoms.push(found);
    }

    let mut lambdas = vec![Matrix::identity(size)];
    let mut next = vec![0usize; nb.len()];
    let mut partial = 0;
    loop {
        let mut l = Matrix::zeros(size, size);
        let mut used = 0;
        let mut missing = 0;
        for &b in &order {
            for f1t in &units[b] {
                if next[b] < atoms[b].len() {
                    l = l.add(&atoms[b][next[b]].mul(f1t));
                    next[b] += 1;
                    used += 1;
                } else {
                    missing += 1;
                }
            }
        }
        if used == 0 {
            break;
        }
        if missing > 0 {
            partial += 1;
        }
        lambdas.push(l);
    }
    if partial > 1 {
        return Err(InclusionError::RankObstruction(format!(
            "{partial} partial basis elements; trace values cannot be packed"
        )));
    }
    Ok(lambdas)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inclusions::{basic_construction, build_group_inclusion, build_matrix_inclusion, build_tensor_inclusion, PermGroup};
    use crate::scalars::QuadraticNumber as Q;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn check(inc: &Inclusion<Q>, k: usize) -> PimsnerPopaBasis<Q> {
        let bc = basic_construction(inc).unwrap();
        let b = pimsner_popa_basis(inc, &bc).unwrap();
        assert_eq!(b.len(), k);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let x = inc.m().random_element(&mut rng);
            assert_eq!(b.expand(inc, &x).unwrap(), x);
        }
        b
    }

    #[test]
    fn c_in_m2_scaled_units() {
        let inc = build_matrix_inclusion("C in M2", 2, vec![Matrix::unit(2, 0, 1), Matrix::unit(2, 1, 0)], vec![], None)
            .unwrap();
        let b = check(&inc, 4);
        let r2 = Q::sqrt_radicand(2).unwrap();
        assert!(b.lambdas.iter().any(|l| *l == Matrix::unit(2, 0, 1).scale(&r2) || *l == Matrix::unit(2, 1, 0).scale(&r2)));
    }

    #[test]
    fn group_cosets() {
        let g = PermGroup::named("S3").unwrap();
        let inc: Inclusion<Q> = build_group_inclusion(&g, &[g.parse_element("(12)").unwrap()]).unwrap();
        check(&inc, 3);
        let inc: Inclusion<Q> = build_group_inclusion(&g, &[g.parse_element("(123)").unwrap()]).unwrap();
        check(&inc, 2);
    }

    #[test]
    fn diagonal_and_tensor() {
        let d3: Inclusion<Q> = build_matrix_inclusion(
            "D3 in M3",
            3,
            vec![Matrix::unit(3, 0, 1), Matrix::unit(3, 1, 0), Matrix::unit(3, 1, 2), Matrix::unit(3, 2, 1)],
            vec![Matrix::unit(3, 0, 0), Matrix::unit(3, 1, 1), Matrix::unit(3, 2, 2)],
            None,
        )
        .unwrap();
        check(&d3, 3);
        let t: Inclusion<Q> = build_tensor_inclusion(2, 2).unwrap();
        check(&t, 4);
    }

    #[test]
    fn c_in_m3_needs_another_radical() {
        let gens = vec![Matrix::unit(3, 0, 1), Matrix::unit(3, 1, 0), Matrix::unit(3, 1, 2), Matrix::unit(3, 2, 1)];
        let inc: Inclusion<Q> = build_matrix_inclusion("C in M3", 3, gens, vec![], None).unwrap();
        let bc = basic_construction(&inc).unwrap();
        assert!(matches!(pimsner_popa_basis(&inc, &bc), Err(InclusionError::NeedsSqrt(_))));
        let f = inc.to_float();
        let bcf = basic_construction(&f).unwrap();
        assert_eq!(pimsner_popa_basis(&f, &bcf).unwrap().len(), 9);
    }
}

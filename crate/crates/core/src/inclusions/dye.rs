use crate::field::Field;
use crate::linalg::Matrix;

use super::blocks::partial_isometry;
use super::{split_projections, BlockStructure, Inclusion, InclusionError, StarAlgebra};

/// Unitary `u ∈ M` with `uNu* ⊆ N` and `v = u v*v`.
#[derive(Clone, Debug)]
pub struct DyeResult<F: Field> {
    pub u: Matrix<F>,
    /// Number of pieces `n` in the partition of `1` (`1` when `v` is unitary).
    pub pieces: usize,
    /// `p₁ = v*v, p₂, …, p_n`.
    pub partition: Vec<Matrix<F>>,
}

fn is_zero_matrix<F: Field>(x: &Matrix<F>) -> bool {
    x.approx_eq(&Matrix::zeros(x.rows(), x.cols()))
}

/// Partial isometry `w ∈ alg` with `w w* = e` and `w* w = f`, for projections of equal rank vector.
fn equivalence<F: Field>(
    alg: &StarAlgebra<F>,
    blocks: &BlockStructure<F>,
    e: &Matrix<F>,
    f: &Matrix<F>,
) -> Result<Matrix<F>, InclusionError> {
    let size = e.rows();
    let group = |x: &Matrix<F>| -> Result<Vec<Vec<Matrix<F>>>, InclusionError> {
        let mut out = vec![Vec::new(); blocks.len()];
        for m in split_projections(alg, x)? {
            let b = blocks.block_of(&m).ok_or_else(|| InclusionError::Degenerate("stray projection".into()))?;
            out[b].push(m);
        }
        Ok(out)
    };
    let (ge, gf) = (group(e)?, group(f)?);
    let mut w = Matrix::zeros(size, size);
    for (xs, ys) in ge.iter().zip(&gf) {
        if xs.len() != ys.len() {
            return Err(InclusionError::RankObstruction("projections are not equivalent in N".into()));
        }
        for (x, y) in xs.iter().zip(ys) {
            w = w.add(&partial_isometry(alg, x, y)?);
        }
    }
    Ok(w)
}

/// Largest `k` with `k·ρ ≤ total` componentwise, and the remainder `total − k·ρ`.
fn copies(total: &[usize], rho: &[usize]) -> (usize, Vec<usize>) {
    let k = total
        .iter()
        .zip(rho)
        .filter(|(_, r)| **r > 0)
        .map(|(t, r)| t / r)
        .min()
        .unwrap_or(0);
    (k, total.iter().zip(rho).map(|(t, r)| t - k * r).collect())
}

/// Splits `1 − p` into `count` projections of rank vector `rho` and one remainder.
fn partition_complement<F: Field>(
    n: &StarAlgebra<F>,
    blocks: &BlockStructure<F>,
    p: &Matrix<F>,
    rho: &[usize],
    count: usize,
) -> Result<(Vec<Matrix<F>>, Matrix<F>), InclusionError> {
    let size = p.rows();
    let rest = Matrix::identity(size).sub(p);
    let mut pool: Vec<Vec<Matrix<F>>> = vec![Vec::new(); blocks.len()];
    for m in split_projections(n, &rest)? {
        let b = blocks.block_of(&m).ok_or_else(|| InclusionError::Degenerate("stray projection".into()))?;
        pool[b].push(m);
    }
    let mut parts = Vec::new();
    for _ in 0..count {
        let mut q = Matrix::zeros(size, size);
        for (b, r) in rho.iter().enumerate() {
            for _ in 0..*r {
                let m = pool[b].pop().ok_or_else(|| InclusionError::RankObstruction("not enough room under 1 − p".into()))?;
                q = q.add(&m);
            }
        }
        parts.push(q);
    }
    let mut remainder = Matrix::zeros(size, size);
    for ms in pool {
        for m in ms {
            remainder = remainder.add(&m);
        }
    }
    Ok((parts, remainder))
}

/// A subprojection `p⁰ ≤ p` in `N` with rank vector `target` whose image `v p⁰ v*` has rank vector `image_target`.
fn matching_subprojection<F: Field>(
    n: &StarAlgebra<F>,
    blocks: &BlockStructure<F>,
    p: &Matrix<F>,
    v: &Matrix<F>,
    target: &[usize],
    image_target: &[usize],
) -> Result<Matrix<F>, InclusionError> {
    let minimal = split_projections(n, p)?;
    let info: Vec<(usize, Vec<usize>)> = minimal
        .iter()
        .map(|m| {
            let b = blocks.block_of(m).unwrap_or(0);
            (b, blocks.rank_vector(&v.mul(m).mul(&v.adjoint())))
        })
        .collect();
    let mut chosen = vec![false; minimal.len()];
    fn search(
        i: usize,
        info: &[(usize, Vec<usize>)],
        need: &mut Vec<usize>,
        need_img: &mut Vec<usize>,
        chosen: &mut Vec<bool>,
    ) -> bool {
        if need.iter().all(|x| *x == 0) && need_img.iter().all(|x| *x == 0) {
            return true;
        }
        if i == info.len() {
            return false;
        }
        let (b, img) = &info[i];
        if need[*b] > 0 && img.iter().zip(need_img.iter()).all(|(a, c)| a <= c) {
            need[*b] -= 1;
            for (c, a) in need_img.iter_mut().zip(img) {
                *c -= a;
            }
            chosen[i] = true;
            if search(i + 1, info, need, need_img, chosen) {
                return true;
            }
            chosen[i] = false;
            need[*b] += 1;
            for (c, a) in need_img.iter_mut().zip(img) {
                *c += a;
            }
        }
        search(i + 1, info, need, need_img, chosen)
    }
    let mut need = target.to_vec();
    let mut need_img = image_target.to_vec();
    if !search(0, &info, &mut need, &mut need_img, &mut chosen) {
        return Err(InclusionError::RankObstruction(
            "no subprojection of v*v matches the remaining ranks".into(),
        ));
    }
    let mut out = Matrix::zeros(p.rows(), p.cols());
    for (m, c) in minimal.iter().zip(&chosen) {
        if *c {
            out = out.add(m);
        }
    }
    Ok(out)
}

pub fn dye_unitary<F: Field>(inc: &Inclusion<F>, v: &Matrix<F>) -> Result<DyeResult<F>, InclusionError> {
    let n = inc.n();
    if !inc.m().contains(v) {
        return Err(InclusionError::NotInAlgebra("v".into()));
    }
    let vs = v.adjoint();
    let p = vs.mul(v);
    if is_zero_matrix(&p) {
        return Err(InclusionError::Degenerate("v*v = 0".into()));
    }
    if !v.mul(&p).approx_eq(v) {
        return Err(InclusionError::Degenerate("v is not a partial isometry".into()));
    }
    if !n.contains(&p) {
        return Err(InclusionError::NotInAlgebra("v*v is not in N".into()));
    }
    if n.basis().iter().any(|x| !n.contains(&v.mul(x).mul(&vs))) {
        return Err(InclusionError::NotInAlgebra("vNv* is not contained in N".into()));
    }
    let size = inc.size();
    let one = Matrix::identity(size);
    if p.approx_eq(&one) {
        return Ok(DyeResult { u: v.clone(), pieces: 1, partition: vec![p] });
    }
    let q = v.mul(&vs);
    let blocks = BlockStructure::compute(n)?;
    let total = blocks.sizes();
    let rho = blocks.rank_vector(&p);
    let sigma = blocks.rank_vector(&q);
    let (k, rem) = copies(&total, &rho);
    let (k2, rem2) = copies(&total, &sigma);
    if k != k2 || k == 0 {
        return Err(InclusionError::RankObstruction(format!(
            "v*v and vv* admit {k} and {k2} disjoint copies in N"
        )));
    }
    if rem.iter().zip(&rho).any(|(r, x)| r > x) || rem2.iter().zip(&sigma).any(|(r, x)| r > x) {
        return Err(InclusionError::RankObstruction(format!(
            "remainder {rem:?} does not fit under v*v with ranks {rho:?}"
        )));
    }
    let (p_parts, p_rest) = partition_complement(n, &blocks, &p, &rho, k - 1)?;
    let (q_parts, q_rest) = partition_complement(n, &blocks, &q, &sigma, k - 1)?;

    // u = Σ vᵢ v wᵢ with wᵢ : pᵢ → p and vᵢ : q → p'ᵢ.
    let mut u = v.clone();
    for (pi, qi) in p_parts.iter().zip(&q_parts) {
        let w = equivalence(n, &blocks, &p, pi)?;
        let vi = equivalence(n, &blocks, qi, &q)?;
        u = u.add(&vi.mul(v).mul(&w));
    }
    let mut partition = vec![p.clone()];
    partition.extend(p_parts.iter().cloned());
    if !is_zero_matrix(&p_rest) {
        let p0 = matching_subprojection(n, &blocks, &p, v, &rem, &rem2)?;
        let w = equivalence(n, &blocks, &p0, &p_rest)?;
        let image = v.mul(&p0).mul(&vs);
        let vi = equivalence(n, &blocks, &q_rest, &image)?;
        u = u.add(&vi.mul(v).mul(&w));
        partition.push(p_rest);
    }
    let result = DyeResult { u, pieces: partition.len(), partition };
    verify(inc, v, &result)?;
    Ok(result)
}

fn verify<F: Field>(inc: &Inclusion<F>, v: &Matrix<F>, r: &DyeResult<F>) -> Result<(), InclusionError> {
    let one = Matrix::identity(inc.size());
    let us = r.u.adjoint();
    if !us.mul(&r.u).approx_eq(&one) || !r.u.mul(&us).approx_eq(&one) {
        return Err(InclusionError::Degenerate("constructed u is not unitary".into()));
    }
    let p = v.adjoint().mul(v);
    if !r.u.mul(&p).approx_eq(v) {
        return Err(InclusionError::Degenerate("u v*v ≠ v".into()));
    }
    if inc.n().basis().iter().any(|x| !inc.n().contains(&r.u.mul(x).mul(&us))) {
        return Err(InclusionError::Degenerate("uNu* is not contained in N".into()));
    }
    Ok(())
}

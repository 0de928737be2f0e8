//! Central decomposition, minimal projections and matrix units.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::field::Field;
use crate::linalg::{Matrix, SpanBuilder};
use crate::spectral::hermitian_eigen;

use super::{InclusionError, StarAlgebra};

/// One simple summand `≅ M_m` of a multi-matrix algebra.
#[derive(Clone, Debug)]
pub struct Block<F: Field> {
    pub central: Matrix<F>,
    /// Orthogonal minimal projections summing to `central`.
    pub minimal: Vec<Matrix<F>>,
    /// Rank of each minimal projection on the representation space.
    pub multiplicity: usize,
}

impl<F: Field> Block<F> {
    /// Block size `m` (the summand is `M_m`).
    pub fn size(&self) -> usize {
        self.minimal.len()
    }

    /// Matrix units `f_{1t}` from the first minimal projection to the `t`-th;
    /// `f_{11}` is the first minimal projection itself.
    pub fn matrix_units(&self, alg: &StarAlgebra<F>) -> Result<Vec<Matrix<F>>, InclusionError> {
        let q1 = &self.minimal[0];
        let mut out = vec![q1.clone()];
        for qt in &self.minimal[1..] {
            out.push(partial_isometry(alg, q1, qt)?);
        }
        Ok(out)
    }
}

/// Partial isometry `w ∈ alg` with `w w* = p`, `w* w = q` for equivalent minimal projections.
pub(crate) fn partial_isometry<F: Field>(
    alg: &StarAlgebra<F>,
    p: &Matrix<F>,
    q: &Matrix<F>,
) -> Result<Matrix<F>, InclusionError> {
    let x = alg
        .basis()
        .iter()
        .map(|b| p.mul(b).mul(q))
        .find(|x| !x.is_zero())
        .ok_or_else(|| InclusionError::Degenerate("projections are not equivalent".into()))?;
    let c = x
        .mul(&x.adjoint())
        .trace()
        .div_ref(&p.trace())
        .ok_or_else(|| InclusionError::Degenerate("zero projection".into()))?;
    let s = c.sqrt().ok_or_else(|| match c.to_quadratic() {
        Some(q) => InclusionError::NeedsSqrt(q),
        None => InclusionError::Degenerate("negative norm".into()),
    })?;
    Ok(x.scale(&s.inv().expect("nonzero norm")))
}

#[derive(Clone, Debug)]
pub struct BlockStructure<F: Field> {
    pub blocks: Vec<Block<F>>,
}

impl<F: Field> BlockStructure<F> {
    pub fn compute(alg: &StarAlgebra<F>) -> Result<Self, InclusionError> {
        let minimal = split_projections(alg, &Matrix::identity(alg.size()))?;
        let k = minimal.len();
        let mut parent: Vec<usize> = (0..k).collect();
        fn find(p: &mut Vec<usize>, i: usize) -> usize {
            let mut r = i;
            while p[r] != r {
                r = p[r];
            }
            p[i] = r;
            r
        }
        for i in 0..k {
            for j in (i + 1)..k {
                let linked = alg.basis().iter().any(|b| !minimal[i].mul(b).mul(&minimal[j]).is_zero());
                if linked {
                    let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                    parent[b] = a;
                }
            }
        }
        let mut groups: Vec<Vec<usize>> = Vec::new();
        let mut root_of: Vec<(usize, usize)> = Vec::new();
        for i in 0..k {
            let r = find(&mut parent, i);
            match root_of.iter().find(|(root, _)| *root == r) {
                Some(&(_, g)) => groups[g].push(i),
                None => {
                    root_of.push((r, groups.len()));
                    groups.push(vec![i]);
                }
            }
        }
        let mut blocks: Vec<Block<F>> = groups
            .into_iter()
            .map(|g| {
                let mut central = Matrix::zeros(alg.size(), alg.size());
                for &i in &g {
                    central = central.add(&minimal[i]);
                }
                let multiplicity = rank_of_projection(&minimal[g[0]]);
                Block { central, minimal: g.into_iter().map(|i| minimal[i].clone()).collect(), multiplicity }
            })
            .collect();
        blocks.sort_by_key(|b| canonical_key(&b.central));
        Ok(BlockStructure { blocks })
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.blocks.iter().map(Block::size).collect()
    }

    pub fn multiplicities(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.multiplicity).collect()
    }

    /// Index of the block carrying a nonzero projection `p` (first one if several).
    pub fn block_of(&self, p: &Matrix<F>) -> Option<usize> {
        self.blocks.iter().position(|b| !b.central.mul(p).is_zero())
    }

    /// Rank of `p` inside each block, in units of minimal projections.
    pub fn rank_vector(&self, p: &Matrix<F>) -> Vec<usize> {
        self.blocks
            .iter()
            .map(|b| rank_of_projection(&b.central.mul(p)) / b.multiplicity.max(1))
            .collect()
    }
}

fn canonical_key<F: Field>(m: &Matrix<F>) -> Vec<(i64, i64)> {
    m.entries()
        .iter()
        .map(|x| {
            let c = x.to_complex();
            ((c.re * 1e8).round() as i64, (c.im * 1e8).round() as i64)
        })
        .collect()
}

pub(crate) fn rank_of_projection<F: Field>(p: &Matrix<F>) -> usize {
    p.trace().to_complex().re.round().max(0.0) as usize
}

/// Best rational approximation with a small denominator, if `x` is (numerically) rational.
pub(crate) fn recognize_rational(x: f64) -> Option<BigRational> {
    if !x.is_finite() {
        return None;
    }
    let (mut h0, mut h1) = (0i128, 1i128);
    let (mut k0, mut k1) = (1i128, 0i128);
    let mut r = x;
    for _ in 0..40 {
        let a = r.floor();
        if a.abs() > 1e12 {
            return None;
        }
        let ai = a as i128;
        let (h2, k2) = (ai * h1 + h0, ai * k1 + k0);
        if k2 > 10_000 {
            return None;
        }
        if ((h2 as f64) / (k2 as f64) - x).abs() < 1e-10 * (1.0 + x.abs()) {
            return Some(BigRational::new(BigInt::from(h2), BigInt::from(k2)));
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        let frac = r - a;
        if frac.abs() < 1e-15 {
            return None;
        }
        r = 1.0 / frac;
    }
    None
}

fn corner_basis<F: Field>(alg: &StarAlgebra<F>, p: &Matrix<F>) -> Vec<Matrix<F>> {
    let mut span = SpanBuilder::new(alg.size() * alg.size());
    let mut out = Vec::new();
    for b in alg.basis() {
        let c = p.mul(b).mul(p);
        if span.insert(c.entries()) {
            out.push(c);
        }
    }
    out
}

/// Splits a projection `p ∈ alg` into minimal projections of `alg` lying under `p`.
pub fn split_projections<F: Field>(alg: &StarAlgebra<F>, p: &Matrix<F>) -> Result<Vec<Matrix<F>>, InclusionError> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_b10c);
    let mut work = vec![p.clone()];
    let mut done = Vec::new();
    while let Some(q) = work.pop() {
        if q.is_zero() {
            continue;
        }
        let corner = corner_basis(alg, &q);
        if corner.len() <= 1 {
            done.push(q);
            continue;
        }
        let pieces = if F::EXACT { split_exact(&q, &corner)? } else { split_float(&q, &corner, &mut rng) };
        if pieces.len() < 2 {
            return Err(InclusionError::ExactUnavailable("could not split a non-minimal projection".into()));
        }
        work.extend(pieces.into_iter().rev());
    }
    Ok(done)
}

fn spectrum_on_range<F: Field>(q: &Matrix<F>, y: &Matrix<F>) -> Vec<(f64, Vec<usize>, Matrix<Complex64>)> {
    let yc = y.to_complex();
    let qc = q.to_complex();
    let n = q.rows();
    let big = 2.0 * (1.0 + yc.frobenius()) + 1.0;
    let shifted = yc.add(&Matrix::identity(n).sub(&qc).scale(&Complex64::new(big, 0.0)));
    let (vals, vecs) = hermitian_eigen(&shifted);
    let mut clusters: Vec<(f64, Vec<usize>)> = Vec::new();
    for (i, &v) in vals.iter().enumerate() {
        if v > big - 0.5 {
            continue;
        }
        match clusters.last_mut() {
            Some((c, idx)) if (v - *c).abs() < 1e-7 * (1.0 + c.abs()) => idx.push(i),
            _ => clusters.push((v, vec![i])),
        }
    }
    clusters.into_iter().map(|(c, idx)| (c, idx, vecs.clone())).collect()
}

fn split_float<F: Field>(q: &Matrix<F>, corner: &[Matrix<F>], rng: &mut ChaCha8Rng) -> Vec<Matrix<F>> {
    let n = q.rows();
    let mut y = Matrix::<Complex64>::zeros(n, n);
    for c in corner {
        let cc = c.to_complex();
        let herm = cc.add(&cc.adjoint());
        let skew = cc.sub(&cc.adjoint()).scale(&Complex64::new(0.0, -1.0));
        y = y.add(&herm.scale(&Complex64::new(rng.gen_range(-1.0..1.0), 0.0)));
        y = y.add(&skew.scale(&Complex64::new(rng.gen_range(-1.0..1.0), 0.0)));
    }
    let yf: Matrix<F> = y.map(|z| F::from_complex(*z).expect("float field"));
    spectrum_on_range(q, &yf)
        .into_iter()
        .map(|(_, idx, vecs)| {
            let mut p = Matrix::<Complex64>::zeros(n, n);
            for &i in &idx {
                let v = vecs.col_vec(i);
                let col = Matrix::column(&v);
                p = p.add(&col.mul(&col.adjoint()));
            }
            p.map(|z| F::from_complex(*z).expect("float field"))
        })
        .collect()
}

fn split_exact<F: Field>(q: &Matrix<F>, corner: &[Matrix<F>]) -> Result<Vec<Matrix<F>>, InclusionError> {
    let mut candidates: Vec<Matrix<F>> = corner.iter().map(|c| c.add(&c.adjoint())).collect();
    for i in 0..corner.len() {
        for j in (i + 1)..corner.len() {
            candidates.push(candidates[i].add(&candidates[j].scale(&F::from_i64(2))));
        }
    }
    for y in candidates {
        if let Some(pieces) = try_lagrange(q, &y) {
            return Ok(pieces);
        }
    }
    Err(InclusionError::ExactUnavailable(
        "no element with rational spectrum splits a corner (the real form does not split)".into(),
    ))
}

fn try_lagrange<F: Field>(q: &Matrix<F>, y: &Matrix<F>) -> Option<Vec<Matrix<F>>> {
    let values: Vec<F> = spectrum_on_range(q, y)
        .iter()
        .map(|(c, _, _)| recognize_rational(*c).map(|r| F::from_rational(&r)))
        .collect::<Option<Vec<F>>>()?;
    if values.len() < 2 {
        return None;
    }
    let mut pieces = Vec::new();
    let mut total = Matrix::zeros(q.rows(), q.cols());
    for (i, li) in values.iter().enumerate() {
        let mut p = q.clone();
        for (j, lj) in values.iter().enumerate() {
            if i == j {
                continue;
            }
            let factor = y.sub(&q.scale(lj)).scale(&li.sub_ref(lj).inv()?);
            p = p.mul(&factor);
        }
        if p.mul(&p) != p || y.mul(&p) != p.scale(li) || p.is_zero() {
            return None;
        }
        total = total.add(&p);
        pieces.push(p);
    }
    (total == *q).then_some(pieces)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inclusions::PermGroup;
    use crate::scalars::QuadraticNumber as Q;

    fn group_algebra<F: Field>(name: &str) -> StarAlgebra<F> {
        let g = PermGroup::named(name).unwrap();
        let basis: Vec<Matrix<F>> = g.elements().iter().map(|x| g.regular(x)).collect();
        StarAlgebra::from_basis(g.order(), basis.clone(), basis).unwrap()
    }

    #[test]
    fn s3_blocks_exact() {
        let a = group_algebra::<Q>("S3");
        let s = BlockStructure::compute(&a).unwrap();
        let mut sizes = s.sizes();
        sizes.sort_unstable();
        assert_eq!(sizes, vec![1, 1, 2]);
        // Regular representation: multiplicity equals block size.
        for b in &s.blocks {
            assert_eq!(b.multiplicity, b.size());
        }
    }

    #[test]
    fn cyclic_three_needs_complex_numbers() {
        let g = PermGroup::named("S3").unwrap();
        let r = g.parse_element("(123)").unwrap();
        let basis: Vec<Matrix<Q>> = g.subgroup(&[r]).iter().map(|&i| g.regular(&g.elements()[i])).collect();
        let a = StarAlgebra::from_basis(6, basis.clone(), basis.clone()).unwrap();
        assert!(matches!(BlockStructure::compute(&a), Err(InclusionError::ExactUnavailable(_))));
        let fa = a.map(|x| x.to_complex());
        assert_eq!(BlockStructure::compute(&fa).unwrap().len(), 3);
    }

    #[test]
    fn rationals_are_recognized() {
        assert_eq!(recognize_rational(0.75).unwrap(), BigRational::new(3.into(), 4.into()));
        assert_eq!(recognize_rational(-2.0).unwrap(), BigRational::from_integer((-2).into()));
        assert!(recognize_rational(std::f64::consts::SQRT_2).is_none());
    }

    #[test]
    fn matrix_units_of_m2() {
        let a = StarAlgebra::generated(2, vec![Matrix::<Q>::unit(2, 0, 1), Matrix::unit(2, 1, 0)]).unwrap();
        let s = BlockStructure::compute(&a).unwrap();
        let units = s.blocks[0].matrix_units(&a).unwrap();
        assert_eq!(units.len(), 2);
        assert_eq!(units[1].mul(&units[1].adjoint()), units[0]);
    }
}

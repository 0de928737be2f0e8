use rand::Rng;

use crate::field::Field;
use crate::linalg::{Frame, Matrix, SpanBuilder};

use super::InclusionError;

/// A unital *-subalgebra of `M_size(F)`, stored as a linear basis.
#[derive(Clone, Debug)]
pub struct StarAlgebra<F: Field> {
    size: usize,
    generators: Vec<Matrix<F>>,
    basis: Vec<Matrix<F>>,
    frame: Frame<F>,
}

fn flat<F: Field>(m: &Matrix<F>) -> Vec<F> {
    m.entries().to_vec()
}

impl<F: Field> StarAlgebra<F> {
    /// Unital algebra generated by `generators`; fails unless it is closed under `*`.
    pub fn generated(size: usize, generators: Vec<Matrix<F>>) -> Result<Self, InclusionError> {
        for (i, g) in generators.iter().enumerate() {
            if g.rows() != size || g.cols() != size {
                return Err(InclusionError::Schema(format!(
                    "generator {i} has shape {}x{}, expected {size}x{size}",
                    g.rows(),
                    g.cols()
                )));
            }
        }
        let mut span = SpanBuilder::new(size * size);
        let mut basis = Vec::new();
        let one = Matrix::identity(size);
        span.insert(&flat(&one));
        basis.push(one);
        let mut next = 0;
        while next < basis.len() {
            let b = basis[next].clone();
            next += 1;
            for g in &generators {
                let w = g.mul(&b);
                if span.insert(&flat(&w)) {
                    basis.push(w);
                }
            }
        }
        let frame = Frame::new(basis.iter().map(flat).collect()).expect("independent closure basis");
        let alg = StarAlgebra { size, generators, basis, frame };
        for (i, g) in alg.generators.iter().enumerate() {
            if !alg.contains(&g.adjoint()) {
                return Err(InclusionError::NotStarClosed(format!("adjoint of generator {i} is missing")));
            }
        }
        Ok(alg)
    }

    /// Trusted basis (e.g. group elements); the identity must lie in the span.
    pub fn from_basis(size: usize, generators: Vec<Matrix<F>>, basis: Vec<Matrix<F>>) -> Result<Self, InclusionError> {
        let frame = Frame::new(basis.iter().map(flat).collect())
            .ok_or_else(|| InclusionError::Schema("dependent basis".into()))?;
        let alg = StarAlgebra { size, generators, basis, frame };
        if !alg.contains(&Matrix::identity(size)) {
            return Err(InclusionError::NotUnital);
        }
        Ok(alg)
    }

    pub fn scalars(size: usize) -> Self {
        Self::generated(size, Vec::new()).expect("scalars")
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Matrix<F>] {
        &self.basis
    }

    pub fn generators(&self) -> &[Matrix<F>] {
        &self.generators
    }

    /// Generators if any, otherwise the basis (so commutation tests are never vacuous by accident).
    pub fn generating_set(&self) -> &[Matrix<F>] {
        if self.generators.is_empty() {
            &self.basis
        } else {
            &self.generators
        }
    }

    pub fn contains(&self, x: &Matrix<F>) -> bool {
        self.coords(x).is_some()
    }

    pub fn coords(&self, x: &Matrix<F>) -> Option<Vec<F>> {
        if x.rows() != self.size || x.cols() != self.size {
            return None;
        }
        self.frame.try_coords(x.entries())
    }

    pub fn element(&self, coords: &[F]) -> Matrix<F> {
        Matrix::from_vec(self.size, self.size, self.frame.combine(coords))
    }

    pub fn contains_algebra(&self, other: &StarAlgebra<F>) -> bool {
        other.basis.iter().all(|b| self.contains(b))
    }

    /// `{x ∈ self : xa = ax for all a in others}`.
    pub fn commutant_in(&self, others: &[Matrix<F>]) -> Vec<Matrix<F>> {
        let k = self.dim();
        let n2 = self.size * self.size;
        let mut rows: Vec<Vec<F>> = Vec::new();
        let comms: Vec<Vec<Matrix<F>>> =
            others.iter().map(|a| self.basis.iter().map(|b| b.commutator(a)).collect()).collect();
        for per_a in &comms {
            for e in 0..n2 {
                let row: Vec<F> = per_a.iter().map(|c| c.entries()[e].clone()).collect();
                if row.iter().any(|x| !x.is_zero()) {
                    rows.push(row);
                }
            }
        }
        if rows.is_empty() {
            return self.basis.clone();
        }
        let sys = Matrix::from_vec(rows.len(), k, rows.into_iter().flatten().collect());
        sys.nullspace().iter().map(|c| self.element(c)).collect()
    }

    pub fn center(&self) -> Vec<Matrix<F>> {
        self.commutant_in(self.generating_set())
    }

    pub fn random_element<R: Rng + ?Sized>(&self, rng: &mut R) -> Matrix<F> {
        let c: Vec<F> = (0..self.dim()).map(|_| F::sample(rng)).collect();
        self.element(&c)
    }

    pub fn map<G: Field>(&self, f: impl Fn(&F) -> G + Copy) -> StarAlgebra<G> {
        let basis: Vec<Matrix<G>> = self.basis.iter().map(|b| b.map(f)).collect();
        let frame = Frame::new(basis.iter().map(|b| b.entries().to_vec()).collect())
            .expect("basis stays independent");
        StarAlgebra {
            size: self.size,
            generators: self.generators.iter().map(|g| g.map(f)).collect(),
            basis,
            frame,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalars::QuadraticNumber as Q;

    #[test]
    fn matrix_units_generate_full_algebra() {
        let a = StarAlgebra::generated(2, vec![Matrix::<Q>::unit(2, 0, 1), Matrix::unit(2, 1, 0)]).unwrap();
        assert_eq!(a.dim(), 4);
        assert_eq!(a.center().len(), 1);
    }

    #[test]
    fn non_star_closed_is_rejected() {
        let err = StarAlgebra::generated(2, vec![Matrix::<Q>::unit(2, 0, 1)]).unwrap_err();
        assert!(matches!(err, InclusionError::NotStarClosed(_)));
    }

    #[test]
    fn diagonal_center() {
        let a = StarAlgebra::generated(3, vec![Matrix::<Q>::unit(3, 0, 0), Matrix::unit(3, 1, 1)]).unwrap();
        assert_eq!(a.dim(), 3);
        assert_eq!(a.center().len(), 3);
    }
}

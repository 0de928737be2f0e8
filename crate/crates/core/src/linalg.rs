//! Dense matrices over a [`Field`] with exact or pivoted elimination.

use std::fmt;

use num_complex::Complex64;

use crate::field::Field;

/// Relative pivot threshold in float mode.
pub const FLOAT_PIVOT: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<F: Field> {
    rows: usize,
    cols: usize,
    data: Vec<F>,
}

impl<F: Field> Matrix<F> {
    pub fn from_vec(rows: usize, cols: usize, data: Vec<F>) -> Self {
        assert_eq!(data.len(), rows * cols, "matrix data length");
        Matrix { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![F::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = F::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> F) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    /// The matrix unit `e_ij` in `M_n`.
    pub fn unit(n: usize, i: usize, j: usize) -> Self {
        let mut m = Self::zeros(n, n);
        m.data[i * n + j] = F::one();
        m
    }

    pub fn column(v: &[F]) -> Self {
        Matrix { rows: v.len(), cols: 1, data: v.to_vec() }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &F {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: F) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[F] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn entries(&self) -> &[F] {
        &self.data
    }

    pub fn into_entries(self) -> Vec<F> {
        self.data
    }

    pub fn col_vec(&self, j: usize) -> Vec<F> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn from_columns(rows: usize, columns: &[Vec<F>]) -> Self {
        Self::from_fn(rows, columns.len(), |i, j| columns[j][i].clone())
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matrix product shape");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self.data[i * self.cols + k];
                if a.is_zero() && F::EXACT {
                    continue;
                }
                let brow = other.row(k);
                let orow = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (o, b) in orow.iter_mut().zip(brow) {
                    if F::EXACT && b.is_zero() {
                        continue;
                    }
                    *o = o.add_ref(&a.mul_ref(b));
                }
            }
        }
        out
    }

    pub fn apply(&self, v: &[F]) -> Vec<F> {
        assert_eq!(self.cols, v.len(), "matrix-vector shape");
        (0..self.rows)
            .map(|i| {
                let mut acc = F::zero();
                for (a, b) in self.row(i).iter().zip(v) {
                    if F::EXACT && (a.is_zero() || b.is_zero()) {
                        continue;
                    }
                    acc = acc.add_ref(&a.mul_ref(b));
                }
                acc
            })
            .collect()
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a.add_ref(b))
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a.sub_ref(b))
    }

    fn zip_with(&self, other: &Self, f: impl Fn(&F, &F) -> F) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "matrix shape");
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| f(a, b)).collect(),
        }
    }

    pub fn scale(&self, c: &F) -> Self {
        self.map(|x| c.mul_ref(x))
    }

    pub fn neg(&self) -> Self {
        self.map(|x| x.neg_ref())
    }

    pub fn map<G: Field>(&self, f: impl Fn(&F) -> G) -> Matrix<G> {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(f).collect() }
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    pub fn trace(&self) -> F {
        let mut acc = F::zero();
        for i in 0..self.rows.min(self.cols) {
            acc = acc.add_ref(self.get(i, i));
        }
        acc
    }

    /// `tr(self · other)` without forming the product.
    pub fn trace_product(&self, other: &Self) -> F {
        assert_eq!((self.cols, self.rows), (other.rows, other.cols), "trace product shape");
        let mut acc = F::zero();
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                let b = other.get(k, i);
                if F::EXACT && (a.is_zero() || b.is_zero()) {
                    continue;
                }
                acc = acc.add_ref(&a.mul_ref(b));
            }
        }
        acc
    }

    pub fn kron(&self, other: &Self) -> Self {
        let (r, c) = (self.rows * other.rows, self.cols * other.cols);
        Self::from_fn(r, c, |i, j| {
            let a = self.get(i / other.rows, j / other.cols);
            if a.is_zero() {
                return F::zero();
            }
            a.mul_ref(other.get(i % other.rows, j % other.cols))
        })
    }

    pub fn commutator(&self, other: &Self) -> Self {
        self.mul(other).sub(&other.mul(self))
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    pub fn approx_eq(&self, other: &Self) -> bool {
        self.rows == other.rows && self.cols == other.cols && self.sub(other).is_zero()
    }

    pub fn is_hermitian(&self) -> bool {
        self.is_square() && self.approx_eq(&self.adjoint())
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|x| x.magnitude()).fold(0.0, f64::max)
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|x| x.magnitude().powi(2)).sum::<f64>().sqrt()
    }

    pub fn to_complex(&self) -> Matrix<Complex64> {
        self.map(|x| x.to_complex())
    }

    /// Block-diagonal direct sum.
    pub fn direct_sum(blocks: &[Matrix<F>]) -> Self {
        let r: usize = blocks.iter().map(|b| b.rows).sum();
        let c: usize = blocks.iter().map(|b| b.cols).sum();
        let mut out = Self::zeros(r, c);
        let (mut r0, mut c0) = (0, 0);
        for b in blocks {
            for i in 0..b.rows {
                for j in 0..b.cols {
                    out.set(r0 + i, c0 + j, b.get(i, j).clone());
                }
            }
            r0 += b.rows;
            c0 += b.cols;
        }
        out
    }

    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Self {
        Self::from_fn(rows.len(), cols.len(), |i, j| self.get(rows[i], cols[j]).clone())
    }

    pub fn rank(&self) -> usize {
        Echelon::new(self).pivots.len()
    }

    pub fn nullspace(&self) -> Vec<Vec<F>> {
        Echelon::new(self).kernel()
    }

    pub fn inverse(&self) -> Option<Self> {
        if !self.is_square() {
            return None;
        }
        let n = self.rows;
        let mut aug = Self::zeros(n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                aug.set(i, j, self.get(i, j).clone());
            }
            aug.set(i, n + i, F::one());
        }
        let ech = Echelon::new_limited(&aug, n);
        if ech.pivots.len() < n || ech.pivots.iter().enumerate().any(|(i, &p)| p != i) {
            return None;
        }
        Some(Self::from_fn(n, n, |i, j| ech.reduced.get(i, n + j).clone()))
    }

    /// Some `x` with `self · x = b`, or `None` when inconsistent.
    pub fn solve(&self, b: &[F]) -> Option<Vec<F>> {
        assert_eq!(b.len(), self.rows, "right-hand side length");
        let n = self.cols;
        let mut aug = Self::zeros(self.rows, n + 1);
        for i in 0..self.rows {
            for j in 0..n {
                aug.set(i, j, self.get(i, j).clone());
            }
            aug.set(i, n, b[i].clone());
        }
        let ech = Echelon::new_limited(&aug, n);
        let scale = if F::EXACT { 1.0 } else { 1.0 + aug.max_abs() };
        for i in ech.pivots.len()..self.rows {
            let r = ech.reduced.get(i, n);
            if !negligible(r, scale) {
                return None;
            }
        }
        let mut x = vec![F::zero(); n];
        for (i, &p) in ech.pivots.iter().enumerate() {
            x[p] = ech.reduced.get(i, n).clone();
        }
        Some(x)
    }
}

impl Matrix<Complex64> {
    pub fn to_nalgebra(&self) -> nalgebra::DMatrix<Complex64> {
        nalgebra::DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }

    pub fn from_nalgebra(m: &nalgebra::DMatrix<Complex64>) -> Self {
        Self::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
    }
}

impl<F: Field> fmt::Display for Matrix<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for i in 0..self.rows {
            if i > 0 {
                f.write_str(", ")?;
            }
            f.write_str("[")?;
            for j in 0..self.cols {
                if j > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{}", self.get(i, j))?;
            }
            f.write_str("]")?;
        }
        f.write_str("]")
    }
}

fn negligible<F: Field>(x: &F, scale: f64) -> bool {
    if F::EXACT {
        x.is_zero()
    } else {
        x.magnitude() <= FLOAT_PIVOT * scale
    }
}

/// Reduced row echelon form.
pub struct Echelon<F: Field> {
    pub reduced: Matrix<F>,
    pub pivots: Vec<usize>,
}

impl<F: Field> Echelon<F> {
    pub fn new(m: &Matrix<F>) -> Self {
        Self::new_limited(m, m.cols)
    }

    /// Pivots only within the first `limit` columns.
    pub fn new_limited(m: &Matrix<F>, limit: usize) -> Self {
        let mut a = m.clone();
        let scale = if F::EXACT { 1.0 } else { 1.0 + m.max_abs() };
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..limit {
            if row == a.rows {
                break;
            }
            let pick = if F::EXACT {
                (row..a.rows).find(|&i| !a.get(i, col).is_zero())
            } else {
                (row..a.rows)
                    .map(|i| (i, a.get(i, col).magnitude()))
                    .filter(|&(_, v)| v > FLOAT_PIVOT * scale)
                    .max_by(|x, y| x.1.total_cmp(&y.1))
                    .map(|(i, _)| i)
            };
            let Some(p) = pick else { continue };
            if p != row {
                for j in 0..a.cols {
                    a.data.swap(p * a.cols + j, row * a.cols + j);
                }
            }
            let inv = a.get(row, col).inv().expect("nonzero pivot");
            for j in 0..a.cols {
                let v = a.get(row, j).mul_ref(&inv);
                a.set(row, j, v);
            }
            a.set(row, col, F::one());
            let pivot_row: Vec<F> = a.row(row).to_vec();
            for i in 0..a.rows {
                if i == row {
                    continue;
                }
                let f = a.get(i, col).clone();
                if f.is_zero() && F::EXACT {
                    continue;
                }
                for j in 0..a.cols {
                    if F::EXACT && pivot_row[j].is_zero() {
                        continue;
                    }
                    let v = a.get(i, j).sub_ref(&f.mul_ref(&pivot_row[j]));
                    a.set(i, j, v);
                }
                if !F::EXACT {
                    a.set(i, col, F::zero());
                }
            }
            pivots.push(col);
            row += 1;
        }
        Echelon { reduced: a, pivots }
    }

    pub fn kernel(&self) -> Vec<Vec<F>> {
        let n = self.reduced.cols;
        let free: Vec<usize> = (0..n).filter(|c| !self.pivots.contains(c)).collect();
        free.iter()
            .map(|&fc| {
                let mut v = vec![F::zero(); n];
                v[fc] = F::one();
                for (i, &p) in self.pivots.iter().enumerate() {
                    v[p] = self.reduced.get(i, fc).neg_ref();
                }
                v
            })
            .collect()
    }
}

/// Incremental span of vectors with membership testing.
#[derive(Clone, Debug)]
pub struct SpanBuilder<F: Field> {
    len: usize,
    rows: Vec<(usize, Vec<F>)>,
}

impl<F: Field> SpanBuilder<F> {
    pub fn new(len: usize) -> Self {
        SpanBuilder { len, rows: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    fn reduce(&self, v: &[F]) -> Vec<F> {
        let mut r = v.to_vec();
        for (p, row) in &self.rows {
            let f = r[*p].clone();
            if f.is_zero() && F::EXACT {
                continue;
            }
            for (x, y) in r.iter_mut().zip(row) {
                if F::EXACT && y.is_zero() {
                    continue;
                }
                *x = x.sub_ref(&f.mul_ref(y));
            }
        }
        r
    }

    fn leading(&self, r: &[F], scale: f64) -> Option<usize> {
        if F::EXACT {
            r.iter().position(|x| !x.is_zero())
        } else {
            r.iter()
                .enumerate()
                .map(|(i, x)| (i, x.magnitude()))
                .filter(|&(_, m)| m > FLOAT_PIVOT * scale)
                .max_by(|a, b| a.1.total_cmp(&b.1))
                .map(|(i, _)| i)
        }
    }

    fn scale_of(v: &[F]) -> f64 {
        if F::EXACT {
            return 1.0;
        }
        v.iter().map(|x| x.magnitude()).fold(0.0, f64::max).max(1e-300)
    }

    pub fn contains(&self, v: &[F]) -> bool {
        assert_eq!(v.len(), self.len);
        let r = self.reduce(v);
        self.leading(&r, Self::scale_of(v)).is_none()
    }

    /// Adds `v` if independent; returns whether it was added.
    pub fn insert(&mut self, v: &[F]) -> bool {
        assert_eq!(v.len(), self.len);
        let r = self.reduce(v);
        let Some(p) = self.leading(&r, Self::scale_of(v)) else {
            return false;
        };
        let inv = r[p].inv().expect("nonzero pivot");
        let mut row: Vec<F> = r.iter().map(|x| x.mul_ref(&inv)).collect();
        row[p] = F::one();
        for (_, other) in self.rows.iter_mut() {
            let f = other[p].clone();
            if f.is_zero() {
                continue;
            }
            for (x, y) in other.iter_mut().zip(&row) {
                *x = x.sub_ref(&f.mul_ref(y));
            }
            other[p] = F::zero();
        }
        self.rows.push((p, row));
        true
    }
}

/// A linearly independent family with fast coordinate extraction.
#[derive(Clone, Debug)]
pub struct Frame<F: Field> {
    vectors: Vec<Vec<F>>,
    pivots: Vec<usize>,
    inv: Matrix<F>,
}

impl<F: Field> Frame<F> {
    /// `None` if the vectors are dependent.
    pub fn new(vectors: Vec<Vec<F>>) -> Option<Self> {
        let k = vectors.len();
        if k == 0 {
            return Some(Frame { vectors, pivots: Vec::new(), inv: Matrix::zeros(0, 0) });
        }
        let len = vectors[0].len();
        // Pivot rows of the column matrix pick a well-posed square subsystem.
        let cols = Matrix::from_columns(len, &vectors);
        let ech = Echelon::new(&cols.transpose());
        if ech.pivots.len() < k {
            return None;
        }
        let pivots = ech.pivots.clone();
        let square = Matrix::from_fn(k, k, |i, j| vectors[j][pivots[i]].clone());
        let inv = square.inverse()?;
        Some(Frame { vectors, pivots, inv })
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn vectors(&self) -> &[Vec<F>] {
        &self.vectors
    }

    /// Coordinates of `v`, assuming it lies in the span.
    pub fn coords(&self, v: &[F]) -> Vec<F> {
        let rhs: Vec<F> = self.pivots.iter().map(|&p| v[p].clone()).collect();
        self.inv.apply(&rhs)
    }

    pub fn combine(&self, coords: &[F]) -> Vec<F> {
        let len = self.vectors.first().map_or(0, |v| v.len());
        let mut out = vec![F::zero(); len];
        for (c, v) in coords.iter().zip(&self.vectors) {
            if c.is_zero() && F::EXACT {
                continue;
            }
            for (o, x) in out.iter_mut().zip(v) {
                if F::EXACT && x.is_zero() {
                    continue;
                }
                *o = o.add_ref(&c.mul_ref(x));
            }
        }
        out
    }

    /// Coordinates if `v` lies in the span.
    pub fn try_coords(&self, v: &[F]) -> Option<Vec<F>> {
        let c = self.coords(v);
        let back = self.combine(&c);
        let scale = 1.0 + v.iter().map(|x| x.magnitude()).fold(0.0, f64::max);
        let ok = back.iter().zip(v).all(|(a, b)| negligible(&a.sub_ref(b), scale));
        ok.then_some(c)
    }
}

pub fn dot<F: Field>(x: &[F], y: &[F]) -> F {
    let mut acc = F::zero();
    for (a, b) in x.iter().zip(y) {
        if F::EXACT && (a.is_zero() || b.is_zero()) {
            continue;
        }
        acc = acc.add_ref(&a.mul_ref(b));
    }
    acc
}

pub fn axpy<F: Field>(a: &F, x: &[F], y: &mut [F]) {
    if a.is_zero() && F::EXACT {
        return;
    }
    for (yi, xi) in y.iter_mut().zip(x) {
        if F::EXACT && xi.is_zero() {
            continue;
        }
        *yi = yi.add_ref(&a.mul_ref(xi));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalars::QuadraticNumber;

    type Q = QuadraticNumber;

    fn qm(rows: usize, cols: usize, v: &[i64]) -> Matrix<Q> {
        Matrix::from_vec(rows, cols, v.iter().map(|&x| Q::from_integer(x)).collect())
    }

    #[test]
    fn inverse_round_trip() {
        let a = qm(3, 3, &[2, 1, 0, 1, 3, 1, 0, 1, 4]);
        let inv = a.inverse().unwrap();
        assert_eq!(a.mul(&inv), Matrix::identity(3));
        assert!(qm(2, 2, &[1, 2, 2, 4]).inverse().is_none());
    }

    #[test]
    fn kernel_and_rank() {
        let a = qm(2, 3, &[1, 2, 3, 2, 4, 6]);
        assert_eq!(a.rank(), 1);
        let ker = a.nullspace();
        assert_eq!(ker.len(), 2);
        for v in ker {
            assert!(a.apply(&v).iter().all(|x| x.is_zero()));
        }
    }

    #[test]
    fn solve_detects_inconsistency() {
        let a = qm(2, 2, &[1, 1, 1, 1]);
        assert!(a.solve(&[Q::from_integer(1), Q::from_integer(2)]).is_none());
        let x = a.solve(&[Q::from_integer(3), Q::from_integer(3)]).unwrap();
        assert_eq!(a.apply(&x), vec![Q::from_integer(3), Q::from_integer(3)]);
    }

    #[test]
    fn frame_coordinates() {
        let vs = vec![
            vec![Q::from_integer(1), Q::from_integer(1), Q::from_integer(0)],
            vec![Q::from_integer(0), Q::from_integer(1), Q::from_integer(1)],
        ];
        let f = Frame::new(vs).unwrap();
        let v = vec![Q::from_integer(2), Q::from_integer(5), Q::from_integer(3)];
        assert_eq!(f.try_coords(&v).unwrap(), vec![Q::from_integer(2), Q::from_integer(3)]);
        assert!(f.try_coords(&[Q::from_integer(1), Q::from_integer(0), Q::from_integer(0)]).is_none());
    }

    #[test]
    fn span_builder_float() {
        let mut s = SpanBuilder::<Complex64>::new(3);
        let c = |x: f64| Complex64::new(x, 0.0);
        assert!(s.insert(&[c(1.0), c(2.0), c(0.0)]));
        assert!(!s.insert(&[c(2.0), c(4.0), c(0.0)]));
        assert!(s.insert(&[c(0.0), c(0.0), c(1.0)]));
        assert!(s.contains(&[c(1.0), c(2.0), c(5.0)]));
        assert_eq!(s.dim(), 2);
    }

    #[test]
    fn kron_shape() {
        let a = qm(2, 2, &[1, 2, 3, 4]);
        let b = Matrix::<Q>::identity(2);
        let k = a.kron(&b);
        assert_eq!(k.rows(), 4);
        assert_eq!(k.get(2, 0), &Q::from_integer(3));
        assert_eq!(k.trace(), Q::from_integer(10));
    }
}

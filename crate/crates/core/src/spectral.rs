//! Floating-point spectral routines backed by nalgebra.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::linalg::Matrix;

pub type CMatrix = Matrix<Complex64>;

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Eigenvalues (ascending) and eigenvectors (columns) of a Hermitian matrix.
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let a = m.to_nalgebra();
    let h = (&a + a.adjoint()) * c(0.5);
    let eig = h.symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(m.rows(), m.rows(), |i, j| eig.eigenvectors[(i, order[j])]);
    (values, vectors)
}

pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    let svd = m.to_nalgebra().svd(false, false);
    let mut s: Vec<f64> = svd.singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

pub fn operator_norm(m: &CMatrix) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

/// Projection onto the operator-norm unit ball: singular values clipped at 1.
pub fn clip_singular_values(m: &CMatrix) -> CMatrix {
    let svd = m.to_nalgebra().svd(true, true);
    let u = svd.u.expect("left singular vectors");
    let vt = svd.v_t.expect("right singular vectors");
    let s = DMatrix::from_diagonal(&svd.singular_values.map(|x| c(x.min(1.0))));
    CMatrix::from_nalgebra(&(u * s * vt))
}

/// Unitary factor of the polar decomposition.
pub fn polar_unitary(m: &CMatrix) -> CMatrix {
    let svd = m.to_nalgebra().svd(true, true);
    let u = svd.u.expect("left singular vectors");
    let vt = svd.v_t.expect("right singular vectors");
    CMatrix::from_nalgebra(&(u * vt))
}

/// `exp(i t h)` for Hermitian `h`.
pub fn unitary_exp(h: &CMatrix, t: f64) -> CMatrix {
    let (vals, vecs) = hermitian_eigen(h);
    let n = h.rows();
    let d = CMatrix::from_fn(n, n, |i, j| {
        if i == j {
            Complex64::from_polar(1.0, t * vals[i])
        } else {
            c(0.0)
        }
    });
    vecs.mul(&d).mul(&vecs.adjoint())
}

/// Haar-distributed unitary via QR of a Ginibre matrix.
pub fn random_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    let g = DMatrix::from_fn(n, n, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let qr = g.qr();
    let q = qr.q();
    let r = qr.r();
    let phases = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            let d = r[(i, i)];
            if d.norm() > 0.0 {
                d / d.norm()
            } else {
                c(1.0)
            }
        } else {
            c(0.0)
        }
    });
    CMatrix::from_nalgebra(&(q * phases))
}

/// Gram–Schmidt for columns under `⟨x, y⟩ = y* G x`; drops dependent columns.
pub fn orthonormalize(columns: &[Vec<Complex64>], gram: &CMatrix, tol: f64) -> Vec<Vec<Complex64>> {
    let inner = |x: &[Complex64], y: &[Complex64]| -> Complex64 {
        let gx = gram.apply(x);
        y.iter().zip(&gx).map(|(a, b)| a.conj() * b).sum()
    };
    let mut out: Vec<Vec<Complex64>> = Vec::new();
    for col in columns {
        let mut v = col.clone();
        for _ in 0..2 {
            for q in &out {
                let p = inner(&v, q);
                for (vi, qi) in v.iter_mut().zip(q) {
                    *vi -= p * qi;
                }
            }
        }
        let n = inner(&v, &v).re.max(0.0).sqrt();
        let base = inner(col, col).re.max(0.0).sqrt();
        if n > tol * base.max(1.0) {
            out.push(v.into_iter().map(|x| x / n).collect());
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn random_unitary_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u = random_unitary(4, &mut rng);
        let e = u.adjoint().mul(&u).sub(&CMatrix::identity(4));
        assert!(e.max_abs() < 1e-12);
    }

    #[test]
    fn clipping_caps_norm() {
        let m = CMatrix::from_vec(2, 2, vec![c(3.0), c(0.0), c(0.0), c(0.5)]);
        let k = clip_singular_values(&m);
        assert!((operator_norm(&k) - 1.0).abs() < 1e-12);
        assert!((k.get(1, 1).re - 0.5).abs() < 1e-12);
    }

    #[test]
    fn exp_of_pauli() {
        let x = CMatrix::from_vec(2, 2, vec![c(0.0), c(1.0), c(1.0), c(0.0)]);
        let u = unitary_exp(&x, std::f64::consts::FRAC_PI_2);
        // exp(iπX/2) = iX
        assert!((u.get(0, 1) - Complex64::new(0.0, 1.0)).norm() < 1e-12);
        assert!(u.get(0, 0).norm() < 1e-12);
    }

    #[test]
    fn eigen_sorted() {
        let m = CMatrix::from_vec(2, 2, vec![c(2.0), c(1.0), c(1.0), c(2.0)]);
        let (v, _) = hermitian_eigen(&m);
        assert!((v[0] - 1.0).abs() < 1e-12 && (v[1] - 3.0).abs() < 1e-12);
    }
}

//! Singularity analytics on finite-dimensional inclusions.

mod angle;
mod constants;
mod minimal;
mod norm;
mod perturbation;
mod scan;
mod wahp;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::field::Field;
use crate::inclusions::{Inclusion, InclusionError, StarAlgebra};
use crate::linalg::Matrix;
use crate::scalars::ScalarError;
use crate::spectral::{polar_unitary, CMatrix};

pub use angle::{angle, AngleReport};
pub use constants::{angle_model, ss_constant, AngleModel, SsConstant};
pub use minimal::{beta_quadratic, corollary32_check, minimal_element, BetaRoots, Corollary32, MinimalElement};
pub use norm::{norm_inf2, unit_ball_oracle_m2, NormEstimate};
pub use perturbation::{perturbation_witness_check, Clause, PerturbationReport, PerturbationWitness};
pub use scan::{singularity_report, singularity_scan, NormalizerFinding, RatioSample, ScanReport, SingularityReport};
pub use wahp::{wahp_witness, WahpReport, WahpSample};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricsError {
    #[error("u is not unitary (defect {0:.3e})")]
    NotUnitary(f64),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("invalid witness: {0}")]
    InvalidWitness(String),
    #[error(transparent)]
    Inclusion(#[from] InclusionError),
    #[error(transparent)]
    Scalar(#[from] ScalarError),
}

/// Search effort for the optimizers.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Budget {
    pub restarts: usize,
    pub iterations: usize,
    /// Random unitaries sampled by the scan.
    pub samples: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Budget { restarts: 32, iterations: 400, samples: 8 }
    }
}

/// Independent generator for restart `stream` of a run seeded with `seed`.
pub fn restart_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Unitary part of a Gaussian element of `alg`.
pub fn random_unitary_in<R: rand::Rng + ?Sized>(alg: &StarAlgebra<Complex64>, rng: &mut R) -> CMatrix {
    polar_unitary(&alg.random_element(rng))
}

pub fn random_unitaries(alg: &StarAlgebra<Complex64>, count: usize, seed: u64) -> Vec<CMatrix> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| random_unitary_in(alg, &mut rng)).collect()
}

/// Rejects `u` outside `M` or with `‖u*u − 1‖ > 1e-8`.
pub fn check_unitary<F: Field>(inc: &Inclusion<F>, u: &Matrix<F>) -> Result<(), MetricsError> {
    if !inc.m().contains(u) {
        return Err(InclusionError::NotInAlgebra("u".into()).into());
    }
    let one = Matrix::identity(inc.size());
    let defect = u.adjoint().mul(u).sub(&one).max_abs().max(u.mul(&u.adjoint()).sub(&one).max_abs());
    if defect > 1e-8 {
        return Err(MetricsError::NotUnitary(defect));
    }
    Ok(())
}

/// `a ≤ b`, exactly when both sides are exact.
pub(crate) fn field_le<F: Field>(a: &F, b: &F) -> bool {
    match (a.to_quadratic(), b.to_quadratic()) {
        (Some(x), Some(y)) => x.compare(&y).map(|o| o.is_le()).unwrap_or(x.to_f64() <= y.to_f64()),
        _ => a.re() <= b.re() + 1e-12,
    }
}

/// `E_A(x) = Σ τ(aₖ* x) aₖ` for a `τ`-orthonormal basis `aₖ`.
#[derive(Clone, Debug)]
pub(crate) struct Projector {
    basis: Vec<CMatrix>,
    weighted: Vec<CMatrix>,
}

impl Projector {
    pub(crate) fn new(inc: &Inclusion<Complex64>, spanning: &[CMatrix]) -> Self {
        let mut basis: Vec<CMatrix> = Vec::new();
        for s in spanning {
            let mut w = s.clone();
            for _ in 0..2 {
                for a in &basis {
                    let c = inc.inner(&w, a);
                    w = w.sub(&a.scale(&c));
                }
            }
            let n = inc.norm2_sq(&w).re.max(0.0).sqrt();
            let base = inc.norm2_sq(s).re.max(0.0).sqrt();
            if n > 1e-10 * base.max(1.0) {
                basis.push(w.scale(&Complex64::new(1.0 / n, 0.0)));
            }
        }
        let weighted = basis.iter().map(|a| a.mul(inc.density())).collect();
        Projector { basis, weighted }
    }

    pub(crate) fn apply(&self, x: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(x.rows(), x.cols());
        for (a, w) in self.basis.iter().zip(&self.weighted) {
            let c: Complex64 = w.entries().iter().zip(x.entries()).map(|(p, q)| p.conj() * q).sum();
            out = out.add(&a.scale(&c));
        }
        out
    }

    pub(crate) fn basis(&self) -> &[CMatrix] {
        &self.basis
    }
}

use crate::field::Field;
use crate::inclusions::{Inclusion, StarAlgebra};
use crate::linalg::{Matrix, SpanBuilder};

use super::MetricsError;

/// Projections `q ∈ N`, `q₀ ∈ N₀`, `q' ∈ N'∩M`, `q₀' ∈ N₀'∩M` and a partial isometry `v ∈ M`.
#[derive(Clone, Debug)]
pub struct PerturbationWitness<F: Field> {
    pub q: Matrix<F>,
    pub q0: Matrix<F>,
    pub q_prime: Matrix<F>,
    pub q0_prime: Matrix<F>,
    pub v: Matrix<F>,
}

impl<F: Field> PerturbationWitness<F> {
    /// `q = q₀ = q' = q₀' = 1`.
    pub fn full(size: usize, v: Matrix<F>) -> Self {
        let one = Matrix::identity(size);
        PerturbationWitness { q: one.clone(), q0: one.clone(), q_prime: one.clone(), q0_prime: one, v }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Clause {
    RangeProjection,
    SourceProjection,
    CornerConjugation,
    TwoNormBound,
    TraceEquality,
    TraceBound,
}

impl Clause {
    pub fn name(&self) -> &'static str {
        match self {
            Clause::RangeProjection => "vv* = p",
            Clause::SourceProjection => "v*v = p0",
            Clause::CornerConjugation => "v p0 N0 p0 v* = p N p",
            Clause::TwoNormBound => "||1 - v||_2 <= 13 delta",
            Clause::TraceEquality => "tau(p) = tau(p0)",
            Clause::TraceBound => "tau(p) >= 1 - 67 delta^2",
        }
    }
}

#[derive(Clone, Debug)]
pub struct PerturbationReport {
    pub clauses: Vec<(Clause, bool)>,
    pub one_minus_v: f64,
    pub tau_p: f64,
    pub tau_p0: f64,
    pub delta: f64,
}

impl PerturbationReport {
    pub fn passed(&self) -> bool {
        self.clauses.iter().all(|(_, ok)| *ok)
    }

    pub fn violated(&self) -> Vec<Clause> {
        self.clauses.iter().filter(|(_, ok)| !ok).map(|(c, _)| *c).collect()
    }
}

fn is_projection<F: Field>(p: &Matrix<F>) -> bool {
    p.adjoint().approx_eq(p) && p.mul(p).approx_eq(p)
}

fn span_contains<F: Field>(spanning: &[Matrix<F>], targets: &[Matrix<F>]) -> bool {
    let Some(first) = spanning.first() else {
        return targets.iter().all(|t| t.is_zero());
    };
    let mut span = SpanBuilder::new(first.entries().len());
    for s in spanning {
        span.insert(s.entries());
    }
    targets.iter().all(|t| span.contains(t.entries()))
}

fn commutes_with<F: Field>(x: &Matrix<F>, alg: &StarAlgebra<F>) -> bool {
    alg.generating_set().iter().all(|a| a.commutator(x).is_zero())
}

/// Checks a supplied witness for the pair `N, N₀ ⊆ M`; never constructs one.
pub fn perturbation_witness_check<F: Field>(
    inc: &Inclusion<F>,
    n0: &StarAlgebra<F>,
    w: &PerturbationWitness<F>,
    delta: f64,
) -> Result<PerturbationReport, MetricsError> {
    let (m, n) = (inc.m(), inc.n());
    let size = inc.size();
    let shape = |what: &str| Err(MetricsError::InvalidWitness(what.into()));
    if n0.size() != size || !m.contains_algebra(n0) {
        return shape("N0 is not a subalgebra of M");
    }
    for x in [&w.q, &w.q0, &w.q_prime, &w.q0_prime, &w.v] {
        if x.rows() != size || x.cols() != size {
            return shape("witness matrix has the wrong size");
        }
    }
    if !(n.contains(&w.q) && is_projection(&w.q)) {
        return shape("q is not a projection in N");
    }
    if !(n0.contains(&w.q0) && is_projection(&w.q0)) {
        return shape("q0 is not a projection in N0");
    }
    if !(m.contains(&w.q_prime) && is_projection(&w.q_prime) && commutes_with(&w.q_prime, n)) {
        return shape("q' is not a projection in N'∩M");
    }
    if !(m.contains(&w.q0_prime) && is_projection(&w.q0_prime) && commutes_with(&w.q0_prime, n0)) {
        return shape("q0' is not a projection in N0'∩M");
    }
    if !m.contains(&w.v) {
        return shape("v is not in M");
    }

    let p = w.q.mul(&w.q_prime);
    let p0 = w.q0.mul(&w.q0_prime);
    let vs = w.v.adjoint();
    let range = w.v.mul(&vs).approx_eq(&p);
    let source = vs.mul(&w.v).approx_eq(&p0);
    let image: Vec<Matrix<F>> = n0.basis().iter().map(|x| w.v.mul(&p0).mul(x).mul(&p0).mul(&vs)).collect();
    let corner: Vec<Matrix<F>> = n.basis().iter().map(|x| p.mul(x).mul(&p)).collect();
    let conjugation = span_contains(&corner, &image) && span_contains(&image, &corner);

    let one_minus_v = inc.norm2_sq(&Matrix::identity(size).sub(&w.v)).re().max(0.0).sqrt();
    let tau_p = inc.tau(&p);
    let tau_p0 = inc.tau(&p0);
    let (tp, tp0) = (tau_p.re(), tau_p0.re());
    let clauses = vec![
        (Clause::RangeProjection, range),
        (Clause::SourceProjection, source),
        (Clause::CornerConjugation, conjugation),
        (Clause::TwoNormBound, one_minus_v <= 13.0 * delta + 1e-12),
        (Clause::TraceEquality, tau_p.approx_eq(&tau_p0)),
        (Clause::TraceBound, tp >= 1.0 - 67.0 * delta * delta - 1e-12),
    ];
    Ok(PerturbationReport { clauses, one_minus_v, tau_p: tp, tau_p0: tp0, delta })
}

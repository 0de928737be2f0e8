use num_complex::Complex64;
use rayon::prelude::*;

use crate::field::Field;
use crate::inclusions::{BasicConstruction, Inclusion};
use crate::linalg::Matrix;
use crate::spectral::{unitary_exp, CMatrix};

use super::{
    beta_quadratic, corollary32_check, minimal_element, norm_inf2, random_unitary_in, restart_rng, ss_constant,
    BetaRoots, Budget, Corollary32, MetricsError, MinimalElement, NormEstimate, Projector,
};

/// Everything measured for one unitary.
#[derive(Clone, Debug)]
pub struct SingularityReport<F: Field> {
    pub u: Matrix<F>,
    pub k: F,
    pub norm: NormEstimate,
    pub minimal: MinimalElement<F>,
    pub beta: Option<BetaRoots<F>>,
    /// `(α, β) = (1 − k, k/λ)`.
    pub alpha_coeffs: (F, F),
    /// `norm_lower/√k`, absent for `k = 0`.
    pub ratio: Option<f64>,
    pub corollary: Corollary32<F>,
    pub flags: Vec<(&'static str, bool)>,
}

impl<F: Field> SingularityReport<F> {
    pub fn all_pass(&self) -> bool {
        self.flags.iter().all(|(_, ok)| *ok)
    }
}

pub fn singularity_report<F: Field>(
    inc: &Inclusion<F>,
    bc: &BasicConstruction<F>,
    float: &Inclusion<Complex64>,
    u: &Matrix<F>,
    budget: &Budget,
    seed: u64,
) -> Result<SingularityReport<F>, MetricsError> {
    let minimal = minimal_element(inc, bc, u)?;
    let norm = norm_inf2(float, &u.to_complex(), budget, seed)?;
    let k = minimal.k.clone();
    let beta = beta_quadratic(&minimal.lambda, &k).ok();
    let ratio = (k.re() > 1e-12).then(|| norm.lower / k.re().sqrt());
    let corollary = corollary32_check(bc.index(), &k)?;
    let tol = if F::EXACT { 0.0 } else { 1e-10 };
    let flags = vec![
        ("h in relative commutant", minimal.in_commutant),
        ("Tr(h) = 1", minimal.trace_residual() <= tol),
        ("Tr(e_N h) = Tr(h^2)", minimal.exchange_residual() <= tol),
        ("span coefficients (1-k, k/lambda)", minimal.coefficient_residual() <= tol),
        ("1 - Tr(e_N h) <= k(2-(1+1/lambda)k)", minimal.chain_bounded()),
        ("1 - Tr(e_N h) <= estimate^2", minimal.below_norm(norm.estimate)),
        ("beta roots back-substitute", beta.is_some()),
        ("2-(1+1/lambda)k >= 1 when k <= (I-1)/I", corollary.holds),
        ("norm_lower <= norm_estimate <= 2", norm.lower <= norm.estimate + 1e-15 && norm.estimate <= 2.0),
    ];
    Ok(SingularityReport {
        u: u.clone(),
        alpha_coeffs: minimal.expected_coefficients.clone(),
        k,
        norm,
        minimal,
        beta,
        ratio,
        corollary,
        flags,
    })
}

#[derive(Clone, Debug)]
pub struct NormalizerFinding {
    pub label: String,
    pub outside_n: bool,
    pub residual: f64,
}

#[derive(Clone, Debug)]
pub struct RatioSample {
    pub label: String,
    pub k: f64,
    /// `E_N(u) = 0`.
    pub e_n_zero: bool,
    pub norm_lower: f64,
    pub norm_estimate: f64,
    pub ratio: f64,
    pub complete: bool,
}

#[derive(Clone, Debug)]
pub struct ScanReport {
    pub normalizers: Vec<NormalizerFinding>,
    pub normalizers_outside_n: usize,
    pub non_normalizing: Vec<RatioSample>,
    /// Smallest ratio over the non-normalizing samples.
    pub empirical_alpha: Option<f64>,
    /// `√((I − 2)/(I − 1))` when `I > 2`.
    pub ss_constant: Option<f64>,
    pub complete: bool,
}

impl ScanReport {
    pub fn none_found(&self) -> bool {
        self.normalizers_outside_n == 0
    }
}

/// `Σₐ ‖u*au − E_N(u*au)‖₂²` over a `τ`-orthonormal basis `a` of `N`, and its
/// Riemannian gradient along `u ↦ u e^{itH}`.
struct Normalizing<'a> {
    inc: &'a Inclusion<Complex64>,
    pn: Projector,
}

impl Normalizing<'_> {
    fn value(&self, u: &CMatrix) -> f64 {
        let us = u.adjoint();
        self.pn
            .basis()
            .iter()
            .map(|a| {
                let y = us.mul(a).mul(u);
                self.inc.norm2_sq(&y.sub(&self.pn.apply(&y))).re
            })
            .sum()
    }

    fn gradient(&self, u: &CMatrix) -> CMatrix {
        let us = u.adjoint();
        let mi = Complex64::new(0.0, -1.0);
        let mut k = CMatrix::zeros(u.rows(), u.cols());
        for a in self.pn.basis() {
            let y = us.mul(a).mul(u);
            let z = y.sub(&self.pn.apply(&y));
            k = k.add(&y.adjoint().commutator(&z).scale(&mi));
        }
        k.add(&k.adjoint()).scale(&Complex64::new(0.5, 0.0))
    }

    fn descend(&self, mut u: CMatrix, iterations: usize) -> (CMatrix, f64) {
        let mut f = self.value(&u);
        let mut eta = 1.0;
        for _ in 0..iterations {
            if f < 1e-20 || eta < 1e-12 {
                break;
            }
            let g = self.gradient(&u);
            let v = u.mul(&unitary_exp(&g, -eta));
            let fv = self.value(&v);
            if fv < f {
                u = v;
                f = fv;
                eta = (eta * 2.0).min(16.0);
            } else {
                eta /= 2.0;
            }
        }
        (u, f)
    }
}

fn sample<F: Field>(
    float: &Inclusion<Complex64>,
    label: String,
    u: &CMatrix,
    budget: &Budget,
    seed: u64,
) -> Result<RatioSample, MetricsError> {
    let e = float.cond_expect(u)?;
    let k = float.norm2_sq(&u.sub(&e)).re.max(0.0);
    let norm = norm_inf2(float, u, budget, seed)?;
    Ok(RatioSample {
        label,
        k,
        e_n_zero: e.is_zero(),
        norm_lower: norm.lower,
        norm_estimate: norm.estimate,
        ratio: if k > 1e-12 { norm.lower / k.sqrt() } else { f64::INFINITY },
        complete: norm.complete,
    })
}

/// Budget-bounded search for normalizing unitaries outside `N`, with empirical
/// ratios for unitaries that fail to normalize.
pub fn singularity_scan<F: Field>(inc: &Inclusion<F>, budget: &Budget, seed: u64) -> Result<ScanReport, MetricsError> {
    let float = inc.to_float();
    let objective = Normalizing { inc: &float, pn: Projector::new(&float, float.n().basis()) };
    let in_n = |u: &CMatrix| -> Result<bool, MetricsError> {
        let e = float.cond_expect(u)?;
        Ok(float.norm2_sq(&u.sub(&e)).re < 1e-12)
    };
    let mut normalizers = Vec::new();
    let mut non_normalizing = Vec::new();

    if let Some(g) = inc.group() {
        for (i, x) in g.group.elements().iter().enumerate() {
            let u: Matrix<F> = g.group.regular(x);
            let us = u.adjoint();
            let normalizes = inc.n().basis().iter().all(|a| inc.n().contains(&u.mul(a).mul(&us)));
            let label = format!("{x}");
            if normalizes {
                normalizers.push(NormalizerFinding { outside_n: !inc.n().contains(&u), label, residual: 0.0 });
            } else {
                non_normalizing.push(sample::<F>(&float, label, &u.to_complex(), budget, seed.wrapping_add(i as u64))?);
            }
        }
    }

    let found: Vec<Option<NormalizerFinding>> = (0..budget.restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = restart_rng(seed, 1_000 + r as u64);
            let start = random_unitary_in(float.m(), &mut rng);
            let (u, f) = objective.descend(start, budget.iterations);
            (f < 1e-16).then(|| NormalizerFinding {
                label: format!("restart {r}"),
                outside_n: !in_n(&u).unwrap_or(true),
                residual: f,
            })
        })
        .collect();
    normalizers.extend(found.into_iter().flatten());

    let mut rng = restart_rng(seed, 2_000);
    for s in 0..budget.samples {
        let u = random_unitary_in(float.m(), &mut rng);
        if objective.value(&u) > 1e-12 {
            non_normalizing.push(sample::<F>(&float, format!("random {s}"), &u, budget, seed.wrapping_add(10_000 + s as u64))?);
        }
    }

    let empirical_alpha = non_normalizing.iter().map(|s| s.ratio).filter(|r| r.is_finite()).reduce(f64::min);
    let markov = inc.markov_data()?;
    let ss = match &markov.index_exact {
        Some(i) => ss_constant(i, 128).ok().map(|s| s.value),
        None if markov.index > 2.0 => Some(((markov.index - 2.0) / (markov.index - 1.0)).sqrt()),
        None => None,
    };
    Ok(ScanReport {
        normalizers_outside_n: normalizers.iter().filter(|n| n.outside_n).count(),
        normalizers,
        complete: non_normalizing.iter().all(|s| s.complete),
        non_normalizing,
        empirical_alpha,
        ss_constant: ss,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inclusions::{basic_construction, build_group_inclusion, PermGroup};
    use crate::scalars::QuadraticNumber as Q;

    fn small() -> Budget {
        Budget { restarts: 6, iterations: 300, samples: 2 }
    }

    #[test]
    fn gradient_matches_finite_difference() {
        let g = PermGroup::named("S3").unwrap();
        let inc: Inclusion<Complex64> = build_group_inclusion(&g, &[g.parse_element("(12)").unwrap()]).unwrap();
        let obj = Normalizing { inc: &inc, pn: Projector::new(&inc, inc.n().basis()) };
        let mut rng = restart_rng(3, 0);
        let u = random_unitary_in(inc.m(), &mut rng);
        let h = {
            let y = inc.m().random_element(&mut rng);
            y.add(&y.adjoint()).scale(&Complex64::new(0.5, 0.0))
        };
        let eps = 1e-6;
        let fd = (obj.value(&u.mul(&unitary_exp(&h, eps))) - obj.value(&u.mul(&unitary_exp(&h, -eps)))) / (2.0 * eps);
        let an = 2.0 * inc.tau(&h.mul(&obj.gradient(&u))).re;
        assert!((fd - an).abs() < 1e-6, "{fd} vs {an}");
    }

    #[test]
    fn normal_subgroup_has_outer_normalizer() {
        let g = PermGroup::named("S3").unwrap();
        let inc: Inclusion<Q> = build_group_inclusion(&g, &[g.parse_element("(123)").unwrap()]).unwrap();
        let r = singularity_scan(&inc, &small(), 1).unwrap();
        assert!(r.normalizers.iter().any(|n| n.label == "(12)" && n.outside_n));
        assert!(!r.none_found());
    }

    #[test]
    fn transposition_conjugates_to_another_subgroup() {
        let g = PermGroup::named("S3").unwrap();
        let inc: Inclusion<Q> = build_group_inclusion(&g, &[g.parse_element("(12)").unwrap()]).unwrap();
        let r = singularity_scan(&inc, &small(), 1).unwrap();
        let s = r.non_normalizing.iter().find(|s| s.label == "(23)").unwrap();
        assert!(s.e_n_zero && (s.k - 1.0).abs() < 1e-12);
        assert!((s.ratio - 1.0).abs() < 1e-6);
        assert!((r.ss_constant.unwrap() - 0.5f64.sqrt()).abs() < 1e-12);
        assert!(r.empirical_alpha.unwrap() <= s.ratio);
    }

    #[test]
    fn report_flags_for_transposition() {
        let g = PermGroup::named("S3").unwrap();
        let inc: Inclusion<Q> = build_group_inclusion(&g, &[g.parse_element("(12)").unwrap()]).unwrap();
        let bc = basic_construction(&inc).unwrap();
        let u = g.regular::<Q>(&g.parse_element("(23)").unwrap());
        let r = singularity_report(&inc, &bc, &inc.to_float(), &u, &small(), 0).unwrap();
        assert!(r.all_pass(), "{:?}", r.flags);
        assert!(!r.corollary.applicable);
        assert_eq!(r.alpha_coeffs, (Q::from_integer(0), Q::from_ratio(1, 2)));
    }
}

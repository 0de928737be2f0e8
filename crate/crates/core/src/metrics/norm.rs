use num_complex::Complex64;
use rayon::prelude::*;

use crate::inclusions::Inclusion;
use crate::spectral::{clip_singular_values, operator_norm, polar_unitary, CMatrix};

use super::{check_unitary, restart_rng, Budget, MetricsError, Projector};

/// Bounds for `‖E_N − E_{uNu*}‖_{∞,2}`.
#[derive(Clone, Debug)]
pub struct NormEstimate {
    /// `‖(E_N − E_{uNu*})(x)‖₂` for the returned witness, `‖x‖ ≤ 1`.
    pub lower: f64,
    /// Best value seen over all restarts.
    pub estimate: f64,
    pub witness: CMatrix,
    pub witness_norm: f64,
    pub restarts: usize,
    pub converged: usize,
    /// At least one restart met the stopping rule within budget.
    pub complete: bool,
}

struct Run {
    value: f64,
    x: CMatrix,
    converged: bool,
}

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

pub fn norm_inf2(
    inc: &Inclusion<Complex64>,
    u: &CMatrix,
    budget: &Budget,
    seed: u64,
) -> Result<NormEstimate, MetricsError> {
    check_unitary(inc, u)?;
    let us = u.adjoint();
    let pn = Projector::new(inc, inc.n().basis());
    let conj: Vec<CMatrix> = inc.n().basis().iter().map(|b| u.mul(b).mul(&us)).collect();
    let pu = Projector::new(inc, &conj);
    let t = |x: &CMatrix| pn.apply(x).sub(&pu.apply(x));
    let f = |x: &CMatrix| inc.norm2_sq(&t(x)).re.max(0.0);

    let restarts = budget.restarts.max(1);
    let runs: Vec<Run> = (0..restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = restart_rng(seed, r as u64);
            let mut x = polar_unitary(&inc.m().random_element(&mut rng));
            let mut fx = f(&x);
            let mut eta = 1.0;
            let mut converged = fx == 0.0;
            for _ in 0..budget.iterations {
                if converged {
                    break;
                }
                let g = t(&t(&x));
                let y = clip_singular_values(&x.add(&g.scale(&c(eta))));
                let fy = f(&y);
                if fy + 1e-15 >= fx {
                    let gain = fy - fx;
                    x = y;
                    fx = fx.max(fy);
                    eta = (eta * 2.0).min(64.0);
                    if gain < 1e-13 {
                        converged = true;
                    }
                } else {
                    eta /= 2.0;
                    if eta < 1e-9 {
                        converged = true;
                    }
                }
            }
            Run { value: fx.sqrt(), x, converged }
        })
        .collect();

    let mut best = 0;
    for (i, r) in runs.iter().enumerate() {
        if r.value > runs[best].value {
            best = i;
        }
    }
    let converged = runs.iter().filter(|r| r.converged).count();
    let x = &runs[best].x;
    let nrm = operator_norm(x);
    let witness = if nrm > 1.0 { x.scale(&c(1.0 / nrm)) } else { x.clone() };
    let lower = f(&witness).sqrt();
    Ok(NormEstimate {
        lower,
        estimate: runs[best].value.max(lower),
        witness_norm: operator_norm(&witness),
        witness,
        restarts,
        converged,
        complete: converged > 0,
    })
}

/// Brute-force maximum of `value` over `U(2)` (the extreme points of the unit
/// ball of `M₂`): a `grid³` sweep of `[[a, −b̄], [b, ā]]` followed by pattern search.
pub fn unit_ball_oracle_m2(value: impl Fn(&CMatrix) -> f64, grid: usize) -> (f64, CMatrix) {
    let su2 = |p: &[f64; 3]| {
        let a = Complex64::from_polar(p[0].cos(), p[1]);
        let b = Complex64::from_polar(p[0].sin(), p[2]);
        CMatrix::from_vec(2, 2, vec![a, -b.conj(), b, a.conj()])
    };
    let tau = std::f64::consts::TAU;
    let steps = [std::f64::consts::FRAC_PI_2 / grid as f64, tau / grid as f64, tau / grid as f64];
    let mut seeds: Vec<(f64, [f64; 3])> = Vec::new();
    for i in 0..=grid {
        for j in 0..grid {
            for k in 0..grid {
                let p = [i as f64 * steps[0], j as f64 * steps[1], k as f64 * steps[2]];
                seeds.push((value(&su2(&p)), p));
            }
        }
    }
    seeds.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut best = seeds[0];
    for &(v0, p0) in seeds.iter().take(8) {
        let (mut v, mut p) = (v0, p0);
        let mut h = steps;
        while h[0] > 1e-9 {
            let mut moved = false;
            for d in 0..3 {
                for s in [-1.0, 1.0] {
                    let mut q = p;
                    q[d] += s * h[d];
                    let w = value(&su2(&q));
                    if w > v {
                        v = w;
                        p = q;
                        moved = true;
                    }
                }
            }
            if !moved {
                for x in h.iter_mut() {
                    *x /= 2.0;
                }
            }
        }
        if v > best.0 {
            best = (v, p);
        }
    }
    (best.0, su2(&best.1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inclusions::{build_group_inclusion, build_matrix_inclusion, PermGroup};
    use crate::linalg::Matrix;
    use crate::metrics::random_unitaries;

    fn d2() -> Inclusion<Complex64> {
        build_matrix_inclusion(
            "D2 in M2",
            2,
            vec![Matrix::unit(2, 0, 1), Matrix::unit(2, 1, 0)],
            vec![Matrix::unit(2, 0, 0), Matrix::unit(2, 1, 1)],
            None,
        )
        .unwrap()
    }

    #[test]
    fn unitary_in_n_gives_zero() {
        let g = PermGroup::named("S3").unwrap();
        let inc: Inclusion<Complex64> = build_group_inclusion(&g, &[g.parse_element("(12)").unwrap()]).unwrap();
        for u in random_unitaries(inc.n(), 3, 4) {
            let r = norm_inf2(&inc, &u, &Budget { restarts: 4, ..Budget::default() }, 0).unwrap();
            assert!(r.estimate < 1e-9);
        }
    }

    #[test]
    fn transposition_conjugate_has_norm_one() {
        let g = PermGroup::named("S3").unwrap();
        let inc: Inclusion<Complex64> = build_group_inclusion(&g, &[g.parse_element("(12)").unwrap()]).unwrap();
        let u = g.regular::<Complex64>(&g.parse_element("(23)").unwrap());
        let r = norm_inf2(&inc, &u, &Budget::default(), 7).unwrap();
        assert!((r.estimate - 1.0).abs() < 1e-6, "{}", r.estimate);
        assert!(r.lower <= r.estimate && r.witness_norm <= 1.0 + 1e-12);
    }

    #[test]
    fn rotation_matches_oracle() {
        let inc = d2();
        let (s, co) = (std::f64::consts::FRAC_PI_4.sin(), std::f64::consts::FRAC_PI_4.cos());
        let u = CMatrix::from_vec(2, 2, vec![c(co), c(-s), c(s), c(co)]);
        let r = norm_inf2(&inc, &u, &Budget::default(), 1).unwrap();
        let diag = |x: &CMatrix| CMatrix::from_fn(2, 2, |i, j| if i == j { *x.get(i, i) } else { c(0.0) });
        let us = u.adjoint();
        let value = |x: &CMatrix| {
            let d = diag(x).sub(&u.mul(&diag(&us.mul(x).mul(&u))).mul(&us));
            (d.frobenius().powi(2) / 2.0).sqrt()
        };
        let (oracle, _) = unit_ball_oracle_m2(value, 24);
        assert!((r.estimate - oracle).abs() < 1e-4, "{} vs {oracle}", r.estimate);
        assert!(r.lower <= oracle + 1e-9);
    }

    #[test]
    fn deterministic_for_a_seed() {
        let inc = d2();
        let u = random_unitaries(inc.m(), 1, 3).remove(0);
        let b = Budget { restarts: 8, ..Budget::default() };
        let (x, y) = (norm_inf2(&inc, &u, &b, 11).unwrap(), norm_inf2(&inc, &u, &b, 11).unwrap());
        assert_eq!((x.lower, x.estimate), (y.lower, y.estimate));
    }

    #[test]
    fn rejects_non_unitary() {
        let inc = d2();
        let x = Matrix::unit(2, 0, 0);
        assert!(matches!(norm_inf2(&inc, &x, &Budget::default(), 0), Err(MetricsError::NotUnitary(_))));
    }
}

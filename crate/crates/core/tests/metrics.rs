use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use subfactor_core::field::Field;
use subfactor_core::inclusions::{basic_construction, build_group_inclusion, Inclusion, PermGroup, StarAlgebra};
use subfactor_core::linalg::Matrix;
use subfactor_core::metrics::{
    minimal_element, perturbation_witness_check, random_unitaries, Clause, PerturbationWitness,
};
use subfactor_core::spectral::{unitary_exp, CMatrix};
use subfactor_core::Complex64;

fn s3_float() -> Inclusion<Complex64> {
    let g = PermGroup::named("S3").unwrap();
    build_group_inclusion(&g, &[g.parse_element("(12)").unwrap()]).unwrap()
}

#[test]
fn h_has_least_norm_among_sampled_convex_combinations() {
    let inc = s3_float();
    let bc = basic_construction(&inc).unwrap();
    let u = random_unitaries(inc.m(), 1, 21).remove(0);
    let h = minimal_element(&inc, &bc, &u).unwrap().h;
    let floor = bc.tr_inner(&h, &h).re();
    let us = u.adjoint();
    let conj: Vec<CMatrix> = random_unitaries(inc.n(), 12, 22)
        .iter()
        .map(|n| {
            let w = u.mul(n).mul(&us);
            bc.left(&w).mul(bc.e_n()).mul(&bc.left(&w.adjoint()))
        })
        .collect();
    let spread = conj.iter().map(|c| c.sub(&conj[0]).max_abs()).fold(0.0, f64::max);
    assert!(spread > 1e-3);
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for _ in 0..500 {
        let weights: Vec<f64> = conj.iter().map(|_| rng.gen::<f64>()).collect();
        let total: f64 = weights.iter().sum();
        let mut x = Matrix::zeros(h.rows(), h.cols());
        for (w, c) in weights.iter().zip(&conj) {
            x = x.add(&c.scale(&Complex64::new(w / total, 0.0)));
        }
        assert!(bc.tr_inner(&x, &x).re() >= floor - 1e-10);
    }
}

#[test]
fn conjugated_subalgebra_passes_with_the_inverse_unitary() {
    let inc = s3_float();
    let x = inc.m().random_element(&mut ChaCha8Rng::seed_from_u64(4));
    let hermitian = x.add(&x.adjoint());
    let u = unitary_exp(&hermitian, 0.01);
    let us = u.adjoint();
    let gens: Vec<CMatrix> = inc.n().generating_set().iter().map(|n| u.mul(n).mul(&us)).collect();
    let n0 = StarAlgebra::generated(inc.size(), gens).unwrap();
    let delta = inc.norm2_sq(&Matrix::identity(inc.size()).sub(&u)).re().sqrt();
    let w = PerturbationWitness::full(inc.size(), us.clone());
    let r = perturbation_witness_check(&inc, &n0, &w, delta).unwrap();
    assert!(r.passed(), "{:?}", r.violated());
    assert!(r.one_minus_v <= 13.0 * delta);

    let w = PerturbationWitness::full(inc.size(), u);
    let r = perturbation_witness_check(&inc, &n0, &w, delta).unwrap();
    assert_eq!(r.violated(), vec![Clause::CornerConjugation]);
}

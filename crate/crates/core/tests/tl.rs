use proptest::prelude::*;
use subfactor_core::scalars::{quantum_integer, DeltaRational};
use subfactor_core::tl::{jones_wenzl, PlanarDiagram, TLElement};

fn e(n: usize, i: usize) -> TLElement {
    TLElement::generator(n, i).unwrap()
}

fn catalan(n: u64) -> u64 {
    (0..n).fold(1, |c, k| c * 2 * (2 * k + 1) / (k + 2))
}

#[test]
fn generator_relations_up_to_eight_strands() {
    let delta = DeltaRational::delta();
    for n in 2..=8 {
        for i in 1..n {
            let ei = e(n, i);
            assert_eq!(ei.compose(&ei).unwrap(), ei.scale(&delta), "E{i}^2, n={n}");
            for j in 1..n {
                let ej = e(n, j);
                if i.abs_diff(j) == 1 {
                    assert_eq!(ei.compose(&ej).unwrap().compose(&ei).unwrap(), ei, "E{i}E{j}E{i}, n={n}");
                } else if i.abs_diff(j) >= 2 {
                    assert_eq!(ei.compose(&ej).unwrap(), ej.compose(&ei).unwrap(), "E{i}E{j}, n={n}");
                }
            }
        }
    }
}

#[test]
fn jones_wenzl_up_to_six() {
    for n in 1..=6 {
        let p = jones_wenzl(n).unwrap();
        assert_eq!(p.compose(&p).unwrap(), p, "idempotence n={n}");
        assert_eq!(p.star(), p, "self-adjoint n={n}");
        for i in 1..n {
            assert!(e(n, i).compose(&p).unwrap().is_zero(), "E{i} p{n}");
            assert!(p.compose(&e(n, i)).unwrap().is_zero(), "p{n} E{i}");
        }
        assert_eq!(p.markov_trace(), DeltaRational::from_poly(quantum_integer(n + 1)), "tr p{n}");
    }
}

#[test]
fn catalan_dimensions() {
    for n in 0..=8usize {
        assert_eq!(PlanarDiagram::enumerate(n).len() as u64, catalan(n as u64), "n={n}");
    }
}

fn word(n: usize, letters: &[usize]) -> TLElement {
    letters.iter().fold(TLElement::identity(n), |acc, &i| acc.compose(&e(n, 1 + i % (n - 1))).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn trace_is_tracial(n in 2usize..6, a in prop::collection::vec(0usize..8, 0..6), b in prop::collection::vec(0usize..8, 0..6)) {
        let x = word(n, &a);
        let y = word(n, &b);
        prop_assert_eq!(x.compose(&y).unwrap().markov_trace(), y.compose(&x).unwrap().markov_trace());
    }

    #[test]
    fn star_reverses_products(n in 2usize..6, a in prop::collection::vec(0usize..8, 0..6), b in prop::collection::vec(0usize..8, 0..6)) {
        let x = word(n, &a);
        let y = word(n, &b);
        prop_assert_eq!(x.compose(&y).unwrap().star(), y.star().compose(&x.star()).unwrap());
    }
}

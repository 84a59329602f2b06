use clifford_dirac::clifford_fiber::{Chevalley, EndoForm, Multivector, Signature};
use clifford_dirac::linalg::{anticomm, comm, eye, max_abs, re, Mat, C64};
use proptest::prelude::*;

fn sig_strategy() -> impl Strategy<Value = Signature> {
    (0usize..=4, prop::bool::ANY).prop_map(|(p, plus)| Signature::new(p, 4 - p, if plus { 1 } else { -1 }).unwrap())
}

fn covector(n: usize) -> impl Strategy<Value = Vec<C64>> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0).prop_map(|(a, b)| C64::new(a, b)), n)
}

fn matrix(dim: usize) -> impl Strategy<Value = Mat> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), dim * dim)
        .prop_map(move |v| Mat::from_fn(dim, dim, |i, j| C64::new(v[i * dim + j].0, v[i * dim + j].1)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn clifford_relation_for_left_and_opposite_actions(sig in sig_strategy(), a in covector(4), b in covector(4)) {
        let ch = Chevalley::new(sig);
        let id = eye(16);
        let g_ab = sig.pairing(&a, &b) * (2.0 * sig.eps());
        let (ga, gb) = (ch.left.gamma(&a).unwrap(), ch.left.gamma(&b).unwrap());
        prop_assert!(max_abs(&(anticomm(&ga, &gb) - &id * g_ab)) < 1e-12);
        let (oa, ob) = (ch.opposite_action(&a).unwrap(), ch.opposite_action(&b).unwrap());
        prop_assert!(max_abs(&(anticomm(&oa, &ob) - &id * g_ab)) < 1e-12);
        prop_assert!(max_abs(&comm(&ga, &ob)) < 1e-12);
    }

    #[test]
    fn symbol_map_inverts_quantize(sig in sig_strategy(), c in covector(16)) {
        let ch = Chevalley::new(sig);
        let omega = Multivector { coeffs: clifford_dirac::linalg::Vector::from_vec(c) };
        let q = ch.quantize(&omega).unwrap();
        prop_assert!(ch.symbol_map(&q).unwrap().max_abs_diff(&omega) < 1e-12);
    }

    #[test]
    fn chirality_is_an_odd_involution(sig in sig_strategy(), a in covector(4)) {
        let ch = Chevalley::new(sig);
        let tau = ch.chirality();
        prop_assert!(max_abs(&(&tau * &tau - eye(16))) < 1e-12);
        prop_assert!(max_abs(&anticomm(&tau, &ch.left.gamma(&a).unwrap())) < 1e-12);
    }

    #[test]
    fn quantization_inverts_theta_extension(sig in sig_strategy(), phi in matrix(16)) {
        let ch = Chevalley::new(sig);
        prop_assert!(max_abs(&(ch.left.quantize_form(&ch.left.ext_theta(&phi)) - &phi)) < 1e-12);
        prop_assert!(max_abs(&(ch.right.quantize_form(&ch.right.ext_theta(&phi)) - &phi)) < 1e-12);
    }

    #[test]
    fn averaging_projects_onto_commutant(sig in sig_strategy(), x in matrix(16)) {
        let ch = Chevalley::new(sig);
        let even = ch.left.average_conjugation(&x, false);
        let odd = ch.left.average_conjugation(&x, true);
        for g in &ch.left.gens {
            prop_assert!(max_abs(&comm(g, &even)) < 1e-12);
            prop_assert!(max_abs(&anticomm(g, &odd)) < 1e-12);
        }
        prop_assert!(max_abs(&(ch.left.average_conjugation(&even, false) - &even)) < 1e-12);
    }
}

#[test]
fn opposite_action_on_vacuum() {
    let sig = Signature::new(2, 0, 1).unwrap();
    let ch = Chevalley::new(sig);
    let one = Multivector::scalar(&ch.basis, re(1.0));
    let e1 = ch.opposite_action(&[re(1.0), re(0.0)]).unwrap();
    let out = Multivector { coeffs: &e1 * &one.coeffs };
    assert!(out.max_abs_diff(&Multivector::blade(&ch.basis, 1, re(1.0))) < 1e-15);
    let a = ch.opposite_action(&[re(1.0), re(1.0)]).unwrap();
    assert!(max_abs(&(&a * &a - eye(4) * re(2.0))) < 1e-15);
}

#[test]
fn chirality_eigenspaces_split_evenly_in_four_dimensions() {
    let ch = Chevalley::new(Signature::new(3, 1, 1).unwrap());
    let tau = ch.chirality();
    let plus = (&tau + eye(16)) * re(0.5);
    assert_eq!(clifford_dirac::linalg::projector_rank(&plus), 8);
}

#[test]
fn quantized_trace_of_identity_counts_the_fiber() {
    let ch = Chevalley::new(Signature::new(3, 1, -1).unwrap());
    let form = EndoForm::monomial(4, 0, eye(16));
    assert!((ch.left.quantized_trace(&form) - re(16.0)).norm() < 1e-12);
}

#[test]
fn nonscalar_blades_are_traceless_on_the_exterior_algebra() {
    for (p, q) in [(4, 0), (3, 1), (2, 2), (1, 1)] {
        let ch = Chevalley::new(Signature::new(p, q, 1).unwrap());
        for &b in ch.basis.blades().iter().filter(|&&b| b != 0) {
            assert!(ch.left.quantize_blade(b).trace().norm() < 1e-12, "blade {b:#b} at ({p},{q})");
            assert!(ch.right.quantize_blade(b).trace().norm() < 1e-12, "opposite blade {b:#b} at ({p},{q})");
        }
    }
}

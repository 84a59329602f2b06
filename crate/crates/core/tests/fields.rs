use std::f64::consts::PI;

use clifford_dirac::error::Error;
use clifford_dirac::fourier_fields::{wedge, FormField, ScalarField};
use clifford_dirac::linalg::{re, C64};
use clifford_dirac::random::{endo_field, rng_for, scalar_field};
use proptest::prelude::*;

const CAP: i32 = 6;

fn scalars(seed: u64, n: usize, count: usize) -> Vec<ScalarField> {
    let mut rng = rng_for(seed, "fields");
    (0..count).map(|_| scalar_field(&mut rng, n, 1, 4, CAP)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn products_are_associative_and_commutative(seed in any::<u64>(), n in 2usize..=4) {
        let f = scalars(seed, n, 3);
        let (a, b, c) = (&f[0], &f[1], &f[2]);
        let left = a.mul(b).unwrap().mul(c).unwrap();
        let right = a.mul(&b.mul(c).unwrap()).unwrap();
        prop_assert!(left.sub(&right).max_abs() < 1e-12);
        prop_assert!(a.mul(b).unwrap().sub(&b.mul(a).unwrap()).max_abs() < 1e-12);
    }

    #[test]
    fn derivatives_obey_leibniz_and_integrate_to_zero(seed in any::<u64>(), n in 2usize..=4) {
        let f = scalars(seed, n, 2);
        for j in 0..n {
            let lhs = f[0].mul(&f[1]).unwrap().derive(j);
            let rhs = f[0].derive(j).mul(&f[1]).unwrap().add(&f[0].mul(&f[1].derive(j)).unwrap());
            prop_assert!(lhs.sub(&rhs).max_abs() < 1e-12);
            prop_assert!(lhs.integrate().norm() < 1e-12);
        }
    }

    #[test]
    fn pointwise_evaluation_respects_products(seed in any::<u64>(), x in prop::collection::vec(0.0f64..2.0 * PI, 3)) {
        let f = scalars(seed, 3, 2);
        let prod = f[0].mul(&f[1]).unwrap().eval(&x).unwrap();
        let expect = f[0].eval(&x).unwrap() * f[1].eval(&x).unwrap();
        prop_assert!((prod - expect).norm() < 1e-12);
        let conj = f[0].conj().eval(&x).unwrap();
        prop_assert!((conj - f[0].eval(&x).unwrap().conj()).norm() < 1e-12);
    }

    #[test]
    fn matrix_traces_are_cyclic(seed in any::<u64>()) {
        let mut rng = rng_for(seed, "cyclic");
        let a = endo_field(&mut rng, 2, 3, 1, 3, CAP, 1.0);
        let b = endo_field(&mut rng, 2, 3, 1, 3, CAP, 1.0);
        let ab = a.mul(&b).unwrap().integral_trace();
        prop_assert!((ab - b.mul(&a).unwrap().integral_trace()).norm() < 1e-10);
        prop_assert!((ab - a.integral_trace_product(&b)).norm() < 1e-10);
    }

    #[test]
    fn exterior_derivative_squares_to_zero_and_obeys_leibniz(seed in any::<u64>()) {
        let mut rng = rng_for(seed, "forms");
        let one = |rng: &mut _| FormField::one_form((0..3).map(|_| endo_field(rng, 3, 2, 1, 2, CAP, 1.0)).collect());
        let (a, b) = (one(&mut rng), one(&mut rng));
        prop_assert!(a.d().d().max_abs() < 1e-12);
        // d(a ∧ b) = da ∧ b - a ∧ db for one-forms.
        let lhs = wedge(&a, &b).unwrap().d();
        let rhs = wedge(&a.d(), &b).unwrap().sub(&wedge(&a, &b.d()).unwrap());
        prop_assert!(lhs.sub(&rhs).max_abs() < 1e-10);
    }
}

#[test]
fn constant_one_integrates_to_torus_volume() {
    for n in 1..=4 {
        let one = ScalarField::constant(n, CAP, re(1.0));
        assert!((one.integrate() - re((2.0 * PI).powi(n as i32))).norm() < 1e-12);
    }
}

#[test]
fn plane_waves_are_orthogonal() {
    let a = ScalarField::plane_wave(2, CAP, vec![1, -2], re(1.0)).unwrap();
    let b = ScalarField::plane_wave(2, CAP, vec![1, 0], re(1.0)).unwrap();
    assert_eq!(a.conj().mul(&b).unwrap().integrate(), C64::new(0.0, 0.0));
    let norm = a.conj().mul(&a).unwrap().integrate();
    assert!((norm - re(4.0 * PI * PI)).norm() < 1e-12);
}

#[test]
fn derivative_multiplies_by_i_k() {
    let f = ScalarField::plane_wave(2, CAP, vec![3, -1], re(2.0)).unwrap();
    assert_eq!(f.derive(0).get(&[3, -1]), Some(&C64::new(0.0, 6.0)));
    assert_eq!(f.derive(1).get(&[3, -1]), Some(&C64::new(0.0, -2.0)));
}

#[test]
fn products_leaving_the_band_fail() {
    let f = ScalarField::plane_wave(2, 4, vec![3, 0], re(1.0)).unwrap();
    assert_eq!(f.mul(&f), Err(Error::CapacityExceeded { capacity: 4, needed: 6 }));
    assert!(ScalarField::plane_wave(2, 4, vec![0, 5], re(1.0)).is_err());
    assert!(f.clone().with_capacity(2).is_err());
}

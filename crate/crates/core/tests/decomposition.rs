use clifford_dirac::clifford_fiber::Signature;
use clifford_dirac::dirac_ops::*;
use clifford_dirac::random::{real_scalar_field, rng_for};
use clifford_dirac::scenarios::{self, FieldShape};

#[test]
fn squared_operator_splits_into_laplacian_and_potential() {
    for (p, q, e) in [(3, 1, 1), (4, 0, -1), (1, 1, 1)] {
        let sig = Signature::new(p, q, e).unwrap();
        let m = scenarios::twisted(sig, 1).unwrap();
        let mut rng = rng_for(7, "lich");
        let sh = FieldShape::default();
        for _ in 0..3 {
            let d = scenarios::generic_operator(&mut rng, &m, sh).unwrap();
            let psi = scenarios::section(&mut rng, sig.n(), m.dim(), sh);
            let r = lichnerowicz_residual(&d, &psi).unwrap();
            assert!(r < 1e-9, "({p},{q},{e}) residual {r}");
            let f = real_scalar_field(&mut rng, sig.n(), 1, 2, 6);
            let b = bochner_defining_residual(&d, &f, &psi).unwrap();
            assert!(b < 1e-9 * psi.l2_norm(), "bochner defining {b}");
            let (l, rr) = potential_trace_identity(&d).unwrap();
            assert!(l.sub(&rr).max_abs() < 1e-9, "trace identity {}", l.sub(&rr).max_abs());
        }
    }
}

#[test]
fn generalized_decomposition_routes_agree() {
    let sig = Signature::new(3, 1, 1).unwrap();
    let m = scenarios::twisted(sig, 1).unwrap();
    let mut rng = rng_for(7, "general");
    let sh = FieldShape { capacity: 8, ..FieldShape::default() };
    for _ in 0..3 {
        let d1 = scenarios::generic_operator(&mut rng, &m, sh).unwrap();
        let d2 = scenarios::generic_operator(&mut rng, &m, sh).unwrap();
        let p1 = scenarios::endo(&mut rng, 4, m.dim(), sh);
        let p2 = scenarios::endo(&mut rng, 4, m.dim(), sh);
        let data = lichnerowicz_general(&d1, &p1, &d2, &p2).unwrap();
        let diff = data.v_h.sub(&data.v_h_direct).max_abs();
        let psi = scenarios::section(&mut rng, 4, m.dim(), sh);
        let r = lichnerowicz_general_residual(&d1, &p1, &d2, &p2, &data, &psi).unwrap();
        println!("routes {diff:e} residual {r:e}");
        assert!(diff < 1e-9);
        assert!(r < 1e-9);
    }
}

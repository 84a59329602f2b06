use clifford_dirac::clifford_fiber::Signature;
use clifford_dirac::dirac_ops::{dym_op, DymOperator, DymSetup};
use clifford_dirac::fourier_fields::FormField;
use clifford_dirac::graded_modules::MassBlockSpec;
use clifford_dirac::lagrangians::*;
use clifford_dirac::linalg::{eye, re, Mat, I};
use clifford_dirac::random::{rng_for, CheckRng};
use clifford_dirac::scenarios::{self, FieldShape};
use num_rational::Rational64;
use proptest::prelude::*;

fn r(n: i64, d: i64) -> Rational64 {
    Rational64::new(n, d)
}

fn coeffs(c: &Coefficients) -> [Rational64; 4] {
    [c.yang_mills, c.higgs_kinetic, c.quartic, c.quadratic]
}

#[test]
fn pauli_coefficients_are_exact() {
    for e in [1, -1] {
        assert_eq!(coeffs(&stm_coefficients(2, e)), [r(-1, 1), r(0, 1), r(-1, 2), r(-2, 1)]);
        assert_eq!(coeffs(&stm_coefficients(4, e)), [r(1, 1), r(-9 * e, 4), r(-27, 8), r(-2, 1)]);
        assert_eq!(coeffs(&stm_coefficients(6, e)), [r(3, 1), r(-50 * e, 9), r(-125, 18), r(-2, 1)]);
    }
}

#[test]
fn pi_coefficients_are_exact() {
    for e in [1, -1] {
        assert_eq!(coeffs(&pi_coefficients(2, e)), [r(-1, 1), r(e, 2), r(1, 2), r(-2, 1)]);
        assert_eq!(coeffs(&pi_coefficients(4, e)), [r(-1, 1), r(9 * e, 8), r(9, 8), r(-2, 1)]);
        assert_eq!(coeffs(&pi_coefficients(6, e)), [r(-1, 1), r(25 * e, 18), r(25, 18), r(-2, 1)]);
    }
    assert_eq!(lambda_a(4), r(27, 8));
}

fn m1(x: f64) -> Mat {
    Mat::from_element(1, 1, re(x))
}

fn mat2(a: f64, b: f64, c: f64, d: f64) -> Mat {
    clifford_dirac::linalg::mat2(a, b, c, d)
}

#[test]
fn lambda_formula_on_frozen_examples() {
    let z = Mat::zeros(2, 2);
    assert_eq!(lambda_dm_formula(&z, &z, 4), 0.0);
    assert!((lambda_dm_formula(&eye(2), &z, 4) - 2.0 * (27.0 / 8.0 - 1.0)).abs() < 1e-14);
    assert!((lambda_dm_formula(&m1(1.0), &m1(1.0), 4) + 2.0).abs() < 1e-14);
    assert!((lambda_dm_block_closed_form(&m1(1.0), &m1(1.0), 4) - 25.0).abs() < 1e-14);
    let (md, mm) = (mat2(0.3, 0.2, 0.2, -0.5), mat2(0.6, 0.1, 0.1, 0.4));
    assert!((lambda_dm_formula(&md, &mm, 4) + 0.5739).abs() < 1e-12);
    assert!((lambda_dm_block_closed_form(&md, &mm, 4) - 1.8183).abs() < 1e-12);
}

#[test]
fn lambda_block_route_matches_its_closed_form() {
    let setup = DymSetup::new(Signature::new(3, 1, 1).unwrap(), &[1.0, 1.0], &[]).unwrap();
    let (md, mm) = (mat2(0.3, 0.2, 0.2, -0.5), mat2(0.6, 0.1, 0.1, 0.4));
    let c = lambda_dm(&setup, &md, &mm).unwrap();
    assert!((c.block_trace - 1.8183).abs() < 1e-12, "{}", c.block_trace);
    assert!((c.lambda_dm + 0.5739).abs() < 1e-12);
    // Single-mass sectors: both routes agree.
    let z = Mat::zeros(2, 2);
    let d_only = lambda_dm(&setup, &md, &z).unwrap();
    assert!((d_only.block_trace - d_only.lambda_dm).abs() < 1e-12);
    let complex = Mat::from_element(2, 2, I);
    assert!(lambda_dm(&setup, &complex, &z).is_err());
}

fn sym(rng: &mut CheckRng, d: usize) -> Mat {
    let m = clifford_dirac::random::real_matrix(rng, d);
    (&m + m.transpose()) * re(0.5)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    // The block route exceeds the closed form by exactly 2a tr({m_D, m_M}²).
    #[test]
    fn lambda_routes_differ_by_the_anticommutator(seed in any::<u64>(), d in 1usize..=3) {
        let mut rng = rng_for(seed, "lambda");
        let (md, mm) = (sym(&mut rng, d), sym(&mut rng, d));
        let ac = &md * &mm + &mm * &md;
        let gap = 2.0 * 27.0 / 8.0 * (&ac * &ac).trace().re;
        let diff = lambda_dm_block_closed_form(&md, &mm, 4) - lambda_dm_formula(&md, &mm, 4);
        prop_assert!((diff - gap).abs() < 1e-12 * (1.0 + gap.abs()));
    }

    #[test]
    fn higgs_ratio_is_eps_over_n(seed in any::<u64>(), e in prop::bool::ANY) {
        let sig = Signature::new(3, 1, if e { 1 } else { -1 }).unwrap();
        let m = scenarios::twisted(sig, 2).unwrap();
        let mut rng = rng_for(seed, "higgs");
        let phi = scenarios::twist_constant(&mut rng, 4, 2);
        let h = higgs_lambda(&m.gamma, &phi);
        prop_assert!((h.ratio - higgs_lambda_prime(&sig)).abs() < 1e-12);
    }
}

fn dym_sample(setup: &DymSetup, rng: &mut CheckRng, n: usize, masses: (f64, f64)) -> DymOperator {
    let sh = FieldShape { count: 2, ..FieldShape::default() };
    let f = scenarios::hermitian_endo(rng, n, 1, sh);
    let phi_e = f.add(&f.conj_entries()).scaled(re(0.5));
    let a_e = FormField::one_form((0..n).map(|_| scenarios::hermitian_endo(rng, n, 1, sh).scaled(I)).collect());
    let conn = setup.connection_from_e(&a_e);
    let spec = MassBlockSpec { m_d_nu: m1(masses.0), m_m_nu: m1(masses.1), phi_e, e_dim: 1 };
    dym_op(setup, &conn, &spec).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

#[test]
fn both_trace_identities_hold_in_dimension_two() {
    for e in [1, -1] {
        let setup = DymSetup::new(Signature::new(2, 0, e).unwrap(), &[1.0], &[1.0]).unwrap();
        let mut rng = rng_for(11, &format!("n2/{e}"));
        for masses in [(0.7, 0.4), (0.2, 1.1)] {
            let dym = dym_sample(&setup, &mut rng, 2, masses);
            let s = stm_identity(&dym).unwrap();
            assert!(rel(s.lhs, s.rhs) < 1e-10, "pauli ε={e}: {} vs {}", s.lhs, s.rhs);
            let p = pi_identity(&dym).unwrap();
            assert!(rel(p.tr_phi2, p.closed_form) < 1e-10, "pi ε={e}: {} vs {}", p.tr_phi2, p.closed_form);
            assert!(p.xi_max < 1e-12);
            assert!(p.simple_type_defect < 1e-10);
        }
    }
}

#[test]
fn dym_pairing_assembles_from_its_blocks() {
    let sig = Signature::new(3, 1, 1).unwrap();
    let setup = DymSetup::new(sig, &[1.0], &[1.0]).unwrap();
    let mut rng = rng_for(5, "pairing");
    let dym = dym_sample(&setup, &mut rng, 4, (0.6, 0.3));
    let chi = scenarios::section(&mut rng, 4, setup.w.dim(), FieldShape::default());
    let (assembled, blocks) = dym_pairing_terms(&dym, &setup, &chi).unwrap();
    assert!((assembled - blocks).norm() < 1e-10 * assembled.norm().max(1.0), "{assembled} vs {blocks}");
}

#[test]
fn refit_recovers_planted_coefficients() {
    let rows = [[1.0, 0.5, 2.0, -1.0], [0.3, 1.5, -0.2, 0.7], [2.0, -1.0, 0.4, 0.1], [0.9, 0.2, 1.1, 1.3], [-0.5, 0.8, 0.6, 0.2]];
    let want = [1.0, -2.25, -3.375, -2.0];
    let y: Vec<f64> = rows.iter().map(|r| (0..4).map(|i| r[i] * want[i]).sum()).collect();
    let (fit, resid) = refit(&rows, &y).unwrap();
    for i in 0..4 {
        assert!((fit[i] - want[i]).abs() < 1e-12);
    }
    assert!(resid < 1e-12);
}

use std::sync::Arc;

use clifford_dirac::clifford_fiber::Signature;
use clifford_dirac::dirac_ops::{dispersion, dym_op, ConnectionSpec, DiracOperatorSpec, DymOperator, DymSetup};
use clifford_dirac::fourier_fields::{EndoField, FormField};
use clifford_dirac::graded_modules::{build_dirac_module, build_twisted_module, real_double, MassBlockSpec, ModuleDescriptor, TwistData};
use clifford_dirac::linalg::{re, Mat, I};
use clifford_dirac::pauli_maps::*;
use clifford_dirac::random::{rng_for, CheckRng};
use clifford_dirac::scenarios::{self, FieldShape};
use proptest::prelude::*;

const SH: FieldShape = FieldShape { band: 1, count: 2, capacity: 6, amp: 0.4 };

fn real_form_module(sig: Signature) -> Arc<ModuleDescriptor> {
    let w = build_twisted_module(sig, &TwistData::trivial(1)).unwrap();
    Arc::new(real_double(&build_dirac_module(&w).unwrap()).unwrap())
}

fn realify(e: &ModuleDescriptor, x: &EndoField) -> EndoField {
    x.add(&e.conjugate_field(x).unwrap()).scaled(re(0.5))
}

fn real_operator(rng: &mut CheckRng, e: &Arc<ModuleDescriptor>) -> DiracOperatorSpec {
    let n = e.n();
    let a = scenarios::connection(rng, n, e.dim(), SH);
    let a = FormField::one_form(a.comps.iter().map(|c| realify(e, c)).collect());
    let phi = realify(e, &scenarios::endo(rng, n, e.dim(), SH));
    DiracOperatorSpec::new(e.clone(), ConnectionSpec::new(a, &e.gamma), phi).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn doubled_pairing_reproduces_the_real_action(seed in any::<u64>(), plus in prop::bool::ANY) {
        let e = real_form_module(Signature::new(2, 0, if plus { 1 } else { -1 }).unwrap());
        let p = doubled_module(&e).unwrap();
        let mut rng = rng_for(seed, "pauli");
        let d = real_operator(&mut rng, &e);
        let pd = pauli_map(&d, p).unwrap();
        let psi = scenarios::section(&mut rng, 2, e.dim(), SH);
        let eq = fermionic_equivalence(&d, &pd, &psi).unwrap();
        let scale = eq.rhs.norm().max(1.0);
        prop_assert!(eq.residual / scale < 1e-10);
        prop_assert!(eq.density_residual / scale < 1e-10);
    }
}

#[test]
fn resonant_mass_gives_a_kernel_witness() {
    let sig = Signature::new(2, 0, 1).unwrap();
    let setup = DymSetup::new(sig, &[1.0], &[]).unwrap();
    let k = [1, 1];
    let m = (-dispersion(&sig, &k)).sqrt();
    assert!((m - 2f64.sqrt()).abs() < 1e-15);
    let masses = MassBlockSpec { m_d_nu: Mat::from_element(1, 1, re(m)), m_m_nu: Mat::zeros(1, 1), phi_e: EndoField::zero(2, 2), e_dim: 0 };
    let dym = dym_op(&setup, &ConnectionSpec::flat(2, 2), &masses).unwrap();
    let pd = pauli_map(&dym.op, doubled_module(&dym.op.module).unwrap()).unwrap();
    let wit = kernel_witness(&dym.op, &pd, &k, 2).unwrap().expect("resonant kernel");
    let n = wit.psi.l2_norm();
    assert!(wit.d_residual / n < 1e-10);
    assert!(wit.f_norm / n > 1e-3);
    assert!(wit.pauli_norm / n > 1e-3);
    assert!(wit.pairing.norm() / (n * n) < 1e-10);
    // Off resonance there is no kernel at all.
    let off = MassBlockSpec { m_d_nu: Mat::from_element(1, 1, re(0.5)), ..masses };
    let dym = dym_op(&setup, &ConnectionSpec::flat(2, 2), &off).unwrap();
    let pd = pauli_map(&dym.op, doubled_module(&dym.op.module).unwrap()).unwrap();
    assert!(kernel_witness(&dym.op, &pd, &k, 2).unwrap().is_none());
}

fn dym_sample(setup: &DymSetup, rng: &mut CheckRng) -> DymOperator {
    let f = scenarios::hermitian_endo(rng, 2, 1, SH);
    let phi_e = f.add(&f.conj_entries()).scaled(re(0.5));
    let a_e = FormField::one_form((0..2).map(|_| scenarios::hermitian_endo(rng, 2, 1, SH).scaled(I)).collect());
    let spec = MassBlockSpec { m_d_nu: Mat::from_element(1, 1, re(0.7)), m_m_nu: Mat::from_element(1, 1, re(0.4)), phi_e, e_dim: 1 };
    dym_op(setup, &setup.connection_from_e(&a_e), &spec).unwrap()
}

#[test]
fn pi_image_is_simple_type_only_with_the_graded_action() {
    let setup = DymSetup::new(Signature::new(2, 0, 1).unwrap(), &[1.0], &[1.0]).unwrap();
    let mut rng = rng_for(3, "pi");
    let dym = dym_sample(&setup, &mut rng);
    let p = doubled_module(&dym.op.module).unwrap();
    let graded = pi_map(&dym.op, p.clone()).unwrap();
    assert!(graded.op.simple_type_defect().unwrap() < 1e-10);
    let plain = pi_map_with(&dym.op, p, dym.op.module.opposite().unwrap()).unwrap();
    assert!(plain.op.simple_type_defect().unwrap() > 1e-3);
}

#[test]
fn pauli_map_rejects_operators_without_real_structure() {
    let m = scenarios::twisted(Signature::new(2, 0, 1).unwrap(), 1).unwrap();
    let mut rng = rng_for(1, "reject");
    let d = scenarios::generic_operator(&mut rng, &m, SH).unwrap();
    let p = doubled_module(&m).unwrap();
    assert!(pauli_map(&d, p).is_err());
}

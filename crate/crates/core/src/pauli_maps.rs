//! The Pauli map and the π map: lifting a real Dirac operator on `E` to the
//! doubled module `P = ²E` by its quantized relative curvature.
//!
//! `P` uses block ordering `E ⊕ E`, so `X ⊗ Y` (with `Y` acting on `ℂ²`) is
//! stored as `kron(Y, X)`. On the flat torus the Riemannian part of the
//! curvature vanishes and the relative curvature is the curvature of the Dirac
//! connection.

use std::sync::Arc;

use crate::clifford_fiber::CliffordGens;
use crate::dirac_ops::{quantize_form_field, quantize_one_form, ConnectionSpec, DiracOperatorSpec};
use crate::error::{precondition, Result};
use crate::fourier_fields::{EndoField, FormField, SectionField};
use crate::graded_modules::{diagonal_embed, double, ModuleDescriptor};
use crate::linalg::{eps2, eye, i2, kron, re, Vector, C64, I};

/// Reality tolerance for the domain of both maps.
pub const REALITY_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct RelativeCurvature {
    pub f_d: FormField,
    /// `δ_γ(F_D)`.
    pub slash_f: EndoField,
}

/// Curvature of the Dirac connection and its quantization.
pub fn relative_curvature(d: &DiracOperatorSpec) -> Result<RelativeCurvature> {
    let f_d = d.curv()?;
    let slash_f = quantize_form_field(d.gamma(), &f_d);
    Ok(RelativeCurvature { f_d, slash_f })
}

/// `δ(F_𝒜) + ((n-1)/n)(δ(d_𝒜 X) + X²)` with `δ` the quantization by `gens`.
///
/// For a simple-type `D = /∂_𝒜 + X` and `gens = γ` this is `/F_D`.
pub fn simple_type_curvature(gens: &CliffordGens, conn: &ConnectionSpec, x: &EndoField) -> Result<EndoField> {
    let n = conn.a.n as f64;
    let f_a = conn.curvature()?;
    let dx = conn.covariant_endo(x)?;
    let tail = quantize_one_form(gens, &dx).add(&x.mul(x)?);
    Ok(quantize_form_field(gens, &f_a).add(&tail.scaled(re((n - 1.0) / n))))
}

/// `E ↦ P` data: the doubled module and the assembled operator.
#[derive(Debug, Clone)]
pub struct PauliOperator {
    pub op: DiracOperatorSpec,
    /// `𝓕` on `E` (`i /F` for the Pauli map, `-τ_P(/F_op ⊗ ε₂)` lives on `P`).
    pub script_f: EndoField,
}

fn require_real(d: &DiracOperatorSpec) -> Result<()> {
    let r = d.reality_defect()?;
    if r > REALITY_TOL {
        return precondition(format!("operator is not real (defect {r:e})"));
    }
    Ok(())
}

/// The doubled module `²E` for an operator's module.
pub fn doubled_module(e: &ModuleDescriptor) -> Result<Arc<ModuleDescriptor>> {
    Ok(Arc::new(double(e)?))
}

fn lift_to_p(d: &DiracOperatorSpec, p: Arc<ModuleDescriptor>, extra: &EndoField) -> Result<DiracOperatorSpec> {
    let one = eye(2);
    let a = d.conn.a.map(|x| x.map_linear(|m| kron(&one, m)));
    let phi = d.phi.map_linear(|m| kron(&one, m)).add(extra);
    let conn = ConnectionSpec::new(a, &p.gamma);
    DiracOperatorSpec::new(p, conn, phi)
}

/// `P_D = D ⊗ 1₂ + 𝓕 ⊗ I₂` with `𝓕 = i /F_D`.
pub fn pauli_map(d: &DiracOperatorSpec, p: Arc<ModuleDescriptor>) -> Result<PauliOperator> {
    require_real(d)?;
    let rc = relative_curvature(d)?;
    let script_f = rc.slash_f.scaled(I);
    let ii = i2();
    let extra = script_f.map_linear(|m| kron(&ii, m));
    Ok(PauliOperator { op: lift_to_p(d, p, &extra)?, script_f })
}

/// `∫⟨ψ, Dψ⟩`.
pub fn fermionic_action(d: &DiracOperatorSpec, psi: &SectionField) -> Result<C64> {
    psi.l2_pairing(&d.apply(psi)?, &d.module.gram)
}

/// `²ψ` for a section.
pub fn diagonal_section(psi: &SectionField) -> SectionField {
    psi.map_linear(|v| diagonal_embed(v))
}

#[derive(Debug, Clone, Copy)]
pub struct FermionicEquivalence {
    pub lhs: C64,
    pub rhs: C64,
    /// Pointwise density mismatch.
    pub density_residual: f64,
    pub residual: f64,
}

/// `⟨²ψ, P_D ²ψ⟩_P` against `⟨ψ, Dψ⟩_E`, pointwise and integrated.
pub fn fermionic_equivalence(d: &DiracOperatorSpec, p: &PauliOperator, psi: &SectionField) -> Result<FermionicEquivalence> {
    let dpsi = diagonal_section(psi);
    let lhs_density = dpsi.pairing_density(&p.op.apply(&dpsi)?, &p.op.module.gram)?;
    let rhs_density = psi.pairing_density(&d.apply(psi)?, &d.module.gram)?;
    let lhs = lhs_density.integrate();
    let rhs = rhs_density.integrate();
    Ok(FermionicEquivalence {
        lhs,
        rhs,
        density_residual: lhs_density.sub(&rhs_density).max_abs(),
        residual: (lhs - rhs).norm(),
    })
}

/// Kernel of a constant-coefficient, flat operator `γ·∂ + Φ` on the plane
/// wave `e^{ik·x}`: null vectors of `i γ(k) + Φ`.
pub fn plane_wave_kernel(d: &DiracOperatorSpec, k: &[i32], tol: f64) -> Result<Vec<Vector>> {
    if d.conn.a.max_abs() != 0.0 || d.phi.modes().keys().any(|m| m.iter().any(|&x| x != 0)) {
        return precondition("plane-wave kernels need a flat connection and constant zero-order part");
    }
    let kc: Vec<C64> = k.iter().map(|&x| re(x as f64)).collect();
    let dim = d.module.dim();
    let phi0 = d.phi.zero_mode().cloned().unwrap_or_else(|| crate::linalg::zeros(dim));
    let sym = d.gamma().gamma(&kc)? * I + phi0;
    // nalgebra's SVD does not terminate on non-finite input.
    if sym.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return precondition("non-finite plane-wave symbol");
    }
    let svd = sym.svd(false, true);
    let vt = svd.v_t.expect("requested");
    let mut out = Vec::new();
    for (i, s) in svd.singular_values.iter().enumerate() {
        if *s < tol {
            out.push(vt.row(i).adjoint());
        }
    }
    Ok(out)
}

/// A section in `ker D` that is not annihilated by `𝓕`, showing that the
/// stationarity conditions of the `P`-valued functional are strictly stronger
/// than `Dψ = 0` even though the pairings agree.
#[derive(Debug, Clone)]
pub struct KernelWitness {
    pub psi: SectionField,
    pub d_residual: f64,
    pub f_norm: f64,
    /// `‖P_D ²ψ‖`, nonzero while `⟨²ψ, P_D ²ψ⟩ = 0`.
    pub pauli_norm: f64,
    pub pairing: C64,
}

pub fn kernel_witness(d: &DiracOperatorSpec, p: &PauliOperator, k: &[i32], capacity: i32) -> Result<Option<KernelWitness>> {
    let n = d.sig().n();
    for v in plane_wave_kernel(d, k, 1e-10)? {
        let psi = SectionField::plane_wave(n, capacity, k.to_vec(), v)?;
        let fpsi = p.script_f.apply(&psi)?;
        let f_norm = fpsi.l2_norm();
        if f_norm > 1e-6 {
            let d_residual = d.apply(&psi)?.l2_norm();
            let dpsi = diagonal_section(&psi);
            let pp = p.op.apply(&dpsi)?;
            let pairing = dpsi.l2_pairing(&pp, &p.op.module.gram)?;
            return Ok(Some(KernelWitness { psi, d_residual, f_norm, pauli_norm: pp.l2_norm(), pairing }));
        }
    }
    Ok(None)
}

/// `π_D(D) = D ⊗ 1₂ + i 𝓕` with `𝓕 = -τ_P (/F_op ⊗ ε₂)` and
/// `/F_op = δ_op(F_𝒜) + ((n-1)/n)(δ_op(d_𝒜 X) + X²)` for `D = /∂_𝒜 + X`.
///
/// The quantization uses the graded opposite action `τ γ_op`, which
/// anticommutes with `γ`. With the plain `γ_op` (commuting with `γ`) the
/// `δ_op(d_𝒜 X)` term commutes with `γ_P` after multiplication by `τ_P`, so the
/// image is simple type only when `d_𝒜 X = 0`; see [`pi_map_with`] to run
/// that variant.
pub fn pi_map(d: &DiracOperatorSpec, p: Arc<ModuleDescriptor>) -> Result<PiOperator> {
    let graded = graded_opposite(&d.module)?;
    pi_map_with(d, p, &graded)
}

/// `τ γ_op(e^k)`: still a Clifford action (`τ` commutes with `γ_op` and squares
/// to one), now anticommuting with `γ`.
pub fn graded_opposite(m: &ModuleDescriptor) -> Result<CliffordGens> {
    let op = m.opposite()?;
    CliffordGens::new(op.sig, op.gens.iter().map(|g| crate::linalg::matmul(&m.tau, g)).collect())
}

/// [`pi_map`] with an explicit second Clifford action in place of `γ_op`.
pub fn pi_map_with(d: &DiracOperatorSpec, p: Arc<ModuleDescriptor>, op_gens: &CliffordGens) -> Result<PiOperator> {
    require_real(d)?;
    if !d.is_simple_type()? {
        return precondition("the π map takes simple-type operators");
    }
    let slash_f_op = simple_type_curvature(op_gens, &d.conn, &d.phi)?;
    let e2 = eps2();
    let tau_p = p.tau.clone();
    let script_f = slash_f_op.map_linear(|m| kron(&e2, m)).lmul_const(&tau_p).scaled(re(-1.0));
    let op = lift_to_p(d, p, &script_f.scaled(I))?;
    Ok(PiOperator { op, slash_f_op, script_f })
}

#[derive(Debug, Clone)]
pub struct PiOperator {
    pub op: DiracOperatorSpec,
    pub slash_f_op: EndoField,
    /// `𝓕` on `P`.
    pub script_f: EndoField,
}

/// Largest `[γ^k, /F_op]` over generators.
pub fn left_commutator_defect(gamma: &CliffordGens, x: &EndoField) -> f64 {
    gamma.gens.iter().map(|g| x.lmul_const(g).sub(&x.rmul_const(g)).max_abs()).fold(0.0, f64::max)
}

/// `(i/F)^cc + i/F` and `/F^cc - /F` for a real operator.
pub fn curvature_reality_defects(d: &DiracOperatorSpec, slash_f: &EndoField) -> Result<(f64, f64)> {
    let m = &d.module;
    let sf_cc = m.conjugate_field(slash_f)?;
    let isf = slash_f.scaled(I);
    let isf_cc = m.conjugate_field(&isf)?;
    Ok((isf_cc.add(&isf).max_abs(), sf_cc.sub(slash_f).max_abs()))
}

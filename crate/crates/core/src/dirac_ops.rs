//! Dirac-type operators on band-limited sections and their canonical
//! decompositions.
//!
//! An operator is stored by its coefficients `D = Σ γ^j (∂_j + A_j) + Φ`. Everything is
//! expressed through the total zero-order part `Ψ = Σ γ^j A_j + Φ`:
//!
//! - Bochner connection `∂_B = ∂ + B`, `B_j = (ε/2) g^{jj} {γ^j, Ψ}`,
//!   Laplacian `Δ_B = ε Σ g^{jj} (∂_j + B_j)²`;
//! - `Φ_D = D - /∂_B = Ψ - Σ γ^j B_j`;
//! - `V_D = D² - Δ_B = Σ γ^j ∂_j Ψ + Ψ² - ε Σ g^{jj} (∂_j B_j + B_j²)`;
//! - Dirac form `ω_j = Θ_j Φ_D`, Dirac connection `∂_B + ω`.
//!
//! On the flat torus the codifferential in the Bochner defining property is
//! `δ_g df = ε Σ g^{jj} ∂_j² f`; with this sign
//! `2 ev_g(df, ∂_B ψ) = ε([D², f] - δ_g df) ψ` holds exactly.

use std::sync::Arc;

use nalgebra::DMatrix;

use crate::clifford_fiber::{CliffordGens, Signature};
use crate::error::{precondition, Error, Result};
use crate::fourier_fields::{ev_g, EndoField, FormField, ScalarField, SectionField};
use crate::graded_modules::{ModuleDescriptor, SignFlags};
use crate::linalg::{block2, block_diag, c, eps2, eye, kron, max_abs, re, Mat, Vector, C64, I};

/// Pointwise tolerance used by the structural predicates.
pub const PREDICATE_TOL: f64 = 1e-10;

/// `Σ_j γ^j α_j` for an endomorphism-valued one-form.
pub fn quantize_one_form(gamma: &CliffordGens, a: &FormField) -> EndoField {
    assert_eq!(a.degree, 1);
    let mut out = a.comps[0].lmul_const(&gamma.gens[0]);
    for j in 1..a.n {
        out = out.add(&a.comps[j].lmul_const(&gamma.gens[j]));
    }
    out
}

/// `δ_γ` of a form field: each blade `e^{i1} ∧ ... ∧ e^{ik}` becomes the
/// ordered product `γ^{i1} ... γ^{ik}` composed with its coefficient.
pub fn quantize_form_field(gamma: &CliffordGens, f: &FormField) -> EndoField {
    let cap = f.comps.first().map(|x| x.capacity()).unwrap_or(0);
    let mut out = EndoField::zero(f.n, cap);
    for (mask, comp) in f.blades.iter().zip(&f.comps) {
        out = out.add(&comp.lmul_const(&gamma.quantize_blade(*mask)));
    }
    out
}

/// `F = dA + A ∧ A`, i.e. `F_ij = ∂_i A_j - ∂_j A_i + [A_i, A_j]`.
pub fn curvature_of(a: &FormField) -> Result<FormField> {
    Ok(a.d().add(&crate::fourier_fields::wedge(a, a)?))
}

/// Connection `∂ + A` on the fiber bundle.
#[derive(Debug, Clone)]
pub struct ConnectionSpec {
    pub a: FormField,
    pub clifford_flag: bool,
}

impl ConnectionSpec {
    pub fn flat(n: usize, capacity: i32) -> Self {
        ConnectionSpec { a: FormField::zero(n, 1, capacity), clifford_flag: true }
    }

    /// Wraps `A`, detecting whether every `A_j` commutes with the Clifford action.
    pub fn new(a: FormField, gamma: &CliffordGens) -> Self {
        let clifford_flag = a.comps.iter().all(|aj| {
            gamma.gens.iter().all(|g| aj.lmul_const(g).sub(&aj.rmul_const(g)).max_abs() < PREDICATE_TOL)
        });
        ConnectionSpec { a, clifford_flag }
    }

    pub fn curvature(&self) -> Result<FormField> {
        curvature_of(&self.a)
    }

    /// `(∂_A X)_j = ∂_j X + [A_j, X]` for an endomorphism field.
    pub fn covariant_endo(&self, x: &EndoField) -> Result<FormField> {
        let comps = (0..self.a.n)
            .map(|j| Ok(x.derive(j).add(&self.a.comps[j].commutator(x)?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(FormField::one_form(comps))
    }
}

/// `(∂_j + B_j)` applied to a section.
fn cov_section(b: &FormField, j: usize, psi: &SectionField) -> Result<SectionField> {
    Ok(psi.derive(j).add(&b.comps[j].apply(psi)?))
}

/// `ε Σ g^{jj} (∂_j + B_j)² ψ`.
pub fn laplacian(sig: &Signature, b: &FormField, psi: &SectionField) -> Result<SectionField> {
    let mut out = SectionField::zero(psi.n(), psi.capacity());
    for j in 0..sig.n() {
        let once = cov_section(b, j, psi)?;
        let twice = cov_section(b, j, &once)?;
        out = out.add(&twice.scaled(re(sig.eps() * sig.metric(j))));
    }
    Ok(out)
}

/// `(∂_B X)_j = ∂_j X + [B_j, X]`.
fn cov_endo(b: &FormField, x: &EndoField) -> Result<FormField> {
    ConnectionSpec { a: b.clone(), clifford_flag: false }.covariant_endo(x)
}

/// `ev_g(∂_B α) = Σ g^{jj} (∂_j α_j + [B_j, α_j])`.
fn ev_cov(sig: &Signature, b: &FormField, alpha: &FormField) -> Result<EndoField> {
    let mut out = EndoField::zero(sig.n(), alpha.comps[0].capacity());
    for j in 0..sig.n() {
        let t = alpha.comps[j].derive(j).add(&b.comps[j].commutator(&alpha.comps[j])?);
        out = out.add(&t.scaled(re(sig.metric(j))));
    }
    Ok(out)
}

/// First- and second-order decomposition data of a Dirac-type operator.
#[derive(Debug, Clone)]
pub struct DecompositionData {
    /// Full Bochner potential `B`, so `∂_B = ∂ + B`.
    pub bochner: FormField,
    /// Bochner shift `α_D = B - A`.
    pub alpha_d: FormField,
    pub phi_d: EndoField,
    pub omega_d: FormField,
    pub xi_d: Vec<ScalarField>,
    pub v_d: EndoField,
}

#[derive(Debug, Clone)]
pub struct DiracOperatorSpec {
    pub module: Arc<ModuleDescriptor>,
    pub conn: ConnectionSpec,
    pub phi: EndoField,
}

impl DiracOperatorSpec {
    pub fn new(module: Arc<ModuleDescriptor>, conn: ConnectionSpec, phi: EndoField) -> Result<Self> {
        let d = module.dim();
        let n = module.n();
        if conn.a.n != n || conn.a.degree != 1 || phi.n() != n {
            return Err(Error::DimensionMismatch { expected: n, got: conn.a.n });
        }
        for f in conn.a.comps.iter().chain(std::iter::once(&phi)) {
            if let Some(k) = f.dim() {
                if k != d {
                    return Err(Error::DimensionMismatch { expected: d, got: k });
                }
            }
        }
        Ok(DiracOperatorSpec { module, conn, phi })
    }

    /// `/∂_A` with no zero-order term.
    pub fn quantized_connection(module: Arc<ModuleDescriptor>, conn: ConnectionSpec) -> Result<Self> {
        let n = module.n();
        let cap = conn.a.comps[0].capacity();
        Self::new(module, conn, EndoField::zero(n, cap))
    }

    pub fn sig(&self) -> Signature {
        self.module.sig
    }

    pub fn gamma(&self) -> &CliffordGens {
        &self.module.gamma
    }

    pub fn capacity(&self) -> i32 {
        self.phi.capacity().max(self.conn.a.comps[0].capacity())
    }

    /// Same operator with a different zero-order part.
    pub fn with_phi(&self, phi: EndoField) -> Self {
        DiracOperatorSpec { module: self.module.clone(), conn: self.conn.clone(), phi }
    }

    /// `D + X` for a zero-order `X`.
    pub fn plus(&self, x: &EndoField) -> Self {
        self.with_phi(self.phi.add(x))
    }

    /// `/∂_A`.
    pub fn principal(&self) -> Self {
        self.with_phi(EndoField::zero(self.sig().n(), self.capacity()))
    }

    /// `Ψ = Σ γ^j A_j + Φ`.
    pub fn total_zero_order(&self) -> EndoField {
        quantize_one_form(self.gamma(), &self.conn.a).add(&self.phi)
    }

    /// `δ_γ ∘ (∂ + A) ψ + Φ ψ`.
    pub fn apply(&self, psi: &SectionField) -> Result<SectionField> {
        let mut out = self.phi.apply(psi)?;
        for j in 0..self.sig().n() {
            let cov = cov_section(&self.conn.a, j, psi)?;
            out = out.add(&cov.map_linear(|v| &self.gamma().gens[j] * v));
        }
        Ok(out)
    }

    /// `[D, f] ψ = D(fψ) - f Dψ`.
    pub fn commutator_with_function(&self, f: &ScalarField, psi: &SectionField) -> Result<SectionField> {
        let fpsi = f.convolve(psi, |a, v| v * *a)?;
        let dpsi = self.apply(psi)?;
        Ok(self.apply(&fpsi)?.sub(&f.convolve(&dpsi, |a, v| v * *a)?))
    }

    /// `γ(df) ψ`.
    pub fn symbol_apply(&self, f: &ScalarField, psi: &SectionField) -> Result<SectionField> {
        let mut out = SectionField::zero(psi.n(), psi.capacity());
        for j in 0..self.sig().n() {
            let g = self.gamma().gens[j].clone();
            out = out.add(&f.derive(j).convolve(psi, move |a, v| &g * v * *a)?);
        }
        Ok(out)
    }

    pub fn bochner_potential(&self) -> Result<FormField> {
        let sig = self.sig();
        let psi0 = self.total_zero_order();
        let comps = (0..sig.n())
            .map(|j| {
                let g = &self.gamma().gens[j];
                psi0.lmul_const(g).add(&psi0.rmul_const(g)).scaled(re(0.5 * sig.eps() * sig.metric(j)))
            })
            .collect();
        Ok(FormField::one_form(comps))
    }

    pub fn bochner(&self) -> Result<DecompositionData> {
        let sig = self.sig();
        let n = sig.n();
        let psi0 = self.total_zero_order();
        let b = self.bochner_potential()?;
        let alpha_d = b.sub(&self.conn.a);
        let phi_d = psi0.sub(&quantize_one_form(self.gamma(), &b));
        let theta = self.gamma().canonical_one_form();
        let omega_d = FormField::one_form(theta.comps.iter().map(|t| phi_d.lmul_const(t)).collect());
        let xi_d = (0..n).map(|j| omega_d.comps[j].trace().scaled(re(-sig.eps() * sig.metric(j)))).collect();
        let mut v_d = psi0.mul(&psi0)?;
        for j in 0..n {
            v_d = v_d.add(&psi0.derive(j).lmul_const(&self.gamma().gens[j]));
            let bj = &b.comps[j];
            let t = bj.derive(j).add(&bj.mul(bj)?);
            v_d = v_d.sub(&t.scaled(re(sig.eps() * sig.metric(j))));
        }
        Ok(DecompositionData { bochner: b, alpha_d, phi_d, omega_d, xi_d, v_d })
    }

    /// `Δ_B ψ` with the operator's own Bochner connection.
    pub fn bochner_laplacian(&self, psi: &SectionField) -> Result<SectionField> {
        laplacian(&self.sig(), &self.bochner_potential()?, psi)
    }

    /// Potential of the Dirac connection `∂_B + ω_D`.
    pub fn dirac_connection(&self, dec: &DecompositionData) -> FormField {
        dec.bochner.add(&dec.omega_d)
    }

    /// `curv(D)`: curvature of the Dirac connection.
    pub fn curv(&self) -> Result<FormField> {
        let dec = self.bochner()?;
        curvature_of(&self.dirac_connection(&dec))
    }

    /// `{D - /∂_B, γ(e^k)} = 0` for every generator.
    pub fn simple_type_defect(&self) -> Result<f64> {
        let dec = self.bochner()?;
        Ok(self
            .gamma()
            .gens
            .iter()
            .map(|g| dec.phi_d.lmul_const(g).add(&dec.phi_d.rmul_const(g)).max_abs())
            .fold(0.0, f64::max))
    }

    pub fn is_simple_type(&self) -> Result<bool> {
        Ok(self.simple_type_defect()? < PREDICATE_TOL)
    }

    /// Largest difference of the Bochner potentials of two operators.
    pub fn bochner_distance(&self, other: &DiracOperatorSpec) -> Result<f64> {
        Ok(self.bochner_potential()?.sub(&other.bochner_potential()?).max_abs())
    }

    /// Largest deviation from `J D J = D`, computed mode by mode from the coefficients.
    pub fn reality_defect(&self) -> Result<f64> {
        let m = &self.module;
        let psi0 = self.total_zero_order();
        let mut worst = m.conjugate_field(&psi0)?.sub(&psi0).max_abs();
        for g in &m.gamma.gens {
            worst = worst.max(max_abs(&(m.conjugate_endo(g)? - g)));
        }
        Ok(worst)
    }

    /// `J ψ` pointwise.
    pub fn conjugate_section(&self, psi: &SectionField) -> Result<SectionField> {
        let cmat = self.module.real_structure()?.clone();
        Ok(psi.conj_entries().map_linear(move |v| &cmat * v))
    }
}

/// Residual of the Bochner defining property
/// `2 ev_g(df, ∂_B ψ) = ε([D², f] - δ_g df) ψ`.
pub fn bochner_defining_residual(d: &DiracOperatorSpec, f: &ScalarField, psi: &SectionField) -> Result<f64> {
    let sig = d.sig();
    let b = d.bochner_potential()?;
    let mut lhs = SectionField::zero(psi.n(), psi.capacity());
    for j in 0..sig.n() {
        let cov = cov_section(&b, j, psi)?;
        lhs = lhs.add(&f.derive(j).convolve(&cov, |a, v| v * *a)?.scaled(re(2.0 * sig.metric(j))));
    }
    let fpsi = f.convolve(psi, |a, v| v * *a)?;
    let d2 = |x: &SectionField| -> Result<SectionField> { d.apply(&d.apply(x)?) };
    let comm = d2(&fpsi)?.sub(&f.convolve(&d2(psi)?, |a, v| v * *a)?);
    let mut delta = ScalarField::zero(f.n(), f.capacity());
    for j in 0..sig.n() {
        delta = delta.add(&f.derive(j).derive(j).scaled(re(sig.eps() * sig.metric(j))));
    }
    let rhs = comm.sub(&delta.convolve(psi, |a, v| v * *a)?).scaled(re(sig.eps()));
    Ok(lhs.sub(&rhs).l2_norm())
}

/// Relative residual `‖D²ψ - Δ_B ψ - V_D ψ‖ / ‖ψ‖`.
pub fn lichnerowicz_residual(d: &DiracOperatorSpec, psi: &SectionField) -> Result<f64> {
    let dec = d.bochner()?;
    let lhs = d.apply(&d.apply(psi)?)?;
    let rhs = laplacian(&d.sig(), &dec.bochner, psi)?.add(&dec.v_d.apply(psi)?);
    Ok(lhs.sub(&rhs).l2_norm() / psi.l2_norm())
}

/// Both sides of the generalized decomposition of `H = (D1 + Φ1)(D2 + Φ2)`.
#[derive(Debug, Clone)]
pub struct LichnerowiczData {
    /// Bochner potential of `D2`.
    pub bochner: FormField,
    pub alpha_h: FormField,
    /// `V_H` assembled from `V_D`, `Φ_D` and `α_H` of `D2`.
    pub v_h: EndoField,
    /// `V_H` expanded directly from the two total zero-order parts.
    pub v_h_direct: EndoField,
}

/// Generalized decomposition `H = Δ_H + V_H`, `∂_H = ∂_B + α_H`, with `∂_B`
/// the Bochner connection of `D2`.
pub fn lichnerowicz_general(
    d1: &DiracOperatorSpec,
    phi1: &EndoField,
    d2: &DiracOperatorSpec,
    phi2: &EndoField,
) -> Result<LichnerowiczData> {
    if !Arc::ptr_eq(&d1.module, &d2.module) && d1.module.dim() != d2.module.dim() {
        return Err(Error::DimensionMismatch { expected: d2.module.dim(), got: d1.module.dim() });
    }
    let sig = d2.sig();
    let n = sig.n();
    let gens = &d2.gamma().gens;
    let dec = d2.bochner()?;
    let b = &dec.bochner;
    let phi12 = d1.total_zero_order().sub(&d2.total_zero_order());
    let left = phi1.add(&phi12);
    let alpha_h = FormField::one_form(
        (0..n)
            .map(|j| phi2.lmul_const(&gens[j]).add(&left.rmul_const(&gens[j])).scaled(re(0.5 * sig.eps() * sig.metric(j))))
            .collect(),
    );
    let dphi2 = cov_endo(b, phi2)?;
    let v_h = dec
        .v_d
        .add(&quantize_one_form(d2.gamma(), &dphi2))
        .sub(&ev_cov(&sig, b, &alpha_h)?.scaled(re(sig.eps())))
        .sub(&ev_g(&sig, &alpha_h, &alpha_h)?.scaled(re(sig.eps())))
        .add(&dec.phi_d.mul(phi2)?)
        .add(&left.mul(&phi2.add(&dec.phi_d))?);

    // Direct route from Z1 = Ψ1 + Φ1 and Z2 = Ψ2 + Φ2.
    let z1 = d1.total_zero_order().add(phi1);
    let z2 = d2.total_zero_order().add(phi2);
    let mut v_direct = z1.mul(&z2)?;
    for j in 0..n {
        v_direct = v_direct.add(&z2.derive(j).lmul_const(&gens[j]));
        let beta = z2.lmul_const(&gens[j]).add(&z1.rmul_const(&gens[j])).scaled(re(0.5 * sig.eps() * sig.metric(j)));
        let t = beta.derive(j).add(&beta.mul(&beta)?);
        v_direct = v_direct.sub(&t.scaled(re(sig.eps() * sig.metric(j))));
    }
    Ok(LichnerowiczData { bochner: dec.bochner, alpha_h, v_h, v_h_direct: v_direct })
}

/// Relative residual of `Hψ = Δ_H ψ + V_H ψ` using the assembled `V_H`.
pub fn lichnerowicz_general_residual(
    d1: &DiracOperatorSpec,
    phi1: &EndoField,
    d2: &DiracOperatorSpec,
    phi2: &EndoField,
    data: &LichnerowiczData,
    psi: &SectionField,
) -> Result<f64> {
    let inner = d2.apply(psi)?.add(&phi2.apply(psi)?);
    let h = d1.apply(&inner)?.add(&phi1.apply(&inner)?);
    let conn = data.bochner.add(&data.alpha_h);
    let rhs = laplacian(&d2.sig(), &conn, psi)?.add(&data.v_h.apply(psi)?);
    Ok(h.sub(&rhs).l2_norm() / psi.l2_norm())
}

/// Both sides of `tr V_D = tr_γ(curv(D) - ε ev_g(ω_D²)) + div ξ_D`.
pub fn potential_trace_identity(d: &DiracOperatorSpec) -> Result<(ScalarField, ScalarField)> {
    let sig = d.sig();
    let dec = d.bochner()?;
    let lhs = dec.v_d.trace();
    let curv = curvature_of(&d.dirac_connection(&dec))?;
    let rhs = quantize_form_field(d.gamma(), &curv)
        .trace()
        .sub(&ev_g(&sig, &dec.omega_d, &dec.omega_d)?.trace().scaled(re(sig.eps())))
        .add(&crate::fourier_fields::divergence(&dec.xi_d));
    Ok((lhs, rhs))
}

/// `Y ↦ Y γ` or `Y ↦ γ Y` bracket with sign: `s = +1` anticommutator, `-1` commutator.
fn bracket(a: &Mat, b: &Mat, s: f64) -> Mat {
    crate::linalg::matmul(a, b) + crate::linalg::matmul(b, a) * re(s)
}

/// Commutes with every generator.
fn commutes_with_gamma(gamma: &CliffordGens, x: &EndoField) -> bool {
    gamma.gens.iter().all(|g| x.lmul_const(g).sub(&x.rmul_const(g)).max_abs() < PREDICATE_TOL)
}

fn tau_parity_defect(tau: &Mat, x: &EndoField, parity: f64) -> f64 {
    // parity +1: even (commutes with τ); -1: odd.
    x.lmul_const(tau).sub(&x.rmul_const(tau).scaled(re(parity))).max_abs()
}

/// Inputs of the real simple-type construction on `E = ²S`.
#[derive(Debug, Clone)]
pub struct SimpleTypeInputs {
    /// `χ_S`: τ-odd, commuting with γ.
    pub chi: EndoField,
    /// `χ'_S`: τ-even, commuting with γ; used when `γ_S^cc = +γ_S`.
    pub chi_prime: Option<EndoField>,
    /// `μ_M`: τ-even, commuting with γ; used when `γ_S^cc = -γ_S`.
    pub mu_m: Option<EndoField>,
    /// `σ_S`: one-form, τ-odd, commuting with γ.
    pub sigma: FormField,
}

/// Result of the real simple-type construction.
#[derive(Debug, Clone)]
pub struct RealSimpleType {
    pub op: DiracOperatorSpec,
    /// `τ_E φ_E`, the zero-order part relative to `/∂_𝒜`.
    pub phi_e: EndoField,
    /// `φ_S`.
    pub phi_s: EndoField,
    /// Sign of `γ_S^cc = ±γ_S`.
    pub gamma_cc_sign: i8,
}

/// `𝒜 = A ⊕ A^cc` on `E = S ⊕ S`.
pub fn real_form_connection(s: &ModuleDescriptor, a: &FormField) -> Result<FormField> {
    let comps = a
        .comps
        .iter()
        .map(|x| {
            let xc = s.conjugate_field(x)?;
            Ok(diag_fields(x, &xc, s.dim()))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FormField::one_form(comps))
}

/// `diag(X, Y)` fieldwise; missing modes are zero blocks of size `d`.
pub fn diag_fields(x: &EndoField, y: &EndoField, d: usize) -> EndoField {
    let z = Mat::zeros(d, d);
    x.map_linear(|m| block_diag(&[m, &z])).add(&y.map_linear(|m| block_diag(&[&z, m])))
}

/// `[[a, b], [c, d]]` fieldwise with `d`-sized blocks.
pub fn block_fields(a: &EndoField, b: &EndoField, cc: &EndoField, dd: &EndoField, d: usize) -> EndoField {
    let z = Mat::zeros(d, d);
    a.map_linear(|m| block2(m, &z, &z, &z))
        .add(&b.map_linear(|m| block2(&z, m, &z, &z)))
        .add(&cc.map_linear(|m| block2(&z, &z, m, &z)))
        .add(&dd.map_linear(|m| block2(&z, &z, &z, m)))
}

/// Real form `D ⊕ D^cc` of an operator on `S`, acting on `E`.
pub fn real_form(e: Arc<ModuleDescriptor>, s: &ModuleDescriptor, d: &DiracOperatorSpec) -> Result<DiracOperatorSpec> {
    let a = real_form_connection(s, &d.conn.a)?;
    let phi = diag_fields(&d.phi, &s.conjugate_field(&d.phi)?, s.dim());
    let conn = ConnectionSpec::new(a, &e.gamma);
    DiracOperatorSpec::new(e, conn, phi)
}

/// Real simple-type operator `/∂_𝒜 + τ_E φ_E` on `E = ²S` with
/// `φ_E = [[χ, ±φ^cc], [-φ, ∓χ^cc]]` (sign of `τ_S^cc = ±τ_S`) and
/// `φ_S = χ' + τ_S δ_γ(σ)` or `τ_S μ_M + δ_γ(σ)` by the sign of `γ_S^cc`.
pub fn build_real_simple_type(
    e: Arc<ModuleDescriptor>,
    s: &ModuleDescriptor,
    a_s: &ConnectionSpec,
    inputs: &SimpleTypeInputs,
) -> Result<RealSimpleType> {
    let flags: SignFlags = s.flags()?;
    let g = &s.gamma;
    let tau = &s.tau;
    if !a_s.clifford_flag {
        return precondition("the real form of /∂_A is of simple type only for a Clifford connection");
    }
    let check = |name: &str, x: &EndoField, parity: f64| -> Result<()> {
        if !commutes_with_gamma(g, x) {
            return precondition(format!("{name} must commute with the Clifford action"));
        }
        if tau_parity_defect(tau, x, parity) > PREDICATE_TOL {
            return precondition(format!("{name} has the wrong τ-parity"));
        }
        Ok(())
    };
    check("χ_S", &inputs.chi, -1.0)?;
    for (j, sj) in inputs.sigma.comps.iter().enumerate() {
        check(&format!("σ_S component {j}"), sj, -1.0)?;
    }
    let dsig = quantize_one_form(g, &inputs.sigma);
    let phi_s = match (flags.j_gamma, &inputs.chi_prime, &inputs.mu_m) {
        (1, Some(cp), None) => {
            check("χ'_S", cp, 1.0)?;
            cp.add(&dsig.lmul_const(tau))
        }
        (-1, None, Some(mu)) => {
            check("μ_M", mu, 1.0)?;
            mu.lmul_const(tau).add(&dsig)
        }
        (1, _, _) => return precondition("γ_S^cc = +γ_S takes χ'_S and no μ_M"),
        _ => return precondition("γ_S^cc = -γ_S takes μ_M and no χ'_S"),
    };
    let st = flags.j_tau as f64;
    let d = s.dim();
    let chi_cc = s.conjugate_field(&inputs.chi)?;
    let phi_cc = s.conjugate_field(&phi_s)?;
    let phi_e = block_fields(
        &inputs.chi,
        &phi_cc.scaled(re(st)),
        &phi_s.scaled(re(-1.0)),
        &chi_cc.scaled(re(-st)),
        d,
    )
    .lmul_const(&e.tau);
    let a = real_form_connection(s, &a_s.a)?;
    let conn = ConnectionSpec::new(a, &e.gamma);
    let op = DiracOperatorSpec::new(e, conn, phi_e.clone())?;
    Ok(RealSimpleType { op, phi_e, phi_s, gamma_cc_sign: flags.j_gamma })
}

/// Largest `[[X, γ^a]_±, γ^b]_∓` over generator pairs, where `X` is the lower
/// off-diagonal block of `τ_E φ_E` and `±` is the sign of `γ_S^cc`
/// (`[·,·]_+` the anticommutator).
pub fn double_bracket_defect(rst: &RealSimpleType, s: &ModuleDescriptor) -> f64 {
    let d = s.dim();
    let sg = rst.gamma_cc_sign as f64;
    let mut worst: f64 = 0.0;
    for x in rst.phi_e.modes().values() {
        let low = x.view((d, 0), (d, d)).into_owned();
        for ga in &s.gamma.gens {
            for gb in &s.gamma.gens {
                worst = worst.max(max_abs(&bracket(&bracket(&low, ga, sg), gb, -sg)));
            }
        }
    }
    worst
}

/// Dirac–Yukawa operator `D_D = /∂_A + i μ_D` on `S = ²W` with
/// `μ_D = -τ_S (φ_D ⊗ ε₂)`.
pub fn dirac_yukawa_op(
    w: &ModuleDescriptor,
    s: Arc<ModuleDescriptor>,
    a_w: &ConnectionSpec,
    phi_d: &EndoField,
) -> Result<DiracOperatorSpec> {
    if !commutes_with_gamma(&w.gamma, phi_d) {
        return precondition("φ_D must commute with the Clifford action of W");
    }
    let i2 = eye(2);
    let a = a_w.a.map(|x| x.map_linear(|m| kron(m, &i2)));
    let mu_d = mu_dirac(s.as_ref(), phi_d);
    let conn = ConnectionSpec::new(a, &s.gamma);
    DiracOperatorSpec::new(s, conn, mu_d.scaled(I))
}

/// `μ_D = -τ_S (φ_D ⊗ ε₂)`.
pub fn mu_dirac(s: &ModuleDescriptor, phi_d: &EndoField) -> EndoField {
    let e2 = eps2();
    phi_d.map_linear(|m| kron(m, &e2)).lmul_const(&s.tau).scaled(re(-1.0))
}

/// Modules of the split `W = W_ν ⊕ W_e` and its Dirac module and real form.
#[derive(Debug, Clone)]
pub struct DymSetup {
    pub w: Arc<ModuleDescriptor>,
    pub s: Arc<ModuleDescriptor>,
    pub e: Arc<ModuleDescriptor>,
    pub nu: usize,
    pub e_dim: usize,
}

impl DymSetup {
    /// `W = Λ ⊗ (ℂ^ν ⊕ ℂ^e)` with the given twist gradings.
    pub fn new(sig: Signature, nu_signs: &[f64], e_signs: &[f64]) -> Result<Self> {
        let mut signs = nu_signs.to_vec();
        signs.extend_from_slice(e_signs);
        let twist = crate::graded_modules::TwistData::graded(&signs);
        let w = crate::graded_modules::build_twisted_module_with(sig, &twist, crate::graded_modules::LambdaReal::ParityConj)?;
        Self::from_module(w, nu_signs.len(), e_signs.len())
    }

    pub fn from_stm(stm: &crate::graded_modules::StmModule) -> Result<Self> {
        Self::from_module(stm.module.clone(), stm.dims.nu(), stm.dims.e())
    }

    fn from_module(w: ModuleDescriptor, nu: usize, e_dim: usize) -> Result<Self> {
        let s = crate::graded_modules::build_dirac_module(&w)?;
        let e = crate::graded_modules::real_double(&s)?;
        if s.flags()?.j_gamma != -1 {
            return precondition("Majorana masses need γ_S^cc = -γ_S");
        }
        Ok(DymSetup { w: Arc::new(w), s: Arc::new(s), e: Arc::new(e), nu, e_dim })
    }

    pub fn lambda_dim(&self) -> usize {
        self.w.dim() / (self.nu + self.e_dim)
    }

    /// `1_Λ ⊗ m` for a twist-level matrix.
    pub fn lift(&self, m: &Mat) -> Mat {
        kron(&eye(self.lambda_dim()), m)
    }

    pub fn lift_field(&self, f: &EndoField) -> EndoField {
        f.map_linear(|m| self.lift(m))
    }

    /// Twist-level connection on the e block, lifted to `W` (vanishing on ν).
    pub fn connection_from_e(&self, a_e: &FormField) -> ConnectionSpec {
        let nu = self.nu;
        let z = Mat::zeros(nu, nu);
        let a = a_e.map(|x| x.map_linear(|m| self.lift(&block_diag(&[&z, m]))));
        ConnectionSpec::new(a, &self.w.gamma)
    }

    /// Largest entry of `A` touching the ν block.
    pub fn partial_flatness_defect(&self, a: &ConnectionSpec) -> f64 {
        let t = self.nu + self.e_dim;
        let mut p = Mat::zeros(t, t);
        for i in 0..self.nu {
            p[(i, i)] = re(1.0);
        }
        let p = self.lift(&p);
        a.a.comps
            .iter()
            .map(|x| x.lmul_const(&p).max_abs().max(x.rmul_const(&p).max_abs()))
            .fold(0.0, f64::max)
    }
}

/// Mass data and the assembled DYM operator.
#[derive(Debug, Clone)]
pub struct DymOperator {
    pub op: DiracOperatorSpec,
    pub mu_ym: EndoField,
    /// W-level `φ_D` and `m_M`.
    pub phi_d: EndoField,
    pub m_m: Mat,
    pub a_w: ConnectionSpec,
}

/// `D_YM = /∂_𝒜 + i μ_YM` on `E` with
/// `μ_YM = [[μ_D, μ_M], [-μ_M, -μ_D^cc]]`, `μ_M = m_M ⊗ 1₂`.
pub fn dym_op(setup: &DymSetup, a_w: &ConnectionSpec, masses: &crate::graded_modules::MassBlockSpec) -> Result<DymOperator> {
    masses.validate()?;
    if masses.m_d_nu.nrows() != setup.nu || masses.e_dim != setup.e_dim {
        return Err(Error::DimensionMismatch { expected: setup.nu, got: masses.m_d_nu.nrows() });
    }
    if setup.partial_flatness_defect(a_w) > 0.0 {
        return precondition("the connection has to be partially flat: A must vanish on W_ν");
    }
    if !a_w.clifford_flag {
        return precondition("the DYM connection must be a Clifford connection");
    }
    let phi_d = setup.lift_field(&masses.dirac_twist());
    let m_m = setup.lift(&masses.majorana_twist(setup.e_dim));
    let s = &setup.s;
    let mu_d = mu_dirac(s, &phi_d);
    let mu_d_cc = s.conjugate_field(&mu_d)?;
    let mu_m = EndoField::constant(phi_d.n(), phi_d.capacity(), kron(&m_m, &eye(2)));
    let mu_ym = block_fields(&mu_d, &mu_m, &mu_m.scaled(re(-1.0)), &mu_d_cc.scaled(re(-1.0)), s.dim());
    let i2 = eye(2);
    let a_s = a_w.a.map(|x| x.map_linear(|m| kron(m, &i2)));
    let a_e = real_form_connection(s, &a_s)?;
    let conn = ConnectionSpec::new(a_e, &setup.e.gamma);
    let op = DiracOperatorSpec::new(setup.e.clone(), conn, mu_ym.scaled(I))?;
    Ok(DymOperator { op, mu_ym, phi_d, m_m, a_w: a_w.clone() })
}

/// Which field equation a residual refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EquationKind {
    /// `i /∂_A χ = m_D χ`.
    Dirac,
    /// `i /∂_A χ = m_M χ^cc`.
    Majorana,
    /// `i /∂_A χ = φ_D χ + m_M χ^cc` on `W`.
    Dym,
}

/// `‖i /∂_A χ - m_D χ - m_M χ^cc‖` with the terms selected by `kind`.
pub fn equation_residual(
    kind: EquationKind,
    w: &Arc<ModuleDescriptor>,
    a_w: &ConnectionSpec,
    m_d: &EndoField,
    m_m: &Mat,
    chi: &SectionField,
) -> Result<f64> {
    let dirac = DiracOperatorSpec::quantized_connection(w.clone(), a_w.clone())?;
    let mut r = dirac.apply(chi)?.scaled(I);
    if matches!(kind, EquationKind::Dirac | EquationKind::Dym) {
        r = r.sub(&m_d.apply(chi)?);
    }
    if matches!(kind, EquationKind::Majorana | EquationKind::Dym) {
        let cc = dirac.conjugate_section(chi)?;
        r = r.sub(&cc.map_linear(|v| m_m * v));
    }
    Ok(r.l2_norm())
}

/// Right- and left-handed parts `½(1 ± τ_M) χ`.
pub fn chiral_split(w: &ModuleDescriptor, chi: &SectionField) -> (SectionField, SectionField) {
    let t = w.chirality();
    let id = eye(w.dim());
    let pr = (&id + &t) * re(0.5);
    let pl = (&id - &t) * re(0.5);
    (chi.map_linear(|v| &pr * v), chi.map_linear(|v| &pl * v))
}

/// `ψ = (χ, η)` on `S = ²W` (interleaved slots) and the W-level equations.
///
/// `D_D ψ` has `-i(i/∂_A η + φη)` in the first slot and `-i(i/∂_A χ - φχ)` in
/// the second, so `‖D_D ψ‖² = ‖i/∂_A χ - φχ‖² + ‖i/∂_A η + φη‖²`.
#[derive(Debug, Clone, Copy)]
pub struct DoublingResolution {
    pub s_residual: f64,
    pub chi_residual: f64,
    pub eta_residual: f64,
}

/// Splits an interleaved section of `W ⊗ ℂ²` into its two slots.
pub fn split_slots(psi: &SectionField) -> (SectionField, SectionField) {
    let d = psi.modes().values().next().map(|v| v.len() / 2).unwrap_or(0);
    let slot = |off: usize| psi.map_linear(move |v| Vector::from_fn(d, |i, _| v[2 * i + off]));
    (slot(0), slot(1))
}

pub fn doubling_resolution(
    w: &Arc<ModuleDescriptor>,
    s: &Arc<ModuleDescriptor>,
    a_w: &ConnectionSpec,
    phi_d: &EndoField,
    psi: &SectionField,
) -> Result<DoublingResolution> {
    let dd = dirac_yukawa_op(w, s.clone(), a_w, phi_d)?;
    let (chi, eta) = split_slots(psi);
    let zero = Mat::zeros(w.dim(), w.dim());
    Ok(DoublingResolution {
        s_residual: dd.apply(psi)?.l2_norm(),
        chi_residual: equation_residual(EquationKind::Dirac, w, a_w, phi_d, &zero, &chi)?,
        eta_residual: equation_residual(EquationKind::Dirac, w, a_w, &phi_d.scaled(re(-1.0)), &zero, &eta)?,
    })
}

/// Plane-wave solutions `χ = v e^{ik·x} + u e^{-ik·x}` of
/// `i /∂ χ = φ χ + m_M χ^cc` for constant W-level `φ`, `m_M` and the flat
/// connection: null space of the real-linear mode system, by SVD.
pub fn dym_plane_wave_solutions(
    w: &ModuleDescriptor,
    k: &[i32],
    phi: &Mat,
    m_m: &Mat,
    capacity: i32,
) -> Result<Vec<SectionField>> {
    let n = w.n();
    let d = w.dim();
    if k.iter().all(|&x| x == 0) {
        return precondition("plane waves need a nonzero momentum");
    }
    let kc: Vec<C64> = k.iter().map(|&x| re(x as f64)).collect();
    let gk = w.gamma.gamma(&kc)?;
    let cm = w.real_structure()?.clone();
    // i /∂ (v e^{ikx}) = -γ(k) v e^{ikx};  (u e^{-ikx})^cc = C conj(u) e^{ikx}.
    // Mode +k: -γ(k) v - φ v - m_M C conj(u) = 0.
    // Mode -k:  γ(k) u - φ u - m_M C conj(v) = 0.
    let lin_v_plus = -&gk - phi;
    let anti_u_plus = -(m_m * &cm);
    let lin_u_minus = &gk - phi;
    let anti_v_minus = -(m_m * &cm);
    // Real unknowns x = (Re v, Im v, Re u, Im u); L z + M conj(z) as a real map.
    let real_block = |l: &Mat, m: &Mat| -> DMatrix<f64> {
        let mut out = DMatrix::<f64>::zeros(2 * d, 2 * d);
        // (L + M K) acting on a + ib: L(a+ib) + M(a-ib).
        for r in 0..d {
            for cidx in 0..d {
                let p = l[(r, cidx)] + m[(r, cidx)];
                let q = l[(r, cidx)] - m[(r, cidx)];
                // real part of p a + i q b; imaginary part likewise.
                out[(r, cidx)] = p.re;
                out[(r, d + cidx)] = -q.im;
                out[(d + r, cidx)] = p.im;
                out[(d + r, d + cidx)] = q.re;
            }
        }
        out
    };
    let zero = Mat::zeros(d, d);
    let mut sys = DMatrix::<f64>::zeros(4 * d, 4 * d);
    sys.view_mut((0, 0), (2 * d, 2 * d)).copy_from(&real_block(&lin_v_plus, &zero));
    sys.view_mut((0, 2 * d), (2 * d, 2 * d)).copy_from(&real_block(&zero, &anti_u_plus));
    sys.view_mut((2 * d, 0), (2 * d, 2 * d)).copy_from(&real_block(&zero, &anti_v_minus));
    sys.view_mut((2 * d, 2 * d), (2 * d, 2 * d)).copy_from(&real_block(&lin_u_minus, &zero));
    // nalgebra's SVD does not terminate on non-finite input.
    if sys.iter().any(|x| !x.is_finite()) {
        return precondition("non-finite mode system");
    }
    let svd = sys.clone().svd(false, true);
    let vt = svd.v_t.ok_or_else(|| Error::Precondition("SVD failed".into()))?;
    let scale = svd.singular_values.max().max(1.0);
    let mut out = Vec::new();
    for (i, s) in svd.singular_values.iter().enumerate() {
        if *s < 1e-10 * scale {
            let x = vt.row(i);
            let v = Vector::from_fn(d, |r, _| c(x[r], x[d + r]));
            let u = Vector::from_fn(d, |r, _| c(x[2 * d + r], x[3 * d + r]));
            let mut f = SectionField::zero(n, capacity);
            f.insert(k.to_vec(), v)?;
            f.insert(k.iter().map(|a| -a).collect(), u)?;
            out.push(f);
        }
    }
    Ok(out)
}

/// `ε Σ g^{jj} (i k_j)²`, the flat dispersion factor of `/∂²` on `e^{ik·x}`.
pub fn dispersion(sig: &Signature, k: &[i32]) -> f64 {
    -(0..sig.n()).map(|j| sig.eps() * sig.metric(j) * (k[j] as f64).powi(2)).sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graded_modules::{build_twisted_module, TwistData};
    use crate::random::{endo_field, rng_for};

    #[test]
    fn flat_operator_kills_constants() {
        let sig = Signature::new(3, 1, 1).unwrap();
        let m = Arc::new(build_twisted_module(sig, &TwistData::trivial(1)).unwrap());
        let d = DiracOperatorSpec::quantized_connection(m.clone(), ConnectionSpec::flat(4, 2)).unwrap();
        let psi = SectionField::constant(4, 2, Vector::from_element(m.dim(), re(1.0)));
        assert_eq!(d.apply(&psi).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn clifford_connection_has_zero_shift() {
        let sig = Signature::new(2, 0, -1).unwrap();
        let m = Arc::new(build_twisted_module(sig, &TwistData::trivial(1)).unwrap());
        let mut rng = rng_for(1, "unit");
        // Scalar potentials commute with γ, so B = A.
        let a = FormField::one_form((0..2).map(|_| endo_field(&mut rng, 2, 1, 1, 3, 3, 0.5).map_linear(|z| eye(4) * z[(0, 0)])).collect());
        let d = DiracOperatorSpec::quantized_connection(m, ConnectionSpec { a, clifford_flag: true }).unwrap();
        assert!(d.bochner().unwrap().alpha_d.max_abs() < 1e-14);
    }
}

//! Action-level identities: the universal Dirac Lagrangian, its translation
//! invariance, the flat Einstein–Hilbert and Yang–Mills–Higgs identities, the
//! Standard-Model-shaped trace identity of the Pauli map, the π-map identity
//! and the neutrino cosmological constant.
//!
//! Integral traces use `∫ tr(XY) = (2π)^n Σ_k tr(X_k Y_{-k})`. Normalizations:
//! `tr_g F² = Σ_{i,j} g^{ii} g^{jj} tr(F_ij F_ij)` over all ordered pairs and
//! `tr_g (∂μ)² = Σ_j g^{jj} tr((∂_j μ + [𝒜_j, μ])²)`.

use num_rational::Rational64;
use serde::Serialize;

use crate::clifford_fiber::{CliffordGens, Signature};
use crate::dirac_ops::{quantize_form_field, ConnectionSpec, DiracOperatorSpec, DymOperator, DymSetup};
use crate::error::{precondition, Result};
use crate::fourier_fields::{ev_g, EndoField, FormField, SectionField};
use crate::graded_modules::MassBlockSpec;
use crate::linalg::{eye, kron, re, Mat, Vector, C64, I};

/// `∫ L_D`, `L_D = tr_γ(curv(D) - ε ev_g(ω_D²))`, and `∫ tr V_D`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct UniversalAction {
    pub lagrangian: f64,
    pub trace_potential: f64,
    /// Pointwise `max |L_D - tr V_D|`; zero up to `div ξ_D`.
    pub pointwise_gap: f64,
}

pub fn universal_lagrangian(d: &DiracOperatorSpec) -> Result<UniversalAction> {
    let sig = d.sig();
    let dec = d.bochner()?;
    let curv = crate::dirac_ops::curvature_of(&d.dirac_connection(&dec))?;
    let l = quantize_form_field(d.gamma(), &curv)
        .trace()
        .sub(&ev_g(&sig, &dec.omega_d, &dec.omega_d)?.trace().scaled(re(sig.eps())));
    let tv = dec.v_d.trace();
    Ok(UniversalAction {
        lagrangian: l.integrate().re,
        trace_potential: tv.integrate().re,
        pointwise_gap: l.sub(&tv).max_abs(),
    })
}

/// `|∫ L(D + /α) - ∫ L(D)|` and the pointwise gap, for `α` commuting with `γ`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TranslationReport {
    pub integral_residual: f64,
    pub scale: f64,
    pub pointwise_gap: f64,
}

pub fn translation_invariance(d: &DiracOperatorSpec, alpha: &FormField) -> Result<TranslationReport> {
    for a in &alpha.comps {
        if crate::pauli_maps::left_commutator_defect(d.gamma(), a) > 1e-10 {
            return precondition("translations must take values in the Clifford commutant");
        }
    }
    let shifted = d.plus(&crate::dirac_ops::quantize_one_form(d.gamma(), alpha));
    let before = lagrangian_density(d)?;
    let after = lagrangian_density(&shifted)?;
    let i0 = before.integrate().re;
    let i1 = after.integrate().re;
    Ok(TranslationReport {
        integral_residual: (i1 - i0).abs(),
        scale: i0.abs().max(i1.abs()).max(1.0),
        pointwise_gap: after.sub(&before).max_abs(),
    })
}

fn lagrangian_density(d: &DiracOperatorSpec) -> Result<crate::fourier_fields::ScalarField> {
    let sig = d.sig();
    let dec = d.bochner()?;
    let curv = crate::dirac_ops::curvature_of(&d.dirac_connection(&dec))?;
    Ok(quantize_form_field(d.gamma(), &curv)
        .trace()
        .sub(&ev_g(&sig, &dec.omega_d, &dec.omega_d)?.trace().scaled(re(sig.eps()))))
}

/// `max |tr_γ curv(/∂_A)|` and `max |tr δ_γ(F_A)|` on the flat torus.
pub fn eh_flat_identity(d: &DiracOperatorSpec) -> Result<(f64, f64)> {
    if !d.conn.clifford_flag {
        return precondition("the flat Einstein–Hilbert identity needs a Clifford connection");
    }
    let slash = d.principal();
    let curv = slash.curv()?;
    let tr_curv = quantize_form_field(d.gamma(), &curv).trace().max_abs();
    let tr_fa = quantize_form_field(d.gamma(), &d.conn.curvature()?).trace().max_abs();
    Ok((tr_curv, tr_fa))
}

/// `Θ ∧ Θ` as a two-form with constant coefficients.
pub fn theta_wedge_theta(gamma: &CliffordGens, capacity: i32) -> Result<FormField> {
    let theta = theta_form(gamma, capacity);
    crate::fourier_fields::wedge(&theta, &theta)
}

fn theta_form(gamma: &CliffordGens, capacity: i32) -> FormField {
    let th = gamma.canonical_one_form();
    let n = gamma.sig.n();
    FormField::one_form(th.comps.iter().map(|t| EndoField::constant(n, capacity, t.clone())).collect())
}

/// Yang–Mills–Higgs curvature and its checks.
#[derive(Debug, Clone)]
pub struct YmhReport {
    pub h: FormField,
    pub f_ymh: FormField,
    /// `d_A H + H∧H` against `(d_A Φ_H + Φ_H² Θ) ∧ Θ`.
    pub auxiliary_residual: f64,
}

/// `H = Φ_H Θ`, `F_YMH = F_A + d_A H + H ∧ H`.
pub fn ymh_curvature(gamma: &CliffordGens, conn: &ConnectionSpec, phi_h: &EndoField) -> Result<YmhReport> {
    if crate::pauli_maps::left_commutator_defect(gamma, phi_h) > 1e-10 {
        return precondition("Φ_H must commute with the Clifford action");
    }
    let n = gamma.sig.n();
    let cap = phi_h.capacity();
    let theta = theta_form(gamma, cap);
    let h = FormField::one_form(theta.comps.iter().map(|t| phi_h.mul(t)).collect::<Result<Vec<_>>>()?);
    let a = &conn.a;
    // d_A H = dH + A∧H + H∧A.
    let dah = h
        .d()
        .add(&crate::fourier_fields::wedge(a, &h)?)
        .add(&crate::fourier_fields::wedge(&h, a)?);
    let hh = crate::fourier_fields::wedge(&h, &h)?;
    let f_ymh = conn.curvature()?.add(&dah).add(&hh);
    let dphi = conn.covariant_endo(phi_h)?;
    let phi2 = phi_h.mul(phi_h)?;
    let inner = dphi.add(&FormField::one_form(theta.comps.iter().map(|t| phi2.mul(t)).collect::<Result<Vec<_>>>()?));
    let rhs = crate::fourier_fields::wedge(&inner, &theta)?;
    let auxiliary_residual = dah.add(&hh).sub(&rhs).max_abs();
    debug_assert_eq!(f_ymh.n, n);
    Ok(YmhReport { h, f_ymh, auxiliary_residual })
}

/// `tr_g H²`, `tr Φ_H²` and their ratio for constant `Φ_H`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct HiggsLambda {
    pub tr_g_h2: f64,
    pub tr_phi2: f64,
    pub ratio: f64,
}

pub fn higgs_lambda(gamma: &CliffordGens, phi_h: &Mat) -> HiggsLambda {
    let sig = gamma.sig;
    let th = gamma.canonical_one_form();
    let mut acc = C64::new(0.0, 0.0);
    for j in 0..sig.n() {
        let hj = phi_h * &th.comps[j];
        acc += (&hj * &hj).trace() * sig.metric(j);
    }
    let tr_phi2 = (phi_h * phi_h).trace().re;
    HiggsLambda { tr_g_h2: acc.re, tr_phi2, ratio: if tr_phi2 != 0.0 { acc.re / tr_phi2 } else { 0.0 } }
}

/// Regression value of `tr_g H² / tr Φ_H²`, obtained by direct evaluation.
pub fn higgs_lambda_prime(sig: &Signature) -> f64 {
    sig.eps() / sig.n() as f64
}

/// Integrated bosonic terms of a simple-type operator `/∂_𝒜 + iμ`.
#[derive(Debug, Clone, Copy, Serialize, PartialEq)]
pub struct BosonicTerms {
    pub yang_mills: f64,
    pub higgs_kinetic: f64,
    pub quartic: f64,
    pub quadratic: f64,
    pub einstein_hilbert: f64,
}

impl BosonicTerms {
    pub fn as_vec(&self) -> [f64; 4] {
        [self.yang_mills, self.higgs_kinetic, self.quartic, self.quadratic]
    }
}

/// `∫ tr_g F²` with the full ordered double sum.
pub fn tr_g_f2(sig: &Signature, f: &FormField) -> C64 {
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..sig.n() {
        for j in 0..sig.n() {
            if i == j {
                continue;
            }
            let fij = f.component2(i, j);
            acc += fij.integral_trace_product(&fij) * (sig.metric(i) * sig.metric(j));
        }
    }
    acc
}

pub fn bosonic_terms(gamma: &CliffordGens, conn: &ConnectionSpec, mu: &EndoField) -> Result<BosonicTerms> {
    let sig = gamma.sig;
    let f = conn.curvature()?;
    let dmu = conn.covariant_endo(mu)?;
    let mut kin = C64::new(0.0, 0.0);
    for j in 0..sig.n() {
        kin += dmu.comps[j].integral_trace_product(&dmu.comps[j]) * sig.metric(j);
    }
    let mu2 = mu.mul(mu)?;
    let eh = quantize_form_field(gamma, &f).integral_trace();
    Ok(BosonicTerms {
        yang_mills: tr_g_f2(&sig, &f).re,
        higgs_kinetic: kin.re,
        quartic: mu2.integral_trace_product(&mu2).re,
        quadratic: mu2.integral_trace().re,
        einstein_hilbert: eh.re,
    })
}

/// Exact coefficients as rationals.
#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
pub struct Coefficients {
    pub yang_mills: Rational64,
    pub higgs_kinetic: Rational64,
    pub quartic: Rational64,
    pub quadratic: Rational64,
}

impl Coefficients {
    pub fn as_f64(&self) -> [f64; 4] {
        let f = |r: &Rational64| *r.numer() as f64 / *r.denom() as f64;
        [f(&self.yang_mills), f(&self.higgs_kinetic), f(&self.quartic), f(&self.quadratic)]
    }
}

fn nm1_over_n(n: i64) -> Rational64 {
    Rational64::new(n - 1, n)
}

/// Pauli-map identity: `(n-3)`, `-2ε(n-2)((n-1)/n)²`, `-2(n-1)³/n²`, `-2`.
pub fn stm_coefficients(n: i64, eps: i64) -> Coefficients {
    let r = nm1_over_n(n);
    Coefficients {
        yang_mills: Rational64::from_integer(n - 3),
        higgs_kinetic: Rational64::from_integer(-2 * eps * (n - 2)) * r * r,
        quartic: -lambda_a(n),
        quadratic: Rational64::from_integer(-2),
    }
}

/// π-map identity: `-1`, `2ε((n-1)/n)²`, `2((n-1)/n)²`, `-2`.
pub fn pi_coefficients(n: i64, eps: i64) -> Coefficients {
    let r = nm1_over_n(n);
    Coefficients {
        yang_mills: Rational64::from_integer(-1),
        higgs_kinetic: Rational64::from_integer(2 * eps) * r * r,
        quartic: Rational64::from_integer(2) * r * r,
        quadratic: Rational64::from_integer(-2),
    }
}

/// `a = 2(n-1)³/n²`.
pub fn lambda_a(n: i64) -> Rational64 {
    Rational64::new(2 * (n - 1).pow(3), n * n)
}

/// Both sides of the Pauli-map trace identity for a DYM operator.
#[derive(Debug, Clone, Serialize)]
pub struct StmReport {
    pub terms: BosonicTerms,
    pub lhs: f64,
    pub rhs: f64,
    /// `∫ tr({γ^j, μ_YM} {γ^j, μ_YM})` summed with `g^{jj}`.
    pub gamma_mu_anticommutator: f64,
    /// `∫ tr /F_𝒜²` against `-½ ∫ tr_g F²`.
    pub slash_f_square_residual: f64,
    /// `/F` by the Dirac-connection route against the closed form.
    pub curvature_route_residual: f64,
}

/// `-∫ tr_P Φ² + (ε/4) Σ g^{jj} ∫ tr_P({γ^j, Φ}²)` for `P = /∂_𝒜 + iΦ`.
pub fn pauli_lhs(p: &DiracOperatorSpec) -> Result<f64> {
    let sig = p.sig();
    let phi = p.phi.scaled(-I);
    let mut acc = -phi.integral_trace_product(&phi);
    for j in 0..sig.n() {
        let g = &p.gamma().gens[j];
        let ac = phi.lmul_const(g).add(&phi.rmul_const(g));
        acc += ac.integral_trace_product(&ac) * (sig.eps() * sig.metric(j) / 4.0);
    }
    Ok(acc.re)
}

pub fn stm_identity(dym: &DymOperator) -> Result<StmReport> {
    let d = &dym.op;
    let sig = d.sig();
    let n = sig.n() as i64;
    let p_mod = crate::pauli_maps::doubled_module(&d.module)?;
    let p = crate::pauli_maps::pauli_map(d, p_mod)?;
    let terms = bosonic_terms(d.gamma(), &d.conn, &dym.mu_ym)?;
    let lhs = pauli_lhs(&p.op)?;
    let c = stm_coefficients(n, sig.eps() as i64).as_f64();
    let t = terms.as_vec();
    let rhs = (0..4).map(|i| c[i] * t[i]).sum();
    let mut anti = C64::new(0.0, 0.0);
    for j in 0..sig.n() {
        let g = &d.gamma().gens[j];
        let ac = dym.mu_ym.lmul_const(g).add(&dym.mu_ym.rmul_const(g));
        anti += ac.integral_trace_product(&ac) * sig.metric(j);
    }
    let sf_a = quantize_form_field(d.gamma(), &d.conn.curvature()?);
    let sf2 = sf_a.integral_trace_product(&sf_a).re;
    let closed = crate::pauli_maps::simple_type_curvature(d.gamma(), &d.conn, &d.phi)?;
    let direct = crate::pauli_maps::relative_curvature(d)?.slash_f;
    Ok(StmReport {
        terms,
        lhs,
        rhs,
        gamma_mu_anticommutator: anti.norm(),
        slash_f_square_residual: (sf2 + 0.5 * terms.yang_mills).abs(),
        curvature_route_residual: closed.sub(&direct).max_abs(),
    })
}

/// Least-squares coefficients of `y ≈ Σ c_i x_i` with the worst residual.
pub fn refit(rows: &[[f64; 4]], y: &[f64]) -> Result<([f64; 4], f64)> {
    if rows.len() < 4 || rows.len() != y.len() {
        return precondition("refit needs at least four samples and matching targets");
    }
    let a = nalgebra::DMatrix::<f64>::from_fn(rows.len(), 4, |i, j| rows[i][j]);
    let b = nalgebra::DVector::<f64>::from_column_slice(y);
    let x = a.clone().svd(true, true).solve(&b, 1e-14).map_err(|e| crate::error::Error::Precondition(e.into()))?;
    let r = (&a * &x - &b).amax();
    Ok(([x[0], x[1], x[2], x[3]], r))
}

/// `π_D(D_YM)`, the bosonic terms and `∫ tr_P Φ²` without the decomposition
/// of the image; enough for coefficient refits.
pub fn pi_trace_sample(dym: &DymOperator) -> Result<(crate::pauli_maps::PiOperator, BosonicTerms, f64)> {
    let d = &dym.op;
    let p_mod = crate::pauli_maps::doubled_module(&d.module)?;
    let pi = crate::pauli_maps::pi_map(d, p_mod)?;
    let terms = bosonic_terms(d.gamma(), &d.conn, &dym.mu_ym)?;
    let tr_phi2 = pi.op.phi.integral_trace_product(&pi.op.phi).re;
    Ok((pi, terms, tr_phi2))
}

/// π-map identity data for a DYM operator.
#[derive(Debug, Clone, Serialize)]
pub struct PiReport {
    pub terms: BosonicTerms,
    /// `∫ tr_P Φ²` for the π image `/∂_𝒜 + iΦ`.
    pub tr_phi2: f64,
    /// Closed form with the π coefficients.
    pub closed_form: f64,
    /// `∫ tr V` of the π image (universal action with `div ξ` integrated away).
    pub universal_action: f64,
    /// `∫ tr_γ curv(/∂_𝒜) + ∫ tr_P Φ²`.
    pub i_dym: f64,
    pub xi_max: f64,
    /// `ev_g(ω²) + (ε/n) Φ_D²`.
    pub omega_residual: f64,
    pub simple_type_defect: f64,
    pub slash_f_op_left_defect: f64,
}

pub fn pi_identity(dym: &DymOperator) -> Result<PiReport> {
    let d = &dym.op;
    let sig = d.sig();
    let (pi, terms, tr_phi2) = pi_trace_sample(dym)?;
    let c = pi_coefficients(sig.n() as i64, sig.eps() as i64).as_f64();
    let t = terms.as_vec();
    let closed_form = (0..4).map(|i| c[i] * t[i]).sum();
    let dec = pi.op.bochner()?;
    let xi_max = dec.xi_d.iter().map(|x| x.max_abs()).fold(0.0, f64::max);
    let ev = ev_g(&sig, &dec.omega_d, &dec.omega_d)?;
    let pd2 = dec.phi_d.mul(&dec.phi_d)?;
    let omega_residual = ev.add(&pd2.scaled(re(sig.eps() / sig.n() as f64))).max_abs();
    let universal_action = dec.v_d.integral_trace().re;
    Ok(PiReport {
        terms,
        tr_phi2,
        closed_form,
        universal_action,
        // tr_P of the doubled /∂_𝒜 curvature is twice the E trace.
        i_dym: 2.0 * terms.einstein_hilbert + tr_phi2,
        xi_max,
        omega_residual,
        simple_type_defect: pi.op.simple_type_defect()?,
        slash_f_op_left_defect: crate::pauli_maps::left_commutator_defect(d.gamma(), &pi.slash_f_op),
    })
}

/// Neutrino cosmological constant by both routes.
#[derive(Debug, Clone, Serialize)]
pub struct CosmologicalConstant {
    pub a: Rational64,
    /// Closed form `a(tr m_D⁴ + tr m_M⁴) - tr m_D² - tr m_M² - 2a tr(m_D m_M)²`.
    pub lambda_dm: f64,
    /// `(a tr μ⁴ + tr μ²) / (4 dim Λ)` on the ν part of the assembled `μ_YM`.
    pub block_trace: f64,
}

/// Closed form only.
pub fn lambda_dm_formula(m_d: &Mat, m_m: &Mat, n: i64) -> f64 {
    let a = lambda_a(n);
    let a = *a.numer() as f64 / *a.denom() as f64;
    let tr = |m: &Mat| m.trace().re;
    let d2 = m_d * m_d;
    let mm2 = m_m * m_m;
    let dm = m_d * m_m;
    a * (tr(&(&d2 * &d2)) + tr(&(&mm2 * &mm2))) - tr(&d2) - tr(&mm2) - 2.0 * a * tr(&(&dm * &dm))
}

/// Block-trace route on a ν-only setup: constant masses, flat connection.
pub fn lambda_dm(setup: &DymSetup, m_d: &Mat, m_m: &Mat) -> Result<CosmologicalConstant> {
    if m_d.iter().chain(m_m.iter()).any(|z| z.im != 0.0) {
        return precondition("neutrino masses must be real");
    }
    if setup.e_dim != 0 && setup.nu == 0 {
        return precondition("the split has no neutrino block");
    }
    let n = setup.w.n();
    let masses = MassBlockSpec {
        m_d_nu: m_d.clone(),
        m_m_nu: m_m.clone(),
        phi_e: EndoField::zero(n, 0),
        e_dim: setup.e_dim,
    };
    let conn = ConnectionSpec::flat(n, 0);
    let dym = crate::dirac_ops::dym_op(setup, &conn, &masses)?;
    let mu = dym.mu_ym.zero_mode().cloned().unwrap_or_else(|| Mat::zeros(setup.e.dim(), setup.e.dim()));
    let a = lambda_a(n as i64);
    let af = *a.numer() as f64 / *a.denom() as f64;
    let mu2 = &mu * &mu;
    let raw = af * (&mu2 * &mu2).trace().re + mu2.trace().re;
    Ok(CosmologicalConstant {
        a,
        lambda_dm: lambda_dm_formula(m_d, m_m, n as i64),
        block_trace: raw / (4.0 * setup.lambda_dim() as f64),
    })
}

/// Block-trace value in closed form: `a tr((m_D² + m_M²)² + {m_D, m_M}²) - tr m_D² - tr m_M²`.
pub fn lambda_dm_block_closed_form(m_d: &Mat, m_m: &Mat, n: i64) -> f64 {
    let a = lambda_a(n);
    let a = *a.numer() as f64 / *a.denom() as f64;
    let s = m_d * m_d + m_m * m_m;
    let ac = m_d * m_m + m_m * m_d;
    a * (&s * &s + &ac * &ac).trace().re - (m_d * m_d).trace().re - (m_m * m_m).trace().re
}

/// `⟨⟨Ψ, D_YM Ψ⟩⟩` for `Ψ = (u, u^cc)`, `u = χ ⊗ e₁`, assembled on `E`
/// and as the four-term block sum
/// `½(⟨u, (/∂_A + iμ_D)u⟩ + ⟨u^cc, ((/∂_A)^cc - iμ_D^cc)u^cc⟩ + ⟨u, iμ_M u^cc⟩ - ⟨u^cc, iμ_M u⟩)`.
pub fn dym_pairing_terms(dym: &DymOperator, setup: &DymSetup, chi: &SectionField) -> Result<(C64, C64)> {
    let s_mod = &setup.s;
    let d_s = s_mod.dim();
    let cs = s_mod.real_structure()?.clone();
    let jmap = |x: &SectionField| x.conj_entries().map_linear(|v| &cs * v);
    // W ⊗ ℂ² is interleaved: the e₁ slot of fiber index i sits at 2i.
    let u = chi.map_linear(|v| Vector::from_fn(d_s, |r, _| if r % 2 == 0 { v[r / 2] } else { re(0.0) }));
    let ucc = jmap(&u);
    let psi = u.map_linear(|v| Vector::from_fn(2 * d_s, |r, _| if r < d_s { v[r] } else { re(0.0) })).add(
        &ucc.map_linear(|v| Vector::from_fn(2 * d_s, |r, _| if r >= d_s { v[r - d_s] } else { re(0.0) })),
    );
    let assembled = crate::pauli_maps::fermionic_action(&dym.op, &psi)?;

    let one = eye(2);
    let a_s = dym.a_w.a.map(|x| x.map_linear(|m| kron(m, &one)));
    let dirac_s = DiracOperatorSpec::quantized_connection(s_mod.clone(), ConnectionSpec::new(a_s, &s_mod.gamma))?;
    let mu_d = crate::dirac_ops::mu_dirac(s_mod, &dym.phi_d);
    let mu_d_cc = s_mod.conjugate_field(&mu_d)?;
    let mu_m = kron(&dym.m_m, &one);
    let g = &s_mod.gram;
    let t1 = u.l2_pairing(&dirac_s.apply(&u)?.add(&mu_d.apply(&u)?.scaled(I)), g)?;
    let dirac_cc_u = jmap(&dirac_s.apply(&jmap(&ucc))?);
    let t2 = ucc.l2_pairing(&dirac_cc_u.sub(&mu_d_cc.apply(&ucc)?.scaled(I)), g)?;
    let t3 = u.l2_pairing(&ucc.map_linear(|v| &mu_m * v).scaled(I), g)?;
    let t4 = ucc.l2_pairing(&u.map_linear(|v| &mu_m * v).scaled(-I), g)?;
    Ok((assembled, (t1 + t2 + t3 + t4) * 0.5))
}

//! Real, bi-graded Hermitian Clifford module fibers.
//!
//! A real structure is stored as a matrix `C` with `J z = C conj(z)`; since
//! `J² = id` forces `C conj(C) = 1`, conjugating an endomorphism is
//! `B^cc = C conj(B) conj(C)`. Every constructor detects its sign flags and
//! re-verifies all axioms before returning, so a descriptor in hand is a
//! certificate.

use serde::{Deserialize, Serialize};

use crate::clifford_fiber::{grade, Chevalley, CliffordGens, Signature};
use crate::error::{precondition, Error, Result};
use crate::fourier_fields::{matrix_from_rows, matrix_to_rows, EndoField};
use crate::linalg::{block_diag, conj, conj_vec, eps2, eye, kron, max_abs, re, tau2, Mat, Vector, C64};

/// Residual accepted for exact matrix axioms.
pub const AXIOM_TOL: f64 = 1e-12;

/// Choice of real structure on the exterior algebra.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LambdaReal {
    /// Blade-wise complex conjugation: commutes with `γ_Ch`.
    Conj,
    /// `(-1)^grade` composed with conjugation: anticommutes with `γ_Ch`.
    ParityConj,
}

impl LambdaReal {
    /// The library default: anticommutes with `γ_Ch` and, whenever the
    /// chirality prefactor is `i`, with `τ_M` as well.
    pub fn default_for(_sig: &Signature) -> Self {
        LambdaReal::ParityConj
    }

    pub fn matrix(self, ch: &Chevalley) -> Mat {
        match self {
            LambdaReal::Conj => eye(ch.dim()),
            LambdaReal::ParityConj => ch.parity(),
        }
    }
}

/// Twist fiber `ℂ^w` with its grading and optional conjugation matrix.
#[derive(Debug, Clone)]
pub struct TwistData {
    pub tau: Mat,
    pub c: Option<Mat>,
}

impl TwistData {
    /// Trivially graded twist with standard conjugation.
    pub fn trivial(w: usize) -> Self {
        TwistData { tau: eye(w), c: Some(eye(w)) }
    }

    pub fn graded(signs: &[f64]) -> Self {
        let w = signs.len();
        let mut tau = Mat::zeros(w, w);
        for (i, s) in signs.iter().enumerate() {
            tau[(i, i)] = re(*s);
        }
        TwistData { tau, c: Some(eye(w)) }
    }

    pub fn w(&self) -> usize {
        self.tau.nrows()
    }

    /// Sign `s` with `C conj(C) = s·1`, if the conjugation is present.
    pub fn conjugation_square_sign(&self) -> Option<f64> {
        let c = self.c.as_ref()?;
        let sq = c * conj(c);
        let w = self.w();
        if max_abs(&(&sq - eye(w))) < AXIOM_TOL {
            Some(1.0)
        } else if max_abs(&(&sq + eye(w))) < AXIOM_TOL {
            Some(-1.0)
        } else {
            None
        }
    }
}

/// Recorded signs of the real-structure axioms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignFlags {
    /// `τ γ = s γ τ`; always `-1`.
    pub tau_gamma: i8,
    /// `J γ = s γ J`.
    pub j_gamma: i8,
    /// `J τ = s τ J`.
    pub j_tau: i8,
    /// `⟨Jz, Jw⟩ = s ⟨w, z⟩`.
    pub form: i8,
    /// `J τ_M = -τ_M J`.
    pub majorana: bool,
}

/// One axiom and its worst residual.
#[derive(Debug, Clone, Serialize)]
pub struct AxiomCheck {
    pub name: &'static str,
    pub residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct AxiomReport {
    pub checks: Vec<AxiomCheck>,
}

impl AxiomReport {
    pub fn max_residual(&self) -> f64 {
        self.checks.iter().map(|c| c.residual).fold(0.0, f64::max)
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.max_residual() < tol
    }
}

#[derive(Debug, Clone)]
pub struct ModuleDescriptor {
    pub name: String,
    pub sig: Signature,
    pub gamma: CliffordGens,
    pub gamma_op: Option<CliffordGens>,
    pub tau: Mat,
    pub j: Option<Mat>,
    pub gram: Mat,
    pub flags: Option<SignFlags>,
}

fn sign_of(residual_plus: f64, residual_minus: f64) -> Option<i8> {
    if residual_plus < AXIOM_TOL {
        Some(1)
    } else if residual_minus < AXIOM_TOL {
        Some(-1)
    } else {
        None
    }
}

impl ModuleDescriptor {
    /// Assemble a descriptor, detect its sign flags and verify every axiom.
    pub fn from_parts(
        name: impl Into<String>,
        gamma: CliffordGens,
        gamma_op: Option<CliffordGens>,
        tau: Mat,
        j: Option<Mat>,
        gram: Mat,
    ) -> Result<Self> {
        let sig = gamma.sig;
        let mut m = ModuleDescriptor { name: name.into(), sig, gamma, gamma_op, tau, j, gram, flags: None };
        let d = m.dim();
        for x in [&m.tau, &m.gram] {
            if x.nrows() != d || x.ncols() != d {
                return Err(Error::DimensionMismatch { expected: d, got: x.nrows() });
            }
        }
        if m.j.is_some() {
            m.flags = Some(m.detect_flags()?);
        }
        let report = m.verify();
        if !report.passes(AXIOM_TOL) {
            let worst = report.checks.iter().max_by(|a, b| a.residual.total_cmp(&b.residual)).unwrap();
            return precondition(format!("module {} violates {} (residual {:e})", m.name, worst.name, worst.residual));
        }
        Ok(m)
    }

    fn detect_flags(&self) -> Result<SignFlags> {
        let g0 = &self.gamma.gens[0];
        let cg = self.conjugate_endo(g0)?;
        let j_gamma = sign_of(max_abs(&(&cg - g0)), max_abs(&(&cg + g0)))
            .ok_or_else(|| Error::Precondition("J neither commutes nor anticommutes with γ".into()))?;
        let ct = self.conjugate_endo(&self.tau)?;
        let j_tau = sign_of(max_abs(&(&ct - &self.tau)), max_abs(&(&ct + &self.tau)))
            .ok_or_else(|| Error::Precondition("J neither commutes nor anticommutes with τ".into()))?;
        let c = self.j.as_ref().unwrap();
        let lhs = c.adjoint() * &self.gram * c;
        let gt = self.gram.transpose();
        let form = sign_of(max_abs(&(&lhs - &gt)), max_abs(&(&lhs + &gt)))
            .ok_or_else(|| Error::Precondition("J is not compatible with the Hermitian form".into()))?;
        let chi = self.gamma.chirality();
        let cchi = self.conjugate_endo(&chi)?;
        let majorana = max_abs(&(&cchi + &chi)) < AXIOM_TOL;
        Ok(SignFlags { tau_gamma: -1, j_gamma, j_tau, form, majorana })
    }

    pub fn dim(&self) -> usize {
        self.gamma.dim()
    }

    pub fn n(&self) -> usize {
        self.sig.n()
    }

    pub fn real_structure(&self) -> Result<&Mat> {
        self.j.as_ref().ok_or(Error::MissingRealStructure)
    }

    pub fn flags(&self) -> Result<SignFlags> {
        self.flags.ok_or(Error::MissingRealStructure)
    }

    pub fn opposite(&self) -> Result<&CliffordGens> {
        self.gamma_op.as_ref().ok_or(Error::MissingOppositeAction)
    }

    /// Chirality `τ_M` lifted to this fiber through the Clifford action.
    pub fn chirality(&self) -> Mat {
        self.gamma.chirality()
    }

    pub fn is_majorana(&self) -> bool {
        self.flags.map(|f| f.majorana).unwrap_or(false)
    }

    /// `B^cc = J ∘ B ∘ J`.
    pub fn conjugate_endo(&self, b: &Mat) -> Result<Mat> {
        let c = self.real_structure()?;
        Ok(c * conj(b) * conj(c))
    }

    /// `J z`.
    pub fn conjugate_vec(&self, z: &Vector) -> Result<Vector> {
        Ok(self.real_structure()? * conj_vec(z))
    }

    /// Field version of `B ↦ B^cc`, mode by mode (mode `k` goes to `-k`).
    pub fn conjugate_field(&self, f: &EndoField) -> Result<EndoField> {
        let c = self.real_structure()?.clone();
        let cb = conj(&c);
        Ok(f.conj_entries().map_linear(|m| &c * m * &cb))
    }

    /// `⟨z, w⟩ = z† G w`.
    pub fn pairing(&self, z: &Vector, w: &Vector) -> C64 {
        (z.adjoint() * &self.gram * w)[(0, 0)]
    }

    pub fn is_real_endo(&self, b: &Mat, tol: f64) -> Result<bool> {
        Ok(max_abs(&(self.conjugate_endo(b)? - b)) < tol)
    }

    /// Full axiom suite with the recorded flags.
    pub fn verify(&self) -> AxiomReport {
        let d = self.dim();
        let id = eye(d);
        let mut checks = vec![
            AxiomCheck { name: "clifford relation", residual: self.gamma.clifford_defect() },
            AxiomCheck { name: "tau squared", residual: max_abs(&(&self.tau * &self.tau - &id)) },
        ];
        let mut tg: f64 = 0.0;
        for g in &self.gamma.gens {
            tg = tg.max(max_abs(&(&self.tau * g + g * &self.tau)));
        }
        checks.push(AxiomCheck { name: "tau anticommutes with gamma", residual: tg });
        checks.push(AxiomCheck { name: "hermitian form", residual: max_abs(&(self.gram.adjoint() - &self.gram)) });
        if let Some(op) = &self.gamma_op {
            let mut cm: f64 = 0.0;
            for a in &op.gens {
                for b in &self.gamma.gens {
                    cm = cm.max(max_abs(&(a * b - b * a)));
                }
            }
            checks.push(AxiomCheck { name: "opposite clifford relation", residual: op.clifford_defect() });
            checks.push(AxiomCheck { name: "opposite action commutes", residual: cm });
        }
        if let (Some(c), Some(f)) = (&self.j, &self.flags) {
            checks.push(AxiomCheck { name: "J squared", residual: max_abs(&(c * conj(c) - &id)) });
            let mut jg: f64 = 0.0;
            for g in &self.gamma.gens {
                let cg = c * conj(g) * conj(c);
                jg = jg.max(max_abs(&(cg - g * re(f.j_gamma as f64))));
            }
            checks.push(AxiomCheck { name: "J versus gamma", residual: jg });
            let ct = c * conj(&self.tau) * conj(c);
            checks.push(AxiomCheck { name: "J versus tau", residual: max_abs(&(ct - &self.tau * re(f.j_tau as f64))) });
            let lhs = c.adjoint() * &self.gram * c;
            checks.push(AxiomCheck {
                name: "J versus form",
                residual: max_abs(&(lhs - self.gram.transpose() * re(f.form as f64))),
            });
        }
        AxiomReport { checks }
    }
}

/// Induced Hermitian form `Π_{i∈I} g^{ii}` on blades.
pub fn lambda_gram(ch: &Chevalley) -> Mat {
    let d = ch.dim();
    let mut g = Mat::zeros(d, d);
    for (i, &b) in ch.basis.blades().iter().enumerate() {
        let mut s = 1.0;
        for k in 0..ch.sig.n() {
            if b & (1 << k) != 0 {
                s *= ch.sig.metric(k);
            }
        }
        g[(i, i)] = re(s);
    }
    debug_assert!(ch.basis.blades().iter().all(|&b| grade(b) <= ch.sig.n()));
    g
}

fn lift(gens: &CliffordGens, f: impl Fn(&Mat) -> Mat) -> CliffordGens {
    CliffordGens { sig: gens.sig, gens: gens.gens.iter().map(f).collect() }
}

/// `Λ ⊗ ℂ^w` with `γ = γ_Ch ⊗ 1`, `τ = τ_M ⊗ τ_E` and `J = (C_Λ ⊗ C_E) ∘ conj`.
pub fn build_twisted_module(sig: Signature, twist: &TwistData) -> Result<ModuleDescriptor> {
    build_twisted_module_with(sig, twist, LambdaReal::default_for(&sig))
}

pub fn build_twisted_module_with(sig: Signature, twist: &TwistData, lreal: LambdaReal) -> Result<ModuleDescriptor> {
    let w = twist.w();
    if w == 0 {
        return precondition("twist dimension must be at least 1");
    }
    if max_abs(&(&twist.tau * &twist.tau - eye(w))) > AXIOM_TOL {
        return precondition("twist grading is not an involution");
    }
    let ch = Chevalley::new(sig);
    let iw = eye(w);
    let gamma = lift(&ch.left, |g| kron(g, &iw));
    let gamma_op = lift(&ch.right, |g| kron(g, &iw));
    let tau = kron(&ch.chirality(), &twist.tau);
    let j = match &twist.c {
        Some(c) => {
            if twist.conjugation_square_sign() != Some(1.0) {
                return precondition("twist conjugation must square to the identity");
            }
            Some(kron(&lreal.matrix(&ch), c))
        }
        None => None,
    };
    let gram = kron(&lambda_gram(&ch), &iw);
    ModuleDescriptor::from_parts(format!("Λ⊗ℂ^{w}"), gamma, Some(gamma_op), tau, j, gram)
}

/// Pauli doubling `P = ²E` in block ordering `E ⊕ E`: `1₂ ⊗ γ`, `τ₂ ⊗ τ`,
/// `ε₂ ⊗ J`, form `½(⟨,⟩ + ⟨,⟩)`.
pub fn double(m: &ModuleDescriptor) -> Result<ModuleDescriptor> {
    let c = m.real_structure()?;
    let one = eye(2);
    let gamma = lift(&m.gamma, |g| kron(&one, g));
    let gamma_op = m.gamma_op.as_ref().map(|op| lift(op, |g| kron(&one, g)));
    let out = ModuleDescriptor::from_parts(
        format!("²({})", m.name),
        gamma,
        gamma_op,
        kron(&tau2(), &m.tau),
        Some(kron(&eps2(), c)),
        kron(&one, &m.gram) * re(0.5),
    )?;
    debug_assert_eq!(out.flags.unwrap().j_tau, -m.flags.unwrap().j_tau);
    Ok(out)
}

/// Dirac module `S = ²W` of a Majorana module: `τ_S = 1 ⊗ τ₂`,
/// `γ_S = γ_W ⊗ ε₂`, `J_S = J_W ⊗ ε₂`, form `⟨u₁,v₂⟩ ± ⟨v₁,u₂⟩`.
pub fn build_dirac_module(w: &ModuleDescriptor) -> Result<ModuleDescriptor> {
    let c = w.real_structure()?;
    if !w.is_majorana() {
        return precondition("Dirac modules require a Majorana module (J must anticommute with τ_M)");
    }
    let f = w.flags()?;
    let e = eps2();
    let gamma = lift(&w.gamma, |g| kron(g, &e));
    let gamma_op = w.gamma_op.as_ref().map(|op| lift(op, |g| kron(g, &e)));
    let pair = crate::linalg::mat2(0.0, 1.0, f.form as f64, 0.0);
    ModuleDescriptor::from_parts(
        format!("Dirac({})", w.name),
        gamma,
        gamma_op,
        kron(&eye(w.dim()), &tau2()),
        Some(kron(c, &e)),
        kron(&w.gram, &pair),
    )
}

/// `E = ²S` carrying real forms, in block ordering `S ⊕ S`:
/// `γ_E = γ_S ⊕ γ_S^cc`, `τ_E = τ_S ⊕ -τ_S`, `J_E` swaps the blocks.
pub fn real_double(s: &ModuleDescriptor) -> Result<ModuleDescriptor> {
    let c = s.real_structure()?;
    let mut gens = Vec::with_capacity(s.n());
    for g in &s.gamma.gens {
        gens.push(block_diag(&[g, &s.conjugate_endo(g)?]));
    }
    let gamma = CliffordGens::new(s.sig, gens)?;
    let gamma_op = match &s.gamma_op {
        Some(op) => {
            let mut gens = Vec::with_capacity(s.n());
            for g in &op.gens {
                gens.push(block_diag(&[g, &s.conjugate_endo(g)?]));
            }
            Some(CliffordGens::new(s.sig, gens)?)
        }
        None => None,
    };
    ModuleDescriptor::from_parts(
        format!("²({})", s.name),
        gamma,
        gamma_op,
        kron(&tau2(), &s.tau),
        Some(kron(&eps2(), c)),
        block_diag(&[&s.gram, &s.gram]) * re(0.5),
    )
}

/// `²ψ = (ψ, ψ)`.
pub fn diagonal_embed(psi: &Vector) -> Vector {
    let d = psi.len();
    Vector::from_fn(2 * d, |i, _| psi[i % d])
}

/// Whether `Ψ = (z, z)` to the given tolerance.
pub fn pauli_membership(psi: &Vector, tol: f64) -> bool {
    let d = psi.len() / 2;
    psi.len() % 2 == 0 && (0..d).all(|i| (psi[i] - psi[i + d]).norm() <= tol)
}

/// Dimensions of the four twist blocks of the Standard-Model-shaped module.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StmDims {
    pub v_r: usize,
    pub v_l: usize,
    pub e_r: usize,
    pub e_l: usize,
}

impl StmDims {
    pub fn nu(&self) -> usize {
        self.v_r + self.v_l
    }

    pub fn e(&self) -> usize {
        self.e_r + self.e_l
    }

    pub fn twist(&self) -> usize {
        self.nu() + self.e()
    }
}

/// Yukawa coupling matrices (generation space `ℂ^N`).
#[derive(Debug, Clone)]
pub struct YukawaCouplings {
    pub g_q_prime: Mat,
    pub g_q: Mat,
    pub g_l: Mat,
}

impl YukawaCouplings {
    pub fn zero(generations: usize) -> Self {
        let z = Mat::zeros(generations, generations);
        YukawaCouplings { g_q_prime: z.clone(), g_q: z.clone(), g_l: z }
    }

    pub fn generations(&self) -> usize {
        self.g_l.nrows()
    }
}

/// Majorana module `W = Λ ⊗ (V_R ⊕ V_L ⊕ E_R ⊕ E_L)` graded by `τ_M` and the
/// inner involutions, with the Yukawa mapping on the charged sector.
#[derive(Debug, Clone)]
pub struct StmModule {
    pub module: ModuleDescriptor,
    pub dims: StmDims,
    pub yukawa: YukawaCouplings,
}

/// Mass data of the split `W = W_ν ⊕ W_e`, as twist-level matrices; they act
/// on `W` as `1_Λ ⊗ m`, hence commute with `γ`.
#[derive(Debug, Clone)]
pub struct MassBlockSpec {
    pub m_d_nu: Mat,
    pub m_m_nu: Mat,
    pub phi_e: EndoField,
    pub e_dim: usize,
}

impl MassBlockSpec {
    /// Constant-ness and reality of the neutrino blocks.
    pub fn validate(&self) -> Result<()> {
        for (name, m) in [("m_D,ν", &self.m_d_nu), ("m_M,ν", &self.m_m_nu)] {
            if m.iter().any(|z| z.im != 0.0) {
                return precondition(format!("{name} must be real"));
            }
        }
        if let Some(d) = self.phi_e.dim() {
            if d != self.e_dim {
                return Err(Error::DimensionMismatch { expected: self.e_dim, got: d });
            }
        }
        if self.m_d_nu.shape() != self.m_m_nu.shape() {
            return Err(Error::DimensionMismatch { expected: self.m_d_nu.nrows(), got: self.m_m_nu.nrows() });
        }
        Ok(())
    }

    fn nu(&self) -> usize {
        self.m_d_nu.nrows()
    }

    /// Twist-level `m_M = diag(m_M,ν, 0)`.
    pub fn majorana_twist(&self, e: usize) -> Mat {
        block_diag(&[&self.m_m_nu, &Mat::zeros(e, e)])
    }

    /// Twist-level field `φ_D = diag(m_D,ν, φ_e)`.
    pub fn dirac_twist(&self) -> EndoField {
        let (nu, e) = (self.nu(), self.e_dim);
        self.phi_e.map_linear(|p| block_diag(&[&Mat::zeros(nu, nu), p])).add(&EndoField::constant(
            self.phi_e.n(),
            self.phi_e.capacity(),
            block_diag(&[&self.m_d_nu, &Mat::zeros(e, e)]),
        ))
    }
}

pub fn build_stm_module(sig: Signature, dims: StmDims, yukawa: YukawaCouplings) -> Result<StmModule> {
    if sig.n() != 4 {
        return precondition("the Standard-Model module lives in dimension four");
    }
    let ng = yukawa.generations();
    for g in [&yukawa.g_q_prime, &yukawa.g_q, &yukawa.g_l] {
        if g.nrows() != ng || g.ncols() != ng {
            return Err(Error::DimensionMismatch { expected: ng, got: g.nrows() });
        }
    }
    if dims.e_r != 3 * ng || dims.e_l != 4 * ng {
        return precondition(format!(
            "charged twist must be E_R = ℂ^{{3N}} (d, u, e) and E_L = ℂ^{{4N}} (Q, L); got {}/{} for N = {ng}",
            dims.e_r, dims.e_l
        ));
    }
    if dims.twist() == 0 {
        return precondition("empty twist");
    }
    let mut signs = Vec::new();
    signs.extend(std::iter::repeat(1.0).take(dims.v_r));
    signs.extend(std::iter::repeat(-1.0).take(dims.v_l));
    signs.extend(std::iter::repeat(1.0).take(dims.e_r));
    signs.extend(std::iter::repeat(-1.0).take(dims.e_l));
    let twist = TwistData::graded(&signs);
    let mut module = build_twisted_module_with(sig, &twist, LambdaReal::ParityConj)?;
    module.name = "W_ν⊕W_e".into();
    if !module.is_majorana() {
        return precondition("signature admits no Majorana structure of this shape");
    }
    Ok(StmModule { module, dims, yukawa })
}

impl StmModule {
    /// `G_Y(φ) : E_R → E_L` for a Higgs doublet `φ ∈ ℂ²`, with
    /// `φ^cc = I₂ conj(φ)`.
    pub fn yukawa_map(&self, phi: [C64; 2]) -> Mat {
        let ng = self.yukawa.generations();
        let phi_v = Mat::from_column_slice(2, 1, &phi);
        let phi_cc = crate::linalg::i2() * conj(&phi_v);
        let mut out = Mat::zeros(4 * ng, 3 * ng);
        // Quark doublet rows 0..2N: d_R ↦ g'_q d_R ⊗ φ, u_R ↦ -g_q u_R ⊗ φ^cc.
        out.view_mut((0, 0), (2 * ng, ng)).copy_from(&kron(&self.yukawa.g_q_prime, &phi_v));
        out.view_mut((0, ng), (2 * ng, ng)).copy_from(&(kron(&self.yukawa.g_q, &phi_cc) * re(-1.0)));
        // Lepton doublet rows 2N..4N: e_R ↦ g_l e_R ⊗ φ.
        out.view_mut((2 * ng, 2 * ng), (2 * ng, ng)).copy_from(&kron(&self.yukawa.g_l, &phi_v));
        out
    }

    /// Twist-level `φ_e = [[0, φ_RL], [φ_LR, 0]]` on `E_R ⊕ E_L`, with
    /// `φ_RL = φ_LR†`.
    pub fn phi_e(&self, phi: [C64; 2]) -> Mat {
        let lr = self.yukawa_map(phi);
        let (er, el) = (self.dims.e_r, self.dims.e_l);
        let mut out = Mat::zeros(er + el, er + el);
        out.view_mut((er, 0), (el, er)).copy_from(&lr);
        out.view_mut((0, er), (er, el)).copy_from(&lr.adjoint());
        out
    }

    /// Embed a twist-level matrix into `W` as `1_Λ ⊗ block_diag(0_ν, m_e)`.
    pub fn lift_e(&self, m_e: &Mat) -> Mat {
        let nu = self.dims.nu();
        kron(&eye(1 << self.module.n()), &block_diag(&[&Mat::zeros(nu, nu), m_e]))
    }

    pub fn lift_nu(&self, m_nu: &Mat) -> Mat {
        let e = self.dims.e();
        kron(&eye(1 << self.module.n()), &block_diag(&[m_nu, &Mat::zeros(e, e)]))
    }

    /// Projector onto `{τ_M = chi, τ_V = v}` inside `W_ν`.
    pub fn nu_projector(&self, chi: f64, v: f64) -> Mat {
        let d = self.module.dim();
        let id = eye(d);
        let p_chi = (&id + self.module.chirality() * re(chi)) * re(0.5);
        let mut sel = Mat::zeros(self.dims.twist(), self.dims.twist());
        let start = if v > 0.0 { 0 } else { self.dims.v_r };
        let len = if v > 0.0 { self.dims.v_r } else { self.dims.v_l };
        for i in start..start + len {
            sel[(i, i)] = re(1.0);
        }
        p_chi * kron(&eye(1 << self.module.n()), &sel)
    }
}

/// JSON description of a module: dimensions, flags and row-major matrices of
/// `[re, im]` pairs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModuleJson {
    pub name: String,
    pub p: usize,
    pub q: usize,
    pub epsilon: i8,
    pub dim: usize,
    pub flags: Option<SignFlags>,
    pub gamma: Vec<Vec<Vec<[f64; 2]>>>,
    pub gamma_op: Option<Vec<Vec<Vec<[f64; 2]>>>>,
    pub tau: Vec<Vec<[f64; 2]>>,
    pub j: Option<Vec<Vec<[f64; 2]>>>,
    pub gram: Vec<Vec<[f64; 2]>>,
}

impl ModuleDescriptor {
    pub fn to_json(&self) -> ModuleJson {
        ModuleJson {
            name: self.name.clone(),
            p: self.sig.p,
            q: self.sig.q,
            epsilon: self.sig.epsilon,
            dim: self.dim(),
            flags: self.flags,
            gamma: self.gamma.gens.iter().map(matrix_to_rows).collect(),
            gamma_op: self.gamma_op.as_ref().map(|op| op.gens.iter().map(matrix_to_rows).collect()),
            tau: matrix_to_rows(&self.tau),
            j: self.j.as_ref().map(matrix_to_rows),
            gram: matrix_to_rows(&self.gram),
        }
    }

    /// Rebuild from JSON; flags are re-detected and must match the recorded ones.
    pub fn from_json(js: &ModuleJson) -> Result<Self> {
        let sig = Signature::new(js.p, js.q, js.epsilon)?;
        let gens = js.gamma.iter().map(|r| matrix_from_rows(r)).collect::<Result<Vec<_>>>()?;
        let gamma_op = match &js.gamma_op {
            Some(g) => Some(CliffordGens::new(sig, g.iter().map(|r| matrix_from_rows(r)).collect::<Result<Vec<_>>>()?)?),
            None => None,
        };
        let j = js.j.as_ref().map(|r| matrix_from_rows(r)).transpose()?;
        let m = ModuleDescriptor::from_parts(
            js.name.clone(),
            CliffordGens::new(sig, gens)?,
            gamma_op,
            matrix_from_rows(&js.tau)?,
            j,
            matrix_from_rows(&js.gram)?,
        )?;
        if m.flags != js.flags {
            return Err(Error::Literal(format!("recorded flags {:?} disagree with detected {:?}", js.flags, m.flags)));
        }
        Ok(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn majorana_exactly_for_imaginary_chirality_prefactor() {
        for (p, q) in [(4, 0), (3, 1), (1, 1), (2, 0)] {
            let sig = Signature::new(p, q, 1).unwrap();
            let m = build_twisted_module(sig, &TwistData::trivial(1)).unwrap();
            assert_eq!(m.is_majorana(), sig.chirality_prefactor().im != 0.0, "({p},{q})");
            assert_eq!(m.flags.unwrap().j_gamma, -1);
        }
    }

    #[test]
    fn diagonal_membership() {
        let v = Vector::from_vec(vec![re(1.0), re(2.0)]);
        let d = diagonal_embed(&v);
        assert!(pauli_membership(&d, 0.0));
        let mut bad = d.clone();
        bad[2] = re(-1.0);
        bad[3] = re(-2.0);
        assert!(!pauli_membership(&bad, 1e-12));
    }
}

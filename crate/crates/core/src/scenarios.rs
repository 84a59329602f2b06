//! Seeded random data for the verification checks: operators, connections and
//! sections on the standard modules.
//!
//! Sizes default to desk scale: band 1, a handful of modes per field.

use std::sync::Arc;

use crate::clifford_fiber::{CliffordGens, Signature};
use crate::dirac_ops::{ConnectionSpec, DiracOperatorSpec};
use crate::error::Result;
use crate::fourier_fields::{EndoField, FormField, SectionField};
use crate::graded_modules::{build_twisted_module, ModuleDescriptor, TwistData};
use crate::linalg::{eye, kron, re, Mat};
use crate::random::{self, CheckRng};

/// Band and sparsity of random fields.
#[derive(Debug, Clone, Copy)]
pub struct FieldShape {
    pub band: i32,
    pub count: usize,
    pub capacity: i32,
    pub amp: f64,
}

impl Default for FieldShape {
    fn default() -> Self {
        FieldShape { band: 1, count: 3, capacity: 6, amp: 0.4 }
    }
}

/// Standard Chevalley module `Λ ⊗ ℂ^w` with a default real structure.
pub fn twisted(sig: Signature, w: usize) -> Result<Arc<ModuleDescriptor>> {
    Ok(Arc::new(build_twisted_module(sig, &TwistData::trivial(w))?))
}

pub fn endo(rng: &mut CheckRng, n: usize, dim: usize, shape: FieldShape) -> EndoField {
    random::endo_field(rng, n, dim, shape.band, shape.count, shape.capacity, shape.amp)
}

/// Random `X` with `X(x)^† = X(x)`.
pub fn hermitian_endo(rng: &mut CheckRng, n: usize, dim: usize, shape: FieldShape) -> EndoField {
    let x = endo(rng, n, dim, shape);
    let xh = x.conj_entries().map_linear(|m| m.transpose());
    x.add(&xh).scaled(re(0.5))
}

/// Random field with values in the commutant (or anticommutant, `odd`) of
/// a Clifford action.
pub fn commutant_endo(rng: &mut CheckRng, gens: &CliffordGens, shape: FieldShape, odd: bool) -> EndoField {
    endo(rng, gens.sig.n(), gens.dim(), shape).map_linear(|m| gens.average_conjugation(m, odd))
}

pub fn section(rng: &mut CheckRng, n: usize, dim: usize, shape: FieldShape) -> SectionField {
    random::section(rng, n, dim, shape.band, shape.count, shape.capacity)
}

/// Generic (non-Clifford) connection one-form.
pub fn connection(rng: &mut CheckRng, n: usize, dim: usize, shape: FieldShape) -> FormField {
    FormField::one_form((0..n).map(|_| endo(rng, n, dim, shape)).collect())
}

/// Clifford connection on `Λ ⊗ ℂ^w`: `A_j = 1_Λ ⊗ a_j` with anti-Hermitian `a_j`.
pub fn twist_connection(rng: &mut CheckRng, n: usize, w: usize, shape: FieldShape) -> FormField {
    let lam = eye(1 << n);
    FormField::one_form(
        (0..n)
            .map(|_| {
                let a = hermitian_endo(rng, n, w, shape).scaled(crate::linalg::I);
                a.map_linear(|m| kron(&lam, m))
            })
            .collect(),
    )
}

/// Fully generic Dirac-type operator `Σ γ^j (∂_j + A_j) + Φ`.
pub fn generic_operator(rng: &mut CheckRng, module: &Arc<ModuleDescriptor>, shape: FieldShape) -> Result<DiracOperatorSpec> {
    let n = module.n();
    let d = module.dim();
    let a = connection(rng, n, d, shape);
    let conn = ConnectionSpec::new(a, &module.gamma);
    DiracOperatorSpec::new(module.clone(), conn, endo(rng, n, d, shape))
}

/// Twist-level field lifted to `Λ ⊗ ℂ^w`.
pub fn lift_twist(n: usize, f: &EndoField) -> EndoField {
    let lam = eye(1 << n);
    f.map_linear(|m| kron(&lam, m))
}

/// Random constant twist matrix lifted to `Λ ⊗ ℂ^w`.
pub fn twist_constant(rng: &mut CheckRng, n: usize, w: usize) -> Mat {
    kron(&eye(1 << n), &random::matrix(rng, w))
}

//! Single-fiber Clifford and exterior algebra.
//!
//! The exterior algebra of an n-dimensional space is stored in the blade
//! basis: blades are bitmasks (bit `i` set means `e^{i+1}` occurs), ordered by
//! grade and then lexicographically on their increasing index lists. Every
//! fiber endomorphism is a dense complex matrix in that basis.
//!
//! [`CliffordGens`] carries the images `γ(e^1), ..., γ(e^n)` on an arbitrary
//! fiber, so quantization, the canonical one-form and the quantized trace work
//! unchanged on twisted, doubled and Dirac modules.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{eye, re, Mat, Vector, C64, I, ONE, ZERO};

/// Metric signature with Clifford sign: `g = diag(+1 x p, -1 x q)`,
/// `γ(α)² = ε g(α, α)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Signature {
    pub p: usize,
    pub q: usize,
    pub epsilon: i8,
}

impl Signature {
    pub fn new(p: usize, q: usize, epsilon: i8) -> Result<Self> {
        let n = p + q;
        if n < 2 {
            return Err(Error::InvalidSignature { p, q, reason: "n must be at least 2" });
        }
        if n % 2 != 0 {
            return Err(Error::InvalidSignature { p, q, reason: "n must be even" });
        }
        if n > 12 {
            return Err(Error::InvalidSignature { p, q, reason: "n above 12 is not supported" });
        }
        if epsilon != 1 && epsilon != -1 {
            return Err(Error::InvalidSignature { p, q, reason: "epsilon must be +1 or -1" });
        }
        Ok(Signature { p, q, epsilon })
    }

    pub fn n(&self) -> usize {
        self.p + self.q
    }

    pub fn eps(&self) -> f64 {
        self.epsilon as f64
    }

    /// Diagonal metric entry `g_kk = g^kk` for the 0-based direction `k`.
    pub fn metric(&self, k: usize) -> f64 {
        if k < self.p {
            1.0
        } else {
            -1.0
        }
    }

    /// `g(α, β)` for covectors given in the orthonormal coframe (bilinear).
    pub fn pairing(&self, alpha: &[C64], beta: &[C64]) -> C64 {
        (0..self.n()).map(|k| alpha[k] * beta[k] * self.metric(k)).sum()
    }

    /// Exponent `n(n-1)/2 + q` of the chirality prefactor.
    pub fn chirality_exponent(&self) -> usize {
        let n = self.n();
        n * (n - 1) / 2 + self.q
    }

    /// Principal square root of `(-1)^m`: 1 for even m, i for odd m.
    pub fn chirality_prefactor(&self) -> C64 {
        if self.chirality_exponent() % 2 == 0 {
            ONE
        } else {
            I
        }
    }
}

pub fn grade(mask: u32) -> usize {
    mask.count_ones() as usize
}

/// 0-based indices of a blade in increasing order.
pub fn blade_indices(mask: u32) -> Vec<usize> {
    (0..32).filter(|i| mask & (1 << i) != 0).collect()
}

pub fn blade_mask(indices: &[usize]) -> Result<u32> {
    let mut mask = 0u32;
    let mut last: Option<usize> = None;
    for &i in indices {
        if let Some(l) = last {
            if i <= l {
                return Err(Error::Precondition("blade indices must be strictly increasing".into()));
            }
        }
        mask |= 1 << i;
        last = Some(i);
    }
    Ok(mask)
}

/// Sign and metric weight of the Clifford product `e_A e_B` of two blades:
/// returns `(coefficient, A xor B)`.
pub fn blade_product(sig: &Signature, a: u32, b: u32) -> (f64, u32) {
    let mut swaps = 0u32;
    for j in blade_indices(b) {
        swaps += (a >> (j + 1)).count_ones();
    }
    let mut coeff = if swaps % 2 == 0 { 1.0 } else { -1.0 };
    for k in blade_indices(a & b) {
        coeff *= sig.eps() * sig.metric(k);
    }
    (coeff, a ^ b)
}

/// Blade basis of the exterior algebra in canonical order.
#[derive(Debug, Clone)]
pub struct BladeBasis {
    n: usize,
    blades: Vec<u32>,
    position: HashMap<u32, usize>,
}

impl BladeBasis {
    pub fn new(n: usize) -> Self {
        let mut blades: Vec<u32> = (0..(1u32 << n)).collect();
        blades.sort_by_key(|&m| {
            let idx = blade_indices(m);
            (idx.len(), idx)
        });
        let position = blades.iter().enumerate().map(|(i, &m)| (m, i)).collect();
        BladeBasis { n, blades, position }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.blades.len()
    }

    pub fn blades(&self) -> &[u32] {
        &self.blades
    }

    pub fn index_of(&self, mask: u32) -> usize {
        self.position[&mask]
    }

    pub fn blades_of_grade(&self, k: usize) -> Vec<u32> {
        self.blades.iter().copied().filter(|&m| grade(m) == k).collect()
    }
}

/// Element of the complexified exterior algebra, dense in the blade basis.
#[derive(Debug, Clone, PartialEq)]
pub struct Multivector {
    pub coeffs: Vector,
}

impl Multivector {
    pub fn zero(basis: &BladeBasis) -> Self {
        Multivector { coeffs: Vector::zeros(basis.dim()) }
    }

    pub fn scalar(basis: &BladeBasis, s: C64) -> Self {
        Self::blade(basis, 0, s)
    }

    pub fn blade(basis: &BladeBasis, mask: u32, s: C64) -> Self {
        let mut m = Self::zero(basis);
        m.coeffs[basis.index_of(mask)] = s;
        m
    }

    pub fn get(&self, basis: &BladeBasis, mask: u32) -> C64 {
        self.coeffs[basis.index_of(mask)]
    }

    pub fn max_abs_diff(&self, other: &Multivector) -> f64 {
        (&self.coeffs - &other.coeffs).iter().fold(0.0, |a, z| a.max(z.norm()))
    }
}

/// k-form with endomorphism coefficients: `Σ_{|I|=k} e^I ⊗ comps[I]`, one
/// component per increasing index set. Antisymmetry holds by storage.
#[derive(Debug, Clone)]
pub struct EndoForm {
    pub n: usize,
    pub degree: usize,
    pub blades: Vec<u32>,
    pub comps: Vec<Mat>,
}

impl EndoForm {
    pub fn zero(n: usize, degree: usize, dim: usize) -> Self {
        let basis = BladeBasis::new(n);
        let blades = basis.blades_of_grade(degree);
        let comps = blades.iter().map(|_| Mat::zeros(dim, dim)).collect();
        EndoForm { n, degree, blades, comps }
    }

    pub fn one_form(comps: Vec<Mat>) -> Self {
        let n = comps.len();
        EndoForm { n, degree: 1, blades: (0..n).map(|k| 1u32 << k).collect(), comps }
    }

    /// Scalar-valued blade `e^I ⊗ χ`.
    pub fn monomial(n: usize, mask: u32, chi: Mat) -> Self {
        let mut f = Self::zero(n, grade(mask), chi.nrows());
        let pos = f.blades.iter().position(|&b| b == mask).expect("blade of matching grade");
        f.comps[pos] = chi;
        f
    }

    /// Antisymmetric component with arbitrary index order (two-forms).
    pub fn component2(&self, i: usize, j: usize) -> Mat {
        assert_eq!(self.degree, 2);
        let dim = self.comps[0].nrows();
        if i == j {
            return Mat::zeros(dim, dim);
        }
        let (a, b, s) = if i < j { (i, j, 1.0) } else { (j, i, -1.0) };
        let mask = (1u32 << a) | (1u32 << b);
        let pos = self.blades.iter().position(|&m| m == mask).unwrap();
        &self.comps[pos] * re(s)
    }

    pub fn max_abs(&self) -> f64 {
        self.comps.iter().map(crate::linalg::max_abs).fold(0.0, f64::max)
    }
}

/// Clifford generators `γ(e^k)` on some fiber.
#[derive(Debug, Clone)]
pub struct CliffordGens {
    pub sig: Signature,
    pub gens: Vec<Mat>,
}

impl CliffordGens {
    pub fn new(sig: Signature, gens: Vec<Mat>) -> Result<Self> {
        if gens.len() != sig.n() {
            return Err(Error::DimensionMismatch { expected: sig.n(), got: gens.len() });
        }
        Ok(CliffordGens { sig, gens })
    }

    pub fn dim(&self) -> usize {
        self.gens[0].nrows()
    }

    /// `γ(α) = Σ α_k γ(e^k)`.
    pub fn gamma(&self, alpha: &[C64]) -> Result<Mat> {
        if alpha.len() != self.sig.n() {
            return Err(Error::DimensionMismatch { expected: self.sig.n(), got: alpha.len() });
        }
        let mut out = Mat::zeros(self.dim(), self.dim());
        for (a, g) in alpha.iter().zip(&self.gens) {
            out += g * *a;
        }
        Ok(out)
    }

    /// `γ(e_k♭) = g_kk γ(e^k)`.
    pub fn gamma_flat(&self, k: usize) -> Mat {
        &self.gens[k] * re(self.sig.metric(k))
    }

    /// Ordered product `γ(e^{i1}) ... γ(e^{ik})` of a blade.
    pub fn quantize_blade(&self, mask: u32) -> Mat {
        let mut out = eye(self.dim());
        for i in blade_indices(mask) {
            out *= &self.gens[i];
        }
        out
    }

    /// `δ_γ` of a form with endomorphism coefficients.
    pub fn quantize_form(&self, form: &EndoForm) -> Mat {
        let mut out = Mat::zeros(self.dim(), self.dim());
        for (mask, comp) in form.blades.iter().zip(&form.comps) {
            out += self.quantize_blade(*mask) * comp;
        }
        out
    }

    /// `δ_γ(ω ⊗ χ) = δ_γ(ω) ∘ χ`.
    pub fn quantize_form_with(&self, form: &EndoForm, chi: &Mat) -> Mat {
        self.quantize_form(form) * chi
    }

    /// Components of `Θ = (ε/n) e^k ⊗ γ(e_k♭)`.
    pub fn canonical_one_form(&self) -> EndoForm {
        let s = self.sig.eps() / self.sig.n() as f64;
        EndoForm::one_form((0..self.sig.n()).map(|k| self.gamma_flat(k) * re(s)).collect())
    }

    /// `ext_Θ(Φ) = Θ ∧ Φ`, components `Θ_k ∘ Φ`.
    pub fn ext_theta(&self, phi: &Mat) -> EndoForm {
        let theta = self.canonical_one_form();
        EndoForm::one_form(theta.comps.iter().map(|t| t * phi).collect())
    }

    /// `√((-1)^{n(n-1)/2+q}) δ_γ(e^1 ∧ ... ∧ e^n)`.
    pub fn chirality(&self) -> Mat {
        let vol = (1u32 << self.sig.n()) - 1;
        self.quantize_blade(vol) * self.sig.chirality_prefactor()
    }

    /// `tr ∘ δ_γ`.
    pub fn quantized_trace(&self, form: &EndoForm) -> C64 {
        self.quantize_form(form).trace()
    }

    /// Average of `γ_I X γ_I⁻¹` over all blades, signed by `(-1)^{|I|}` when
    /// `odd`: the projection onto the commutant (resp. anticommutant) of the
    /// Clifford action, since blade products form a finite group.
    pub fn average_conjugation(&self, x: &Mat, odd: bool) -> Mat {
        let n = self.sig.n();
        let mut out = Mat::zeros(x.nrows(), x.ncols());
        for mask in 0u32..(1 << n) {
            let g = self.quantize_blade(mask);
            // γ_i⁻¹ = γ_i / (ε g_ii), reversed along the blade.
            let mut inv = eye(self.dim());
            for i in blade_indices(mask).into_iter().rev() {
                inv *= &self.gens[i] * re(1.0 / (self.sig.eps() * self.sig.metric(i)));
            }
            let s = if odd && grade(mask) % 2 == 1 { -1.0 } else { 1.0 };
            out += crate::linalg::matmul(&crate::linalg::matmul(&g, x), &inv) * re(s);
        }
        out / re((1u64 << n) as f64)
    }

    /// Maximal deviation from `{γ(e^i), γ(e^j)} = 2ε g^{ij}`.
    pub fn clifford_defect(&self) -> f64 {
        let n = self.sig.n();
        let id = eye(self.dim());
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let ac = &self.gens[i] * &self.gens[j] + &self.gens[j] * &self.gens[i];
                let target = if i == j { &id * re(2.0 * self.sig.eps() * self.sig.metric(i)) } else { Mat::zeros(self.dim(), self.dim()) };
                worst = worst.max(crate::linalg::max_abs(&(ac - target)));
            }
        }
        worst
    }
}

/// The Chevalley Clifford module structure on the exterior algebra, with its
/// left action and the opposite (right) action.
#[derive(Debug, Clone)]
pub struct Chevalley {
    pub sig: Signature,
    pub basis: BladeBasis,
    pub left: CliffordGens,
    pub right: CliffordGens,
}

impl Chevalley {
    pub fn new(sig: Signature) -> Self {
        let basis = BladeBasis::new(sig.n());
        let left = (0..sig.n()).map(|k| Self::left_generator(&sig, &basis, k)).collect();
        let right = (0..sig.n()).map(|k| Self::right_generator(&sig, &basis, k)).collect();
        Chevalley {
            sig,
            left: CliffordGens { sig, gens: left },
            right: CliffordGens { sig, gens: right },
            basis,
        }
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    /// `ε int_g(e^k) + ext(e^k)` in the blade basis.
    fn left_generator(sig: &Signature, basis: &BladeBasis, k: usize) -> Mat {
        let dim = basis.dim();
        let mut m = Mat::zeros(dim, dim);
        let bit = 1u32 << k;
        for &b in basis.blades() {
            let below = (b & (bit - 1)).count_ones();
            let sign = if below % 2 == 0 { 1.0 } else { -1.0 };
            let col = basis.index_of(b);
            if b & bit == 0 {
                m[(basis.index_of(b | bit), col)] += re(sign);
            } else {
                m[(basis.index_of(b & !bit), col)] += re(sig.eps() * sig.metric(k) * sign);
            }
        }
        m
    }

    /// Right Clifford multiplication `ω ↦ ω e^k`, transported through σ_Ch.
    fn right_generator(sig: &Signature, basis: &BladeBasis, k: usize) -> Mat {
        let dim = basis.dim();
        let mut m = Mat::zeros(dim, dim);
        for &b in basis.blades() {
            let (coeff, out) = blade_product(sig, b, 1u32 << k);
            m[(basis.index_of(out), basis.index_of(b))] += re(coeff);
        }
        m
    }

    /// `γ_Ch(α) ω = ε int_g(α) ω + ext(α) ω`.
    pub fn gamma_apply(&self, alpha: &[C64], omega: &Multivector) -> Result<Multivector> {
        if omega.coeffs.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: omega.coeffs.len() });
        }
        Ok(Multivector { coeffs: self.left.gamma(alpha)? * &omega.coeffs })
    }

    /// `σ_Ch(x) = x · 1`.
    pub fn symbol_map(&self, x: &Mat) -> Result<Multivector> {
        if x.nrows() != self.dim() || x.ncols() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: x.nrows() });
        }
        Ok(Multivector { coeffs: x.column(0).into_owned() })
    }

    /// Inverse of the symbol map: blades go to ordered γ-products.
    pub fn quantize(&self, omega: &Multivector) -> Result<Mat> {
        if omega.coeffs.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: omega.coeffs.len() });
        }
        let mut out = Mat::zeros(self.dim(), self.dim());
        for (i, &b) in self.basis.blades().iter().enumerate() {
            let z = omega.coeffs[i];
            if z != ZERO {
                out += self.left.quantize_blade(b) * z;
            }
        }
        Ok(out)
    }

    pub fn chirality(&self) -> Mat {
        self.left.chirality()
    }

    pub fn canonical_one_form(&self) -> EndoForm {
        self.left.canonical_one_form()
    }

    /// `γ_op(α) = Σ α_k (right multiplication by e^k)`.
    pub fn opposite_action(&self, alpha: &[C64]) -> Result<Mat> {
        self.right.gamma(alpha)
    }

    /// Blade-parity involution `(-1)^grade`.
    pub fn parity(&self) -> Mat {
        let d = self.dim();
        let mut m = Mat::zeros(d, d);
        for (i, &b) in self.basis.blades().iter().enumerate() {
            m[(i, i)] = re(if grade(b) % 2 == 0 { 1.0 } else { -1.0 });
        }
        m
    }
}

//! Band-limited fields on the flat torus `[0, 2π)^n`.
//!
//! A field is a finite sum `Σ_k v_k e^{i k·x}` over integer modes, stored
//! sparsely. Derivatives multiply mode `k` by `i k_j`, products are exact
//! convolutions, and integrals read off the zero mode, so every continuum
//! identity among these operations holds up to floating-point rounding.
//!
//! Every stored mode satisfies `max_i |k_i| <= capacity`. A product that would
//! leave that box fails with [`Error::CapacityExceeded`] instead of truncating.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::ops::{Add, Mul, Sub};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::clifford_fiber::{blade_product, BladeBasis, Signature};
use crate::error::{Error, Result};
use crate::linalg::{re, Mat, Vector, C64, I, ZERO};

pub type Mode = Vec<i32>;

/// Fiber types a field can carry.
pub trait FiberValue: Clone + Send + Sync {
    fn scaled(&self, s: C64) -> Self;
    fn add_to(&mut self, other: &Self);
    fn is_exact_zero(&self) -> bool;
    fn max_abs(&self) -> f64;
}

impl FiberValue for C64 {
    fn scaled(&self, s: C64) -> Self {
        self * s
    }
    fn add_to(&mut self, other: &Self) {
        *self += other;
    }
    fn is_exact_zero(&self) -> bool {
        *self == ZERO
    }
    fn max_abs(&self) -> f64 {
        self.norm()
    }
}

impl FiberValue for Mat {
    fn scaled(&self, s: C64) -> Self {
        self * s
    }
    fn add_to(&mut self, other: &Self) {
        *self += other;
    }
    fn is_exact_zero(&self) -> bool {
        self.iter().all(|z| *z == ZERO)
    }
    fn max_abs(&self) -> f64 {
        crate::linalg::max_abs(self)
    }
}

impl FiberValue for Vector {
    fn scaled(&self, s: C64) -> Self {
        self * s
    }
    fn add_to(&mut self, other: &Self) {
        *self += other;
    }
    fn is_exact_zero(&self) -> bool {
        self.iter().all(|z| *z == ZERO)
    }
    fn max_abs(&self) -> f64 {
        crate::linalg::max_abs_vec(self)
    }
}

/// Truncated Fourier series with values in `V`.
#[derive(Debug, Clone, PartialEq)]
pub struct Field<V> {
    n: usize,
    capacity: i32,
    modes: BTreeMap<Mode, V>,
}

pub type ScalarField = Field<C64>;
pub type EndoField = Field<Mat>;
pub type SectionField = Field<Vector>;

pub fn mode_degree(k: &[i32]) -> i32 {
    k.iter().map(|x| x.abs()).max().unwrap_or(0)
}

impl<V: FiberValue> Field<V> {
    pub fn zero(n: usize, capacity: i32) -> Self {
        Field { n, capacity, modes: BTreeMap::new() }
    }

    pub fn constant(n: usize, capacity: i32, v: V) -> Self {
        let mut f = Self::zero(n, capacity);
        f.insert(vec![0; n], v).expect("zero mode always fits");
        f
    }

    /// `v e^{i k·x}`.
    pub fn plane_wave(n: usize, capacity: i32, k: Mode, v: V) -> Result<Self> {
        let mut f = Self::zero(n, capacity);
        f.insert(k, v)?;
        Ok(f)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn capacity(&self) -> i32 {
        self.capacity
    }

    pub fn with_capacity(mut self, capacity: i32) -> Result<Self> {
        if self.degree() > capacity {
            return Err(Error::CapacityExceeded { capacity, needed: self.degree() });
        }
        self.capacity = capacity;
        Ok(self)
    }

    pub fn modes(&self) -> &BTreeMap<Mode, V> {
        &self.modes
    }

    pub fn get(&self, k: &[i32]) -> Option<&V> {
        self.modes.get(k)
    }

    /// Adds `v` to mode `k`.
    pub fn insert(&mut self, k: Mode, v: V) -> Result<()> {
        if k.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: k.len() });
        }
        let d = mode_degree(&k);
        if d > self.capacity {
            return Err(Error::CapacityExceeded { capacity: self.capacity, needed: d });
        }
        match self.modes.get_mut(&k) {
            Some(existing) => existing.add_to(&v),
            None => {
                self.modes.insert(k, v);
            }
        }
        Ok(())
    }

    /// Band degree: largest `|k_i|` over the support.
    pub fn degree(&self) -> i32 {
        self.modes.keys().map(|k| mode_degree(k)).max().unwrap_or(0)
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn zero_mode(&self) -> Option<&V> {
        self.modes.get(&vec![0; self.n])
    }

    pub fn max_abs(&self) -> f64 {
        self.modes.values().map(|v| v.max_abs()).fold(0.0, f64::max)
    }

    fn check_same(&self, other: &Self) {
        assert_eq!(self.n, other.n, "fields over tori of different dimension");
    }

    pub fn scaled(&self, s: C64) -> Self {
        Field {
            n: self.n,
            capacity: self.capacity,
            modes: self.modes.iter().map(|(k, v)| (k.clone(), v.scaled(s))).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.check_same(other);
        let mut out = self.clone();
        out.capacity = self.capacity.max(other.capacity);
        for (k, v) in &other.modes {
            match out.modes.get_mut(k) {
                Some(e) => e.add_to(v),
                None => {
                    out.modes.insert(k.clone(), v.clone());
                }
            }
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scaled(re(-1.0)))
    }

    /// `∂_j` (0-based direction): mode `k` picks up `i k_j`.
    pub fn derive(&self, j: usize) -> Self {
        let mut modes = BTreeMap::new();
        for (k, v) in &self.modes {
            if k[j] != 0 {
                modes.insert(k.clone(), v.scaled(I * k[j] as f64));
            }
        }
        Field { n: self.n, capacity: self.capacity, modes }
    }

    /// Pointwise fiber map, applied mode by mode (must be linear).
    pub fn map_linear<W: FiberValue>(&self, f: impl Fn(&V) -> W + Sync) -> Field<W> {
        let modes = self.modes.iter().map(|(k, v)| (k.clone(), f(v))).collect();
        Field { n: self.n, capacity: self.capacity, modes }
    }

    /// Exact convolution `(f g)(x) = f(x) * g(x)` for a bilinear fiber product.
    pub fn convolve<W: FiberValue, O: FiberValue>(
        &self,
        other: &Field<W>,
        mul: impl Fn(&V, &W) -> O + Sync,
    ) -> Result<Field<O>> {
        assert_eq!(self.n, other.n, "fields over tori of different dimension");
        let capacity = self.capacity.max(other.capacity);
        let needed = self.degree() + other.degree();
        if !self.modes.is_empty() && !other.modes.is_empty() && needed > capacity {
            return Err(Error::CapacityExceeded { capacity, needed });
        }
        let mut targets: BTreeMap<Mode, Vec<(&Mode, &Mode)>> = BTreeMap::new();
        for k1 in self.modes.keys() {
            for k2 in other.modes.keys() {
                let k: Mode = k1.iter().zip(k2).map(|(a, b)| a + b).collect();
                targets.entry(k).or_default().push((k1, k2));
            }
        }
        // Each output mode sums its pairs in a fixed order, so the result does
        // not depend on the thread schedule.
        let entries: Vec<(Mode, Vec<(&Mode, &Mode)>)> = targets.into_iter().collect();
        let modes: Vec<(Mode, O)> = entries
            .into_par_iter()
            .map(|(k, pairs)| {
                let mut acc: Option<O> = None;
                for (k1, k2) in pairs {
                    let term = mul(&self.modes[k1], &other.modes[k2]);
                    match acc.as_mut() {
                        Some(a) => a.add_to(&term),
                        None => acc = Some(term),
                    }
                }
                (k, acc.expect("at least one pair"))
            })
            .collect();
        Ok(Field { n: self.n, capacity, modes: modes.into_iter().collect() })
    }

    /// Value at a point of the torus.
    pub fn eval(&self, x: &[f64]) -> Option<V> {
        let mut acc: Option<V> = None;
        for (k, v) in &self.modes {
            let phase: f64 = k.iter().zip(x).map(|(a, b)| *a as f64 * b).sum();
            let term = v.scaled(C64::from_polar(1.0, phase));
            match acc.as_mut() {
                Some(a) => a.add_to(&term),
                None => acc = Some(term),
            }
        }
        acc
    }

    /// Drops modes whose value is exactly zero.
    pub fn pruned(mut self) -> Self {
        self.modes.retain(|_, v| !v.is_exact_zero());
        self
    }
}

impl ScalarField {
    /// `∫_{T^n} f dvol = (2π)^n f_0`.
    pub fn integrate(&self) -> C64 {
        let vol = (2.0 * PI).powi(self.n as i32);
        self.zero_mode().copied().unwrap_or(ZERO) * vol
    }

    /// Pointwise complex conjugate.
    pub fn conj(&self) -> Self {
        let modes = self.modes.iter().map(|(k, v)| (k.iter().map(|x| -x).collect(), v.conj())).collect();
        Field { n: self.n, capacity: self.capacity, modes }
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.convolve(other, |a, b| a * b)
    }
}

impl EndoField {
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.convolve(other, crate::linalg::matmul)
    }

    pub fn apply(&self, psi: &SectionField) -> Result<SectionField> {
        self.convolve(psi, |a, v| a * v)
    }

    /// Left composition with a constant matrix.
    pub fn lmul_const(&self, m: &Mat) -> Self {
        self.map_linear(|a| crate::linalg::matmul(m, a))
    }

    pub fn rmul_const(&self, m: &Mat) -> Self {
        self.map_linear(|a| crate::linalg::matmul(a, m))
    }

    pub fn trace(&self) -> ScalarField {
        self.map_linear(|a| a.trace())
    }

    pub fn commutator(&self, other: &Self) -> Result<Self> {
        Ok(self.mul(other)?.sub(&other.mul(self)?))
    }

    pub fn anticommutator(&self, other: &Self) -> Result<Self> {
        Ok(self.mul(other)?.add(&other.mul(self)?))
    }

    /// Entrywise conjugate field, `x ↦ conj(M(x))`.
    pub fn conj_entries(&self) -> Self {
        let modes = self
            .modes
            .iter()
            .map(|(k, v)| (k.iter().map(|x| -x).collect(), crate::linalg::conj(v)))
            .collect();
        Field { n: self.n, capacity: self.capacity, modes }
    }

    pub fn dim(&self) -> Option<usize> {
        self.modes.values().next().map(|m| m.nrows())
    }

    /// `∫ tr X`.
    pub fn integral_trace(&self) -> C64 {
        let vol = (2.0 * PI).powi(self.n as i32);
        self.zero_mode().map(|m| m.trace()).unwrap_or(ZERO) * vol
    }

    /// `∫ tr(X Y) = (2π)^n Σ_k tr(X_k Y_{-k})`, without forming the product.
    pub fn integral_trace_product(&self, other: &Self) -> C64 {
        let vol = (2.0 * PI).powi(self.n as i32);
        let mut acc = ZERO;
        for (k, x) in &self.modes {
            let mk: Mode = k.iter().map(|a| -a).collect();
            if let Some(y) = other.modes.get(&mk) {
                // tr(XY) = Σ_{ab} X_ab Y_ba, the transpose product is cheaper than a matmul.
                acc += x.component_mul(&y.transpose()).sum();
            }
        }
        acc * vol
    }
}

impl SectionField {
    /// Entrywise conjugate section.
    pub fn conj_entries(&self) -> Self {
        let modes = self
            .modes
            .iter()
            .map(|(k, v)| (k.iter().map(|x| -x).collect(), crate::linalg::conj_vec(v)))
            .collect();
        Field { n: self.n, capacity: self.capacity, modes }
    }

    /// Pointwise `⟨ψ(x), φ(x)⟩ = ψ(x)† G φ(x)` as a scalar field.
    pub fn pairing_density(&self, phi: &SectionField, gram: &Mat) -> Result<ScalarField> {
        let left = self.conj_entries();
        left.convolve(phi, |a, b| (a.transpose() * gram * b)[(0, 0)])
    }

    /// `∫ ⟨ψ, φ⟩ dvol`, sesquilinear in the first slot.
    pub fn l2_pairing(&self, phi: &SectionField, gram: &Mat) -> Result<C64> {
        Ok(self.pairing_density(phi, gram)?.integrate())
    }

    /// L2 norm with respect to the standard Hermitian form (Parseval).
    pub fn l2_norm(&self) -> f64 {
        let vol = (2.0 * PI).powi(self.n as i32);
        (self.modes.values().map(|v| v.norm_squared()).sum::<f64>() * vol).sqrt()
    }
}

impl<V: FiberValue> Add for &Field<V> {
    type Output = Field<V>;
    fn add(self, rhs: Self) -> Field<V> {
        Field::add(self, rhs)
    }
}

impl<V: FiberValue> Sub for &Field<V> {
    type Output = Field<V>;
    fn sub(self, rhs: Self) -> Field<V> {
        Field::sub(self, rhs)
    }
}

impl<V: FiberValue> Mul<C64> for &Field<V> {
    type Output = Field<V>;
    fn mul(self, rhs: C64) -> Field<V> {
        self.scaled(rhs)
    }
}

/// Form of degree k with endomorphism-field coefficients, one component per
/// increasing index set.
#[derive(Debug, Clone)]
pub struct FormField {
    pub n: usize,
    pub degree: usize,
    pub blades: Vec<u32>,
    pub comps: Vec<EndoField>,
}

impl FormField {
    pub fn zero(n: usize, degree: usize, capacity: i32) -> Self {
        let blades = BladeBasis::new(n).blades_of_grade(degree);
        let comps = blades.iter().map(|_| EndoField::zero(n, capacity)).collect();
        FormField { n, degree, blades, comps }
    }

    pub fn one_form(comps: Vec<EndoField>) -> Self {
        let n = comps.len();
        FormField { n, degree: 1, blades: (0..n).map(|k| 1u32 << k).collect(), comps }
    }

    pub fn component(&self, mask: u32) -> Option<&EndoField> {
        self.blades.iter().position(|&b| b == mask).map(|p| &self.comps[p])
    }

    /// Two-form component for arbitrary index order.
    pub fn component2(&self, i: usize, j: usize) -> EndoField {
        assert_eq!(self.degree, 2);
        let cap = self.comps.first().map(|c| c.capacity()).unwrap_or(0);
        if i == j {
            return EndoField::zero(self.n, cap);
        }
        let (a, b, s) = if i < j { (i, j, 1.0) } else { (j, i, -1.0) };
        self.component((1 << a) | (1 << b)).unwrap().scaled(re(s))
    }

    pub fn add(&self, other: &FormField) -> FormField {
        assert_eq!(self.degree, other.degree);
        FormField {
            n: self.n,
            degree: self.degree,
            blades: self.blades.clone(),
            comps: self.comps.iter().zip(&other.comps).map(|(a, b)| a.add(b)).collect(),
        }
    }

    pub fn sub(&self, other: &FormField) -> FormField {
        self.add(&other.scaled(re(-1.0)))
    }

    pub fn scaled(&self, s: C64) -> FormField {
        self.map(|c| c.scaled(s))
    }

    pub fn map(&self, f: impl Fn(&EndoField) -> EndoField) -> FormField {
        FormField { n: self.n, degree: self.degree, blades: self.blades.clone(), comps: self.comps.iter().map(f).collect() }
    }

    pub fn max_abs(&self) -> f64 {
        self.comps.iter().map(|c| c.max_abs()).fold(0.0, f64::max)
    }

    /// Exterior derivative of the flat connection, componentwise.
    pub fn d(&self) -> FormField {
        let cap = self.comps.first().map(|c| c.capacity()).unwrap_or(0);
        let mut out = FormField::zero(self.n, self.degree + 1, cap);
        for (mask, comp) in self.blades.iter().zip(&self.comps) {
            for j in 0..self.n {
                if mask & (1 << j) != 0 {
                    continue;
                }
                // e^j ∧ e^I, sign from moving j past the smaller indices of I.
                let below = (mask & ((1u32 << j) - 1)).count_ones();
                let s = if below % 2 == 0 { 1.0 } else { -1.0 };
                let target = mask | (1 << j);
                let pos = out.blades.iter().position(|&b| b == target).unwrap();
                out.comps[pos] = out.comps[pos].add(&comp.derive(j).scaled(re(s)));
            }
        }
        out
    }
}

/// Wedge product of endomorphism-valued forms, composing fibers in order.
pub fn wedge(a: &FormField, b: &FormField) -> Result<FormField> {
    assert_eq!(a.n, b.n);
    let cap = a.comps.iter().chain(&b.comps).map(|c| c.capacity()).max().unwrap_or(0);
    let mut out = FormField::zero(a.n, a.degree + b.degree, cap);
    // Only the wedge sign matters; the metric never enters disjoint blades.
    let sig = Signature { p: a.n, q: 0, epsilon: 1 };
    for (ma, ca) in a.blades.iter().zip(&a.comps) {
        for (mb, cb) in b.blades.iter().zip(&b.comps) {
            if ma & mb != 0 {
                continue;
            }
            let (s, target) = blade_product(&sig, *ma, *mb);
            let pos = out.blades.iter().position(|&m| m == target).unwrap();
            out.comps[pos] = out.comps[pos].add(&ca.mul(cb)?.scaled(re(s)));
        }
    }
    Ok(out)
}

/// `ev_g(a ⊗ b) = Σ_j g^{jj} a_j b_j` for one-forms.
pub fn ev_g(sig: &Signature, a: &FormField, b: &FormField) -> Result<EndoField> {
    assert_eq!(a.degree, 1);
    assert_eq!(b.degree, 1);
    let mut out: Option<EndoField> = None;
    for j in 0..sig.n() {
        let term = a.comps[j].mul(&b.comps[j])?.scaled(re(sig.metric(j)));
        out = Some(match out {
            Some(o) => o.add(&term),
            None => term,
        });
    }
    Ok(out.expect("n >= 2"))
}

/// `div ξ = Σ_i ∂_i ξ^i` on the flat torus.
pub fn divergence(xi: &[ScalarField]) -> ScalarField {
    let mut out = ScalarField::zero(xi[0].n(), xi[0].capacity());
    for (i, comp) in xi.iter().enumerate() {
        out = out.add(&comp.derive(i));
    }
    out
}

/// JSON literal for one mode of a matrix field: `k` and a row-major list of
/// `[re, im]` pairs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModeLiteral {
    pub k: Vec<i32>,
    pub value: Vec<Vec<[f64; 2]>>,
}

/// Parses a matrix field from its JSON literal (a list of modes).
pub fn endo_field_from_json(text: &str, n: usize, capacity: i32) -> Result<EndoField> {
    let lits: Vec<ModeLiteral> = serde_json::from_str(text).map_err(|e| Error::Literal(e.to_string()))?;
    endo_field_from_literals(&lits, n, capacity)
}

pub fn endo_field_from_literals(lits: &[ModeLiteral], n: usize, capacity: i32) -> Result<EndoField> {
    let mut f = EndoField::zero(n, capacity);
    for lit in lits {
        let m = matrix_from_rows(&lit.value)?;
        f.insert(lit.k.clone(), m)?;
    }
    Ok(f)
}

pub fn endo_field_to_literals(f: &EndoField) -> Vec<ModeLiteral> {
    f.modes().iter().map(|(k, v)| ModeLiteral { k: k.clone(), value: matrix_to_rows(v) }).collect()
}

pub fn matrix_from_rows(rows: &[Vec<[f64; 2]>]) -> Result<Mat> {
    let r = rows.len();
    if r == 0 {
        return Err(Error::Literal("empty matrix".into()));
    }
    if rows.iter().any(|row| row.len() != r) {
        return Err(Error::Literal("matrix literal must be square".into()));
    }
    let mut m = Mat::zeros(r, r);
    for (i, row) in rows.iter().enumerate() {
        for (j, z) in row.iter().enumerate() {
            if !z[0].is_finite() || !z[1].is_finite() {
                return Err(Error::Literal("non-finite entry".into()));
            }
            m[(i, j)] = C64::new(z[0], z[1]);
        }
    }
    Ok(m)
}

pub fn matrix_to_rows(m: &Mat) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect()
}

//! Seeded generators for random fiber data and band-limited fields.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::fourier_fields::{EndoField, Mode, ScalarField, SectionField};
use crate::linalg::{c, Mat, Vector, C64};

pub type CheckRng = ChaCha8Rng;

/// Independent stream for `(master seed, check id)`.
pub fn rng_for(master_seed: u64, check_id: &str) -> CheckRng {
    // FNV-1a keeps the derivation stable across toolchains.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in check_id.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    ChaCha8Rng::seed_from_u64(master_seed ^ h)
}

pub fn complex(rng: &mut CheckRng) -> C64 {
    c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

pub fn matrix(rng: &mut CheckRng, dim: usize) -> Mat {
    Mat::from_fn(dim, dim, |_, _| complex(rng))
}

pub fn real_matrix(rng: &mut CheckRng, dim: usize) -> Mat {
    Mat::from_fn(dim, dim, |_, _| c(rng.gen_range(-1.0..1.0), 0.0))
}

pub fn vector(rng: &mut CheckRng, dim: usize) -> Vector {
    Vector::from_fn(dim, |_, _| complex(rng))
}

/// Unit-normalized covector.
pub fn covector(rng: &mut CheckRng, n: usize) -> Vec<C64> {
    let v: Vec<C64> = (0..n).map(|_| complex(rng)).collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|z| z / norm).collect()
}

/// Every mode with `max |k_i| <= band`.
pub fn band_modes(n: usize, band: i32) -> Vec<Mode> {
    let mut out = vec![vec![]];
    for _ in 0..n {
        let mut next = Vec::new();
        for m in &out {
            for k in -band..=band {
                let mut m2 = m.clone();
                m2.push(k);
                next.push(m2);
            }
        }
        out = next;
    }
    out
}

/// Random subset of band modes, always containing the zero mode.
pub fn support(rng: &mut CheckRng, n: usize, band: i32, count: usize) -> Vec<Mode> {
    let mut all = band_modes(n, band);
    all.retain(|k| k.iter().any(|&x| x != 0));
    all.shuffle(rng);
    let mut out = vec![vec![0; n]];
    out.extend(all.into_iter().take(count.saturating_sub(1)));
    out
}

/// Random matrix field on `count` modes of the band, scaled by `amp`.
pub fn endo_field(rng: &mut CheckRng, n: usize, dim: usize, band: i32, count: usize, capacity: i32, amp: f64) -> EndoField {
    let mut f = EndoField::zero(n, capacity);
    for k in support(rng, n, band, count) {
        let m = matrix(rng, dim) * c(amp, 0.0);
        f.insert(k, m).expect("band within capacity");
    }
    f
}

/// Random matrix field with values drawn through `draw`.
pub fn endo_field_with(
    rng: &mut CheckRng,
    n: usize,
    band: i32,
    count: usize,
    capacity: i32,
    mut draw: impl FnMut(&mut CheckRng) -> Mat,
) -> EndoField {
    let mut f = EndoField::zero(n, capacity);
    for k in support(rng, n, band, count) {
        let m = draw(rng);
        f.insert(k, m).expect("band within capacity");
    }
    f
}

pub fn section(rng: &mut CheckRng, n: usize, dim: usize, band: i32, count: usize, capacity: i32) -> SectionField {
    let mut f = SectionField::zero(n, capacity);
    for k in support(rng, n, band, count) {
        f.insert(k, vector(rng, dim)).expect("band within capacity");
    }
    f
}

pub fn scalar_field(rng: &mut CheckRng, n: usize, band: i32, count: usize, capacity: i32) -> ScalarField {
    let mut f = ScalarField::zero(n, capacity);
    for k in support(rng, n, band, count) {
        f.insert(k, complex(rng)).expect("band within capacity");
    }
    f
}

/// Real-valued scalar field: Hermitian-symmetric coefficients `f_{-k} = conj(f_k)`.
pub fn real_scalar_field(rng: &mut CheckRng, n: usize, band: i32, count: usize, capacity: i32) -> ScalarField {
    let f = scalar_field(rng, n, band, count, capacity);
    f.add(&f.conj()).scaled(c(0.5, 0.0))
}

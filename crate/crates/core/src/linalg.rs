//! Dense complex fiber arithmetic shared by every module.
//!
//! Fibers are small (at most a few hundred dimensions), so plain dense
//! `nalgebra` matrices are used throughout. Row index is the output basis
//! vector, column index the input one.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type Mat = DMatrix<C64>;
pub type Vector = DVector<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[inline]
pub fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

pub fn eye(n: usize) -> Mat {
    Mat::identity(n, n)
}

pub fn zeros(n: usize) -> Mat {
    Mat::zeros(n, n)
}

/// Real 2x2 matrix given row-major.
pub fn mat2(a: f64, b: f64, cc: f64, d: f64) -> Mat {
    Mat::from_row_slice(2, 2, &[re(a), re(b), re(cc), re(d)])
}

/// diag(1, -1)
pub fn tau2() -> Mat {
    mat2(1.0, 0.0, 0.0, -1.0)
}

/// [[0, 1], [1, 0]]
pub fn eps2() -> Mat {
    mat2(0.0, 1.0, 1.0, 0.0)
}

/// [[0, -1], [1, 0]]
pub fn i2() -> Mat {
    mat2(0.0, -1.0, 1.0, 0.0)
}

/// `a * b`, exploiting exact zeros.
///
/// Fiber matrices built from Clifford generators and Kronecker lifts are
/// mostly signed permutations, so at fiber sizes above ~64 a sparse
/// accumulation beats any dense kernel. Dense operands go through the packed
/// complex kernel, several times faster than nalgebra's generic product.
pub fn matmul(a: &Mat, b: &Mat) -> Mat {
    let (m, k) = a.shape();
    let (k2, n) = b.shape();
    assert_eq!(k, k2, "matmul shape mismatch");
    if m * k * n < 32 * 32 * 32 {
        return a * b;
    }
    let nnz = |x: &Mat| x.iter().filter(|z| **z != ZERO).count();
    let (nnz_a, nnz_b) = (nnz(a), nnz(b));
    let sparse_a = nnz_a * 8 < m * k;
    let sparse_b = nnz_b * 8 < k * n;
    if !sparse_a && !sparse_b {
        return dense_matmul(a, b);
    }
    let mut out = Mat::zeros(m, n);
    if sparse_a {
        let mut cols: Vec<Vec<(usize, C64)>> = vec![Vec::new(); k];
        for (kk, col) in cols.iter_mut().enumerate() {
            for i in 0..m {
                let v = a[(i, kk)];
                if v != ZERO {
                    col.push((i, v));
                }
            }
        }
        for j in 0..n {
            for kk in 0..k {
                let bv = b[(kk, j)];
                if bv == ZERO {
                    continue;
                }
                for &(i, v) in &cols[kk] {
                    out[(i, j)] += v * bv;
                }
            }
        }
    } else {
        for j in 0..n {
            for kk in 0..k {
                let bv = b[(kk, j)];
                if bv != ZERO {
                    out.column_mut(j).axpy(bv, &a.column(kk), ONE);
                }
            }
        }
    }
    out
}

fn dense_matmul(a: &Mat, b: &Mat) -> Mat {
    let (m, k) = a.shape();
    let n = b.ncols();
    let mut out = Mat::zeros(m, n);
    // Column-major storage: row stride 1, column stride = rows. Complex64 is
    // repr(C) `[re, im]`, the layout zgemm expects.
    unsafe {
        matrixmultiply::zgemm(
            matrixmultiply::CGemmOption::Standard,
            matrixmultiply::CGemmOption::Standard,
            m,
            k,
            n,
            [1.0, 0.0],
            a.as_ptr() as *const [f64; 2],
            1,
            m as isize,
            b.as_ptr() as *const [f64; 2],
            1,
            k as isize,
            [0.0, 0.0],
            out.as_mut_ptr() as *mut [f64; 2],
            1,
            m as isize,
        );
    }
    out
}

/// Kronecker product; the index of `a` is the slow one.
pub fn kron(a: &Mat, b: &Mat) -> Mat {
    a.kronecker(b)
}

/// 2x2 block matrix [[a, b], [c, d]] with square blocks of equal size.
pub fn block2(a: &Mat, b: &Mat, cc: &Mat, d: &Mat) -> Mat {
    let n = a.nrows();
    let mut out = Mat::zeros(2 * n, 2 * n);
    out.view_mut((0, 0), (n, n)).copy_from(a);
    out.view_mut((0, n), (n, n)).copy_from(b);
    out.view_mut((n, 0), (n, n)).copy_from(cc);
    out.view_mut((n, n), (n, n)).copy_from(d);
    out
}

/// Block-diagonal sum of square matrices.
pub fn block_diag(blocks: &[&Mat]) -> Mat {
    let n: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = Mat::zeros(n, n);
    let mut off = 0;
    for b in blocks {
        let k = b.nrows();
        out.view_mut((off, off), (k, k)).copy_from(b);
        off += k;
    }
    out
}

/// Extract the (r, c) block of a matrix split into `parts` x `parts` equal blocks.
pub fn block_of(m: &Mat, parts: usize, r: usize, cc: usize) -> Mat {
    let k = m.nrows() / parts;
    m.view((r * k, cc * k), (k, k)).into_owned()
}

pub fn comm(a: &Mat, b: &Mat) -> Mat {
    matmul(a, b) - matmul(b, a)
}

pub fn anticomm(a: &Mat, b: &Mat) -> Mat {
    matmul(a, b) + matmul(b, a)
}

/// Largest entry modulus.
pub fn max_abs(m: &Mat) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn max_abs_vec(v: &Vector) -> f64 {
    v.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn frob(m: &Mat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Entrywise complex conjugate (no transpose).
pub fn conj(m: &Mat) -> Mat {
    m.map(|z| z.conj())
}

pub fn conj_vec(v: &Vector) -> Vector {
    v.map(|z| z.conj())
}

pub fn trace(m: &Mat) -> C64 {
    m.trace()
}

pub fn scale(m: &Mat, s: C64) -> Mat {
    m * s
}

/// Rank of an orthogonal projector, read off its trace.
pub fn projector_rank(p: &Mat) -> usize {
    p.trace().re.round() as usize
}

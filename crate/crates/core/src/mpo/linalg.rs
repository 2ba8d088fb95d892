//! Reshape and factorization helpers over row-major complex buffers.

use faer::Mat;
use nalgebra::DMatrix;

use crate::C64;

/// Singular values at or below this fraction of the largest one are treated
/// as exact zeros: dropping them only changes the operator at roundoff level.
pub const LOSSLESS_RTOL: f64 = 1e-14;

pub(crate) fn to_mat(data: &[C64], rows: usize, cols: usize) -> DMatrix<C64> {
    debug_assert_eq!(data.len(), rows * cols);
    DMatrix::from_row_slice(rows, cols, data)
}

pub(crate) fn from_mat(m: &DMatrix<C64>) -> Vec<C64> {
    let (rows, cols) = m.shape();
    let mut out = Vec::with_capacity(rows * cols);
    for r in 0..rows {
        for c in 0..cols {
            out.push(m[(r, c)]);
        }
    }
    out
}

/// Thin SVD with singular values in descending order.
pub(crate) struct Svd {
    pub u: DMatrix<C64>,
    pub s: Vec<f64>,
    pub v_t: DMatrix<C64>,
}

/// Thin SVD through faer, whose complex SVD reconstructs to roundoff on the
/// rank-deficient matrices these sweeps produce.
pub(crate) fn svd(m: DMatrix<C64>) -> Svd {
    let (rows, cols) = m.shape();
    let f = Mat::<C64>::from_fn(rows, cols, |i, j| m[(i, j)]);
    let svd = f.thin_svd().expect("SVD converges");
    let (u, s, v) = (svd.U(), svd.S(), svd.V());
    let k = rows.min(cols);
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| s[b].re.total_cmp(&s[a].re));
    Svd {
        u: DMatrix::from_fn(rows, k, |i, j| u[(i, order[j])]),
        s: order.iter().map(|&j| s[j].re).collect(),
        v_t: DMatrix::from_fn(k, cols, |i, j| v[(j, order[i])].conj()),
    }
}

/// Singular values in descending order.
pub(crate) fn singular_values(m: &DMatrix<C64>) -> Vec<f64> {
    let (rows, cols) = m.shape();
    if rows == 0 || cols == 0 {
        return Vec::new();
    }
    let f = Mat::<C64>::from_fn(rows, cols, |i, j| m[(i, j)]);
    let mut s: Vec<f64> = f.singular_values().expect("SVD converges");
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Number of singular values above the lossless floor, at least one.
pub(crate) fn lossless_rank(s: &[f64]) -> usize {
    let max = s.first().copied().unwrap_or(0.0);
    s.iter().take_while(|&&x| x > LOSSLESS_RTOL * max).count().max(1)
}

pub(crate) fn ln_add_exp(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if hi == f64::NEG_INFINITY {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

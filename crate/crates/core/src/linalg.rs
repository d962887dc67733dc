//! Thin wrappers over `faer` for the handful of dense factorizations the
//! pipeline needs. Matrices cross this boundary as row-major slices because
//! every tensor in the crate uses row-major (first axis slowest) storage.

use faer::Mat;
use num_complex::Complex64 as C64;

use crate::Error;

/// Relative cutoff below which singular values count as numerically zero.
pub const RANK_CUTOFF: f64 = 1e-14;

/// Thin SVD `A = U diag(s) Vh` with row-major factors.
#[derive(Debug, Clone)]
pub struct Svd {
    pub rows: usize,
    pub cols: usize,
    /// `rows × k`, row-major.
    pub u: Vec<C64>,
    /// Non-increasing singular values, length `k = min(rows, cols)`.
    pub s: Vec<f64>,
    /// `k × cols`, row-major.
    pub vh: Vec<C64>,
}

impl Svd {
    pub fn k(&self) -> usize {
        self.s.len()
    }

    /// The first `keep` columns of `U`, row-major `rows × keep`.
    pub fn u_columns(&self, keep: usize) -> Vec<C64> {
        let k = self.k();
        let mut out = Vec::with_capacity(self.rows * keep);
        for r in 0..self.rows {
            out.extend_from_slice(&self.u[r * k..r * k + keep]);
        }
        out
    }

    /// `diag(s[..keep]) · Vh[..keep, :]`, row-major `keep × cols`.
    pub fn weighted_vh(&self, keep: usize) -> Vec<C64> {
        let mut out = Vec::with_capacity(keep * self.cols);
        for mu in 0..keep {
            let s = self.s[mu];
            out.extend(self.vh[mu * self.cols..(mu + 1) * self.cols].iter().map(|z| z * s));
        }
        out
    }
}

pub fn to_mat(rows: usize, cols: usize, data: &[C64]) -> Mat<C64> {
    debug_assert_eq!(data.len(), rows * cols);
    Mat::from_fn(rows, cols, |i, j| data[i * cols + j])
}

pub fn from_mat(m: &Mat<C64>) -> Vec<C64> {
    let mut out = Vec::with_capacity(m.nrows() * m.ncols());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            out.push(m[(i, j)]);
        }
    }
    out
}

pub fn svd(rows: usize, cols: usize, data: &[C64]) -> Result<Svd, Error> {
    assert_eq!(data.len(), rows * cols, "svd: data length does not match shape");
    let k = rows.min(cols);
    if k == 0 {
        return Ok(Svd { rows, cols, u: Vec::new(), s: Vec::new(), vh: Vec::new() });
    }
    let m = to_mat(rows, cols, data);
    let dec = m.thin_svd().map_err(|e| Error::Linalg(format!("svd did not converge: {e:?}")))?;
    let (u, s, v) = (dec.U(), dec.S(), dec.V());
    let mut sv: Vec<f64> = (0..k).map(|i| s[i].re.max(0.0)).collect();
    // faer promises non-increasing order; enforce it so downstream code can rely on it.
    let mut order: Vec<usize> = (0..k).collect();
    if sv.windows(2).any(|w| w[0] < w[1]) {
        order.sort_by(|&a, &b| sv[b].total_cmp(&sv[a]));
        sv = order.iter().map(|&i| sv[i]).collect();
    }
    let mut uo = Vec::with_capacity(rows * k);
    for r in 0..rows {
        uo.extend(order.iter().map(|&c| u[(r, c)]));
    }
    let mut vh = Vec::with_capacity(k * cols);
    for &c in &order {
        vh.extend((0..cols).map(|j| v[(j, c)].conj()));
    }
    Ok(Svd { rows, cols, u: uo, s: sv, vh })
}

/// Number of singular values above `RANK_CUTOFF × s[0]`.
pub fn numerical_rank(s: &[f64]) -> usize {
    match s.first() {
        None => 0,
        Some(&top) if top <= 0.0 => 0,
        Some(&top) => s.iter().take_while(|&&x| x > RANK_CUTOFF * top).count(),
    }
}

/// Row-major complex matrix product `a (m×k) · b (k×n)`.
pub fn matmul(m: usize, k: usize, n: usize, a: &[C64], b: &[C64]) -> Vec<C64> {
    assert_eq!(a.len(), m * k);
    assert_eq!(b.len(), k * n);
    if m == 0 || n == 0 {
        return Vec::new();
    }
    let am = to_mat(m, k, a);
    let bm = to_mat(k, n, b);
    from_mat(&(&am * &bm))
}

/// Eigen-decomposition of a real symmetric matrix held as a faer matrix.
/// Eigenvalues are non-decreasing; column `j` of the returned matrix is the
/// eigenvector for eigenvalue `j`.
pub fn symmetric_eigen(h: &Mat<f64>) -> Result<(Vec<f64>, Mat<f64>), Error> {
    let dec = h
        .self_adjoint_eigen(faer::Side::Lower)
        .map_err(|e| Error::Linalg(format!("eigensolver did not converge: {e:?}")))?;
    let n = h.nrows();
    let vals = (0..n).map(|i| dec.S()[i]).collect();
    Ok((vals, dec.U().to_owned()))
}

/// Eigenvalues (non-decreasing) and eigenvectors of a Hermitian matrix,
/// returned as row-major data with eigenvectors in columns.
pub fn hermitian_eigen(n: usize, data: &[C64]) -> Result<(Vec<f64>, Vec<C64>), Error> {
    let m = to_mat(n, n, data);
    let dec = m
        .self_adjoint_eigen(faer::Side::Lower)
        .map_err(|e| Error::Linalg(format!("eigensolver did not converge: {e:?}")))?;
    let vals = (0..n).map(|i| dec.S()[i].re).collect();
    Ok((vals, from_mat(&dec.U().to_owned())))
}

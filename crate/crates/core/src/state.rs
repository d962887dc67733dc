//! Dense pure states and Schmidt decompositions across vertex bipartitions.
//!
//! Amplitudes are stored with the first site as the most significant index:
//! the basis state `|s1, s2, ..., sN>` lives at offset
//! `((s1 * d2 + s2) * d3 + s3) ...`.

use faer::Mat;
use num_complex::Complex64 as C64;

use crate::linalg;
use crate::tensor::permute;
use crate::tree::Relabeling;
use crate::Error;

/// Tolerance on `| ||psi|| - 1 |` for a state to count as normalized.
pub const NORMALIZED_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct DenseState {
    dims: Vec<usize>,
    amplitudes: Vec<C64>,
}

impl DenseState {
    pub fn new(dims: Vec<usize>, amplitudes: Vec<C64>) -> Result<Self, Error> {
        if dims.is_empty() || dims.contains(&0) {
            return Err(Error::BadDims(format!("local dimensions must be positive, got {dims:?}")));
        }
        let len = dims.iter().try_fold(1usize, |acc, &d| acc.checked_mul(d));
        match len {
            Some(l) if l == amplitudes.len() => Ok(Self { dims, amplitudes }),
            Some(l) => Err(Error::BadDims(format!(
                "{} amplitudes given for dimensions {dims:?} (expected {l})",
                amplitudes.len()
            ))),
            None => Err(Error::BadDims(format!("Hilbert space {dims:?} overflows"))),
        }
    }

    /// Computational basis state `|index>`.
    pub fn basis(dims: Vec<usize>, index: &[usize]) -> Result<Self, Error> {
        if index.len() != dims.len() || index.iter().zip(&dims).any(|(s, d)| s >= d) {
            return Err(Error::BadDims(format!("basis index {index:?} does not fit {dims:?}")));
        }
        let len: usize = dims.iter().product();
        let off = index.iter().zip(&dims).fold(0, |acc, (s, d)| acc * d + s);
        let mut amps = vec![C64::new(0.0, 0.0); len];
        amps[off] = C64::new(1.0, 0.0);
        Self::new(dims, amps)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn n_sites(&self) -> usize {
        self.dims.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm() - 1.0).abs() <= NORMALIZED_TOL
    }

    pub fn normalized(&self) -> Result<Self, Error> {
        let n = self.norm();
        if n == 0.0 {
            return Err(Error::NotNormalized { norm: 0.0 });
        }
        Ok(self.scaled(1.0 / n))
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            dims: self.dims.clone(),
            amplitudes: self.amplitudes.iter().map(|z| z * factor).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Result<Self, Error> {
        check_dims(self, other)?;
        Ok(Self {
            dims: self.dims.clone(),
            amplitudes: self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a - b).collect(),
        })
    }

    pub fn max_abs_diff(&self, other: &Self) -> Result<f64, Error> {
        check_dims(self, other)?;
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    /// Reorders sites so that canonical site `k` holds original site
    /// `relabeling.new_to_old()[k - 1]`.
    pub fn relabel(&self, relabeling: &Relabeling) -> Result<Self, Error> {
        if relabeling.old_to_new.len() != self.n_sites() {
            return Err(Error::DimMismatch(format!(
                "relabeling covers {} sites, state has {}",
                relabeling.old_to_new.len(),
                self.n_sites()
            )));
        }
        let perm: Vec<usize> = relabeling.new_to_old().iter().map(|&o| o - 1).collect();
        let dims = perm.iter().map(|&p| self.dims[p]).collect();
        Ok(Self { dims, amplitudes: permute(&self.amplitudes, &self.dims, &perm) })
    }

    /// Inverse of [`relabel`](Self::relabel): back to original site order.
    pub fn unrelabel(&self, relabeling: &Relabeling) -> Result<Self, Error> {
        if relabeling.old_to_new.len() != self.n_sites() {
            return Err(Error::DimMismatch("relabeling size differs from state".into()));
        }
        let perm: Vec<usize> = relabeling.old_to_new.iter().map(|&nw| nw - 1).collect();
        let dims = perm.iter().map(|&p| self.dims[p]).collect();
        Ok(Self { dims, amplitudes: permute(&self.amplitudes, &self.dims, &perm) })
    }

    fn check_part(&self, part: &[usize]) -> Result<(Vec<usize>, Vec<usize>), Error> {
        let n = self.n_sites();
        let mut a: Vec<usize> = part.to_vec();
        a.sort_unstable();
        a.dedup();
        if a.is_empty() {
            return Err(Error::EmptyPart);
        }
        if let Some(&v) = a.iter().find(|&&v| v == 0 || v > n) {
            return Err(Error::BadDims(format!("site {v} outside 1..={n}")));
        }
        if a.len() == n {
            return Err(Error::FullPart);
        }
        let b = (1..=n).filter(|v| a.binary_search(v).is_err()).collect();
        Ok((a, b))
    }

    /// Amplitudes as a row-major `(prod_A d) × (prod_B d)` matrix, both
    /// groups in ascending site order.
    pub fn bipartite_matrix(&self, part: &[usize]) -> Result<(usize, usize, Vec<C64>), Error> {
        let (a, b) = self.check_part(part)?;
        let perm: Vec<usize> = a.iter().chain(&b).map(|&v| v - 1).collect();
        let rows = a.iter().map(|&v| self.dims[v - 1]).product();
        let cols = b.iter().map(|&v| self.dims[v - 1]).product();
        Ok((rows, cols, permute(&self.amplitudes, &self.dims, &perm)))
    }

    /// Inverse of [`bipartite_matrix`](Self::bipartite_matrix).
    pub fn from_bipartite_matrix(dims: &[usize], part: &[usize], data: Vec<C64>) -> Result<Self, Error> {
        let probe = DenseState::new(dims.to_vec(), vec![C64::new(0.0, 0.0); dims.iter().product()])?;
        let (a, b) = probe.check_part(part)?;
        let order: Vec<usize> = a.iter().chain(&b).map(|&v| v - 1).collect();
        let grouped_dims: Vec<usize> = order.iter().map(|&p| dims[p]).collect();
        let mut inv = vec![0; order.len()];
        for (k, &p) in order.iter().enumerate() {
            inv[p] = k;
        }
        DenseState::new(dims.to_vec(), permute(&data, &grouped_dims, &inv))
    }
}

fn check_dims(a: &DenseState, b: &DenseState) -> Result<(), Error> {
    if a.dims != b.dims {
        return Err(Error::DimMismatch(format!("{:?} vs {:?}", a.dims, b.dims)));
    }
    Ok(())
}

/// Non-increasing Schmidt coefficients for one cut.
#[derive(Debug, Clone, PartialEq)]
pub struct SchmidtSpectrum {
    /// Tree edge the cut belongs to, when there is one.
    pub edge: Option<usize>,
    pub coefficients: Vec<f64>,
}

impl SchmidtSpectrum {
    pub fn new(edge: Option<usize>, mut coefficients: Vec<f64>) -> Self {
        coefficients.sort_by(|a, b| b.total_cmp(a));
        Self { edge, coefficients }
    }

    /// Squared coefficients, i.e. the reduced density matrix eigenvalues.
    pub fn weights(&self) -> Vec<f64> {
        self.coefficients.iter().map(|l| l * l).collect()
    }

    pub fn total_weight(&self) -> f64 {
        self.coefficients.iter().rev().map(|l| l * l).sum()
    }

    pub fn rank(&self) -> usize {
        linalg::numerical_rank(&self.coefficients)
    }
}

/// Result of [`schmidt_decompose`]: `matrix = left · diag(λ) · rightᵀ`.
#[derive(Debug, Clone)]
pub struct Schmidt {
    pub spectrum: SchmidtSpectrum,
    /// Columns are the orthonormal states on the part, `(prod_A d) × k`.
    pub left: Mat<C64>,
    /// Columns are the orthonormal states on the complement, `(prod_B d) × k`.
    pub right: Mat<C64>,
}

pub fn schmidt_decompose(state: &DenseState, part: &[usize]) -> Result<Schmidt, Error> {
    let (rows, cols, data) = state.bipartite_matrix(part)?;
    let svd = linalg::svd(rows, cols, &data)?;
    let k = svd.k();
    let left = Mat::from_fn(rows, k, |i, j| svd.u[i * k + j]);
    let right = Mat::from_fn(cols, k, |i, j| svd.vh[j * cols + i]);
    Ok(Schmidt { spectrum: SchmidtSpectrum { edge: None, coefficients: svd.s }, left, right })
}

/// `<a|b>`, antilinear in `a`.
pub fn inner(a: &DenseState, b: &DenseState) -> Result<C64, Error> {
    check_dims(a, b)?;
    Ok(a.amplitudes.iter().zip(&b.amplitudes).map(|(x, y)| x.conj() * y).sum())
}

/// `||a - b||²`, never negative.
pub fn error_sq(a: &DenseState, b: &DenseState) -> Result<f64, Error> {
    check_dims(a, b)?;
    Ok(a.amplitudes.iter().zip(&b.amplitudes).map(|(x, y)| (x - y).norm_sqr()).sum())
}

/// Discarded weight `sum_{mu > m} λ_mu²`; zero once `m` reaches the length.
pub fn truncation_error(spectrum: &SchmidtSpectrum, m: usize) -> f64 {
    spectrum.coefficients.iter().skip(m).rev().map(|l| l * l).sum()
}

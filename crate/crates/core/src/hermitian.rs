//! Dense Hermitian matrices, the eigen-decomposition contract used everywhere
//! else, eigenvalue clustering and the real symmetric block embedding.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

/// Relative tolerance used when grouping eigenvalues into eigenspaces.
pub const DEFAULT_CLUSTER_TOL: f64 = 1e-8;

const HERMITIAN_CHECK_TOL: f64 = 1e-12;

/// Dense complex self-adjoint matrix. The stored entries are exactly
/// Hermitian: construction symmetrizes the input as `(A + A*)/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    inner: CMatrix,
}

impl HermitianMatrix {
    pub fn new(m: CMatrix) -> Result<Self> {
        let n = m.nrows();
        if n == 0 {
            return Err(Error::Empty);
        }
        if m.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, got: m.ncols() });
        }
        let scale = m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()));
        let tol = HERMITIAN_CHECK_TOL * scale;
        for i in 0..n {
            for j in i..n {
                let defect = (m[(i, j)] - m[(j, i)].conj()).norm();
                if !(defect <= tol) {
                    return Err(Error::NotHermitian { row: i, col: j, defect });
                }
            }
        }
        Ok(Self::symmetrized(m))
    }

    fn symmetrized(m: CMatrix) -> Self {
        let adj = m.adjoint();
        let mut inner = (m + adj).scale(0.5);
        for i in 0..inner.nrows() {
            inner[(i, i)].im = 0.0;
        }
        Self { inner }
    }

    pub fn from_real(m: &DMatrix<f64>) -> Result<Self> {
        Self::new(m.map(|v| Complex64::new(v, 0.0)))
    }

    /// Builds `re + i·im`.
    pub fn from_parts(re: &DMatrix<f64>, im: &DMatrix<f64>) -> Result<Self> {
        if re.shape() != im.shape() {
            return Err(Error::DimensionMismatch { expected: re.nrows(), got: im.nrows() });
        }
        Self::new(re.zip_map(im, Complex64::new))
    }

    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let n = rows.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::DimensionMismatch { expected: n, got: bad.len() });
        }
        Self::new(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::DimensionMismatch { expected: n, got: bad.len() });
        }
        Self::from_real(&DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    pub fn zeros(n: usize) -> Self {
        Self { inner: CMatrix::zeros(n, n) }
    }

    pub fn identity(n: usize) -> Self {
        Self { inner: CMatrix::identity(n, n) }
    }

    pub fn from_diagonal(d: &[f64]) -> Self {
        let n = d.len();
        Self { inner: CMatrix::from_fn(n, n, |i, j| if i == j { Complex64::new(d[i], 0.0) } else { Complex64::new(0.0, 0.0) }) }
    }

    /// `c · h h*`.
    pub fn rank_one(h: &[Complex64], c: f64) -> Self {
        let n = h.len();
        Self::symmetrized(CMatrix::from_fn(n, n, |i, j| h[i] * h[j].conj() * c))
    }

    pub fn dim(&self) -> usize {
        self.inner.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.inner
    }

    pub fn into_matrix(self) -> CMatrix {
        self.inner
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.inner[(i, j)]
    }

    /// Real diagonal entries.
    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.inner[(i, i)].re).collect()
    }

    pub fn real_part(&self) -> DMatrix<f64> {
        self.inner.map(|z| z.re)
    }

    pub fn imag_part(&self) -> DMatrix<f64> {
        self.inner.map(|z| z.im)
    }

    pub fn is_real(&self) -> bool {
        self.inner.iter().all(|z| z.im == 0.0)
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.inner.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
    }

    pub fn scale(&self, c: f64) -> Self {
        Self { inner: self.inner.map(|z| z * c) }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: other.dim() });
        }
        Ok(Self { inner: &self.inner + &other.inner })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(-1.0))
    }

    /// The same matrix with its diagonal set to zero.
    pub fn off_diagonal(&self) -> Self {
        let mut inner = self.inner.clone();
        for i in 0..self.dim() {
            inner[(i, i)] = Complex64::new(0.0, 0.0);
        }
        Self { inner }
    }
}

/// A real diagonal perturbation `x ∈ ℝⁿ`.
#[derive(Debug, Clone, PartialEq)]
pub struct RealDiagonal(pub Vec<f64>);

impl RealDiagonal {
    pub fn new(x: Vec<f64>) -> Self {
        Self(x)
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![0.0; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    /// `self + t·w`.
    pub fn axpy(&self, t: f64, w: &[f64]) -> Self {
        Self(self.0.iter().zip(w).map(|(a, b)| a + t * b).collect())
    }
}

impl From<Vec<f64>> for RealDiagonal {
    fn from(x: Vec<f64>) -> Self {
        Self(x)
    }
}

/// Spectrum sorted descending with matching orthonormal eigenvector columns.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl EigenSystem {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn lambda_max(&self) -> f64 {
        self.values[0]
    }

    pub fn lambda_min(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    pub fn norm(&self) -> f64 {
        self.lambda_max().abs().max(self.lambda_min().abs())
    }

    /// `V · diag(values) · V*`.
    pub fn reconstruct(&self) -> CMatrix {
        let n = self.dim();
        let scaled = CMatrix::from_fn(n, n, |i, j| self.vectors[(i, j)] * self.values[j]);
        scaled * self.vectors.adjoint()
    }
}

/// Orthonormal basis of an (approximate) eigenspace.
#[derive(Debug, Clone)]
pub struct EigenspaceBasis {
    pub eigenvalue: f64,
    pub columns: CMatrix,
}

impl EigenspaceBasis {
    pub fn new(eigenvalue: f64, columns: CMatrix) -> Self {
        Self { eigenvalue, columns }
    }

    /// Span of a single (normalized) vector.
    pub fn from_vector(eigenvalue: f64, v: &[Complex64]) -> Self {
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let columns = CMatrix::from_fn(v.len(), 1, |i, _| v[i] / norm);
        Self { eigenvalue, columns }
    }

    pub fn ambient_dim(&self) -> usize {
        self.columns.nrows()
    }

    pub fn multiplicity(&self) -> usize {
        self.columns.ncols()
    }

    /// `Q* · Diag(w) · Q`, the compression of a diagonal onto the subspace.
    pub fn compress_diagonal(&self, w: &[f64]) -> CMatrix {
        let q = &self.columns;
        let s = q.ncols();
        CMatrix::from_fn(s, s, |a, b| {
            (0..q.nrows()).map(|k| q[(k, a)].conj() * q[(k, b)] * w[k]).sum()
        })
    }

    /// The orthogonal projector `Q Q*`.
    pub fn projector(&self) -> CMatrix {
        &self.columns * self.columns.adjoint()
    }
}

/// `A0 + Diag(x)`.
pub fn shifted(a0: &HermitianMatrix, x: &RealDiagonal) -> Result<HermitianMatrix> {
    if a0.dim() != x.len() {
        return Err(Error::DimensionMismatch { expected: a0.dim(), got: x.len() });
    }
    let mut inner = a0.inner.clone();
    for (i, xi) in x.0.iter().enumerate() {
        inner[(i, i)].re += xi;
    }
    Ok(HermitianMatrix { inner })
}

fn max_qr_iterations(n: usize) -> usize {
    200 * n.max(8)
}

pub fn eigendecompose(a: &HermitianMatrix) -> Result<EigenSystem> {
    let n = a.dim();
    let iterations = max_qr_iterations(n);
    let eig = SymmetricEigen::try_new(a.inner.clone(), f64::EPSILON, iterations)
        .ok_or(Error::EigenNonConvergence { iterations })?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok(EigenSystem { values, vectors })
}

/// Groups consecutive sorted eigenvalues whose gap is at most
/// `cluster_tol · (1 + max|λ|)`. Clusters come out in descending order.
pub fn cluster_eigenspaces(es: &EigenSystem, cluster_tol: f64) -> Vec<EigenspaceBasis> {
    let n = es.dim();
    let scale = 1.0 + es.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let threshold = cluster_tol * scale;
    let mut clusters = Vec::new();
    let mut start = 0;
    for i in 1..=n {
        if i == n || es.values[i - 1] - es.values[i] > threshold {
            let idx: Vec<usize> = (start..i).collect();
            let mean = idx.iter().map(|&k| es.values[k]).sum::<f64>() / idx.len() as f64;
            let columns = es.vectors.select_columns(&idx);
            clusters.push(EigenspaceBasis::new(mean, columns));
            start = i;
        }
    }
    clusters
}

/// Eigenspace of the largest eigenvalue (clustered).
pub fn top_eigenspace(es: &EigenSystem, cluster_tol: f64) -> EigenspaceBasis {
    cluster_eigenspaces(es, cluster_tol).remove(0)
}

/// Eigenspace of the smallest eigenvalue (clustered).
pub fn bottom_eigenspace(es: &EigenSystem, cluster_tol: f64) -> EigenspaceBasis {
    cluster_eigenspaces(es, cluster_tol).pop().expect("nonempty spectrum")
}

/// `[[Re A, −Im A], [Im A, Re A]]`.
pub fn complex_to_real_embed(a: &HermitianMatrix) -> DMatrix<f64> {
    let n = a.dim();
    DMatrix::from_fn(2 * n, 2 * n, |i, j| {
        let z = a.inner[(i % n, j % n)];
        match (i < n, j < n) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    })
}

pub fn spectral_norm(a: &HermitianMatrix) -> Result<f64> {
    Ok(eigendecompose(a)?.norm())
}

/// `φ(x) = ‖A0 + Diag(x)‖`.
pub fn phi(a0: &HermitianMatrix, x: &RealDiagonal) -> Result<f64> {
    spectral_norm(&shifted(a0, x)?)
}

/// Spectral norm of a general (not necessarily Hermitian) complex matrix.
pub fn operator_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().singular_values().iter().fold(0.0_f64, |a, &b| a.max(b))
}

/// Hermitian matrix of a square complex block, symmetrizing round-off.
pub(crate) fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// Eigen-decomposition of a small Hermitian block (no validation).
pub(crate) fn eigh_block(m: &CMatrix) -> Result<EigenSystem> {
    eigendecompose(&HermitianMatrix::symmetrized(m.clone()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn shifted_examples() {
        let z = HermitianMatrix::zeros(2);
        let r = shifted(&z, &RealDiagonal::new(vec![1.0, 2.0])).unwrap();
        assert_eq!(r, HermitianMatrix::from_diagonal(&[1.0, 2.0]));

        let x = HermitianMatrix::from_real_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        assert_eq!(shifted(&x, &RealDiagonal::zeros(2)).unwrap(), x);

        let d = HermitianMatrix::from_diagonal(&[3.0, 1.0]);
        let r = shifted(&d, &RealDiagonal::new(vec![-3.0, -1.0])).unwrap();
        assert_eq!(r, HermitianMatrix::zeros(2));
    }

    #[test]
    fn shifted_rejects_mismatch() {
        let z = HermitianMatrix::zeros(3);
        assert!(matches!(
            shifted(&z, &RealDiagonal::zeros(2)),
            Err(Error::DimensionMismatch { expected: 3, got: 2 })
        ));
    }

    #[test]
    fn construction_checks_hermiticity() {
        let bad = CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(2.0, 0.0), c(0.0, 0.0)]);
        assert!(matches!(HermitianMatrix::new(bad), Err(Error::NotHermitian { .. })));
        let bad_diag = CMatrix::from_row_slice(1, 1, &[c(1.0, 0.5)]);
        assert!(HermitianMatrix::new(bad_diag).is_err());
        // tiny defect within tolerance is symmetrized away
        let near = CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(1.0, 1e-14), c(1.0, 0.0), c(0.0, 0.0)]);
        let h = HermitianMatrix::new(near).unwrap();
        assert_eq!(h.get(0, 1), h.get(1, 0).conj());
        assert!(matches!(HermitianMatrix::new(CMatrix::zeros(0, 0)), Err(Error::Empty)));
    }

    #[test]
    fn eigen_examples() {
        let x = HermitianMatrix::from_real_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let es = eigendecompose(&x).unwrap();
        assert!((es.values[0] - 1.0).abs() < 1e-14);
        assert!((es.values[1] + 1.0).abs() < 1e-14);
        // phase-invariant comparison: |v_k|^2 = 1/2
        for col in 0..2 {
            for k in 0..2 {
                assert!((es.vectors[(k, col)].norm_sqr() - 0.5).abs() < 1e-14);
            }
        }
        let top = es.vectors.column(0);
        assert!((top[0] * top[1].conj()).re > 0.0);

        let d = HermitianMatrix::from_diagonal(&[3.0, 1.0, 2.0]);
        let es = eigendecompose(&d).unwrap();
        assert_eq!(es.values, vec![3.0, 2.0, 1.0]);
    }

    #[test]
    fn clustering_examples() {
        let mk = |values: Vec<f64>| EigenSystem { vectors: CMatrix::identity(values.len(), values.len()), values };
        let cl = cluster_eigenspaces(&mk(vec![1.0, 1.0, 0.0]), 1e-9);
        assert_eq!(cl.iter().map(|c| c.multiplicity()).collect::<Vec<_>>(), vec![2, 1]);
        assert_eq!(cl[0].eigenvalue, 1.0);

        let cl = cluster_eigenspaces(&mk(vec![1.0, 1.0 - 1e-12, 0.0]), 1e-9);
        assert_eq!(cl[0].multiplicity(), 2);

        let cl = cluster_eigenspaces(&mk(vec![1.0, 1.0 - 1e-12, 0.0]), 1e-15);
        assert_eq!(cl.len(), 3);
    }

    #[test]
    fn embedding_examples() {
        let a = HermitianMatrix::from_real_rows(&[vec![1.0, 2.0], vec![2.0, 3.0]]).unwrap();
        let e = complex_to_real_embed(&a);
        let expected = DMatrix::from_row_slice(4, 4, &[
            1.0, 2.0, 0.0, 0.0, //
            2.0, 3.0, 0.0, 0.0, //
            0.0, 0.0, 1.0, 2.0, //
            0.0, 0.0, 2.0, 3.0,
        ]);
        assert_eq!(e, expected);

        let pauli_y = HermitianMatrix::from_rows(&[vec![c(0.0, 0.0), c(0.0, -1.0)], vec![c(0.0, 1.0), c(0.0, 0.0)]]).unwrap();
        let e = complex_to_real_embed(&pauli_y);
        let expected = DMatrix::from_row_slice(4, 4, &[
            0.0, 0.0, 0.0, 1.0, //
            0.0, 0.0, -1.0, 0.0, //
            0.0, -1.0, 0.0, 0.0, //
            1.0, 0.0, 0.0, 0.0,
        ]);
        assert_eq!(e, expected);
        let es = eigendecompose(&HermitianMatrix::from_real(&e).unwrap()).unwrap();
        for (v, w) in es.values.iter().zip([1.0, 1.0, -1.0, -1.0]) {
            assert!((v - w).abs() < 1e-12);
        }
    }

    #[test]
    fn spectral_norm_examples() {
        assert_eq!(spectral_norm(&HermitianMatrix::zeros(3)).unwrap(), 0.0);
        let x = HermitianMatrix::from_real_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        assert!((spectral_norm(&x).unwrap() - 1.0).abs() < 1e-14);
        assert!((spectral_norm(&HermitianMatrix::from_diagonal(&[-3.0, 2.0])).unwrap() - 3.0).abs() < 1e-14);
    }
}

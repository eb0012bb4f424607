//! Moment sets of subspaces, density matrices and joint-numerical-range
//! points, plus the distance between two moment sets.
//!
//! For a subspace `S` with orthonormal basis `Q`, the moment set is
//! `m_S = { diag(Q R Q*) : R ⪰ 0, tr R = 1 }`, the convex hull of the
//! coordinate-wise squared moduli of unit vectors in `S`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hermitian::{eigh_block, hermitian_part, CMatrix, EigenspaceBasis};
use crate::spectraplex::{diag_image, Block, Problem, Stopping};

pub const DEFAULT_GAP_TOL: f64 = 1e-9;
pub const DEFAULT_MAX_ITERS: usize = 5000;

const DENSITY_TOL: f64 = 1e-10;
const MOMENT_SUM_TOL: f64 = 1e-10;
const MOMENT_NEG_TOL: f64 = 1e-12;

/// Positive semidefinite Hermitian matrix with unit trace.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    entries: CMatrix,
}

impl DensityMatrix {
    pub fn new(m: CMatrix) -> Result<Self> {
        let s = m.nrows();
        if s == 0 || m.ncols() != s {
            return Err(Error::InvalidDensity(format!("shape {}x{} is not square and nonempty", s, m.ncols())));
        }
        let scale = m.iter().fold(1.0_f64, |a, z| a.max(z.norm()));
        let asym = (&m - m.adjoint()).iter().fold(0.0_f64, |a, z| a.max(z.norm()));
        if asym > DENSITY_TOL * scale {
            return Err(Error::InvalidDensity(format!("not Hermitian (defect {asym:e})")));
        }
        let m = hermitian_part(&m);
        let trace: f64 = (0..s).map(|i| m[(i, i)].re).sum();
        if (trace - 1.0).abs() > DENSITY_TOL {
            return Err(Error::InvalidDensity(format!("trace {trace} != 1")));
        }
        let lowest = eigh_block(&m)?.lambda_min();
        if lowest < -DENSITY_TOL {
            return Err(Error::InvalidDensity(format!("minimum eigenvalue {lowest:e} < 0")));
        }
        Ok(Self { entries: m })
    }

    /// `I / s`.
    pub fn maximally_mixed(s: usize) -> Self {
        Self { entries: CMatrix::identity(s, s).scale(1.0 / s as f64) }
    }

    /// `v v* / ‖v‖²`.
    pub fn pure(v: &[Complex64]) -> Result<Self> {
        let norm_sq: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if !(norm_sq > 0.0) {
            return Err(Error::InvalidDensity("zero vector".into()));
        }
        let s = v.len();
        Ok(Self { entries: CMatrix::from_fn(s, s, |i, j| v[i] * v[j].conj() / norm_sq) })
    }

    /// Normalizes a PSD block by its trace. Tiny negative eigenvalues from
    /// round-off are clipped.
    pub(crate) fn from_psd_unnormalized(m: &CMatrix) -> Result<Self> {
        let es = eigh_block(m)?;
        let s = es.dim();
        let clipped: Vec<f64> = es.values.iter().map(|v| v.max(0.0)).collect();
        let total: f64 = clipped.iter().sum();
        if !(total > 0.0) {
            return Err(Error::InvalidDensity("zero trace".into()));
        }
        let v = &es.vectors;
        let scaled = CMatrix::from_fn(s, s, |i, j| v[(i, j)] * (clipped[j] / total));
        Ok(Self { entries: hermitian_part(&(scaled * v.adjoint())) })
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.entries
    }

    pub fn scaled(&self, c: f64) -> CMatrix {
        self.entries.scale(c)
    }
}

/// Nonnegative real vector summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentVector(Vec<f64>);

impl MomentVector {
    pub fn new(v: Vec<f64>) -> Result<Self> {
        let sum: f64 = v.iter().sum();
        if (sum - 1.0).abs() > MOMENT_SUM_TOL {
            return Err(Error::Precondition(format!("moment vector sums to {sum}")));
        }
        if let Some(bad) = v.iter().find(|&&x| x < -MOMENT_NEG_TOL) {
            return Err(Error::Precondition(format!("moment vector has negative entry {bad}")));
        }
        Ok(Self(v))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

/// `diag(Q R Q*)`, an element of the moment set of `span(Q)`.
pub fn moment_element(q: &EigenspaceBasis, r: &DensityMatrix) -> Result<MomentVector> {
    if r.dim() != q.multiplicity() {
        return Err(Error::DimensionMismatch { expected: q.multiplicity(), got: r.dim() });
    }
    MomentVector::new(diag_image(&q.columns, r.matrix()))
}

/// Barycenter of the moment set face reached with `R = I/s`.
pub fn moment_barycenter(q: &EigenspaceBasis) -> Vec<f64> {
    let s = q.multiplicity() as f64;
    (0..q.ambient_dim())
        .map(|k| q.columns.row(k).iter().map(|z| z.norm_sqr()).sum::<f64>() / s)
        .collect()
}

/// Joint-numerical-range point `( tr(P_S E_j P_S ρ) )_j` for the requested
/// coordinate indices (0-based), where `P_S = Q Q*`.
pub fn jnr_point(basis: &EigenspaceBasis, rho: &DensityMatrix, indices: &[usize]) -> Result<Vec<f64>> {
    let n = basis.ambient_dim();
    if rho.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, got: rho.dim() });
    }
    if let Some(&index) = indices.iter().find(|&&j| j >= n) {
        return Err(Error::IndexOutOfRange { index, dim: n });
    }
    let p = basis.projector();
    let prp = &p * rho.matrix() * &p;
    Ok(indices.iter().map(|&j| prp[(j, j)].re).collect())
}

/// Result of minimizing `‖diag(Q1 Y Q1*) − diag(Q2 Z Q2*)‖` over density
/// matrices `Y`, `Z`.
#[derive(Debug, Clone)]
pub struct MomentDistance {
    pub distance: f64,
    pub y: DensityMatrix,
    pub z: DensityMatrix,
    /// Frank–Wolfe duality gap of the squared distance at the returned point.
    pub certificate_gap: f64,
    pub iterations: usize,
    /// True when either `distance ≤ gap_tol` (sets intersect) or the duality
    /// gap is small enough to prove the sets are disjoint.
    pub converged: bool,
    /// Squared distance after each iteration, starting with the initial point.
    pub history: Vec<f64>,
}

impl MomentDistance {
    pub fn intersects(&self, gap_tol: f64) -> bool {
        self.distance <= gap_tol
    }

    /// Nearest points `(diag(Q1 Y Q1*), diag(Q2 Z Q2*))`.
    pub fn nearest_points(&self, q1: &EigenspaceBasis, q2: &EigenspaceBasis) -> (Vec<f64>, Vec<f64>) {
        (diag_image(&q1.columns, self.y.matrix()), diag_image(&q2.columns, self.z.matrix()))
    }
}

pub fn moment_set_distance(q1: &EigenspaceBasis, q2: &EigenspaceBasis, max_iters: usize, gap_tol: f64) -> Result<MomentDistance> {
    moment_set_distance_folded(q1, q2, None, max_iters, gap_tol)
}

/// Distance between the images of two moment sets under a coordinate fold
/// (output coordinate `j` sums the diagonal entries in `fold[j]`).
pub(crate) fn moment_set_distance_folded(
    q1: &EigenspaceBasis,
    q2: &EigenspaceBasis,
    fold: Option<&[Vec<usize>]>,
    max_iters: usize,
    gap_tol: f64,
) -> Result<MomentDistance> {
    if q1.ambient_dim() != q2.ambient_dim() {
        return Err(Error::DimensionMismatch { expected: q1.ambient_dim(), got: q2.ambient_dim() });
    }
    if !(gap_tol > 0.0) {
        return Err(Error::InvalidParameter(format!("gap_tol must be positive, got {gap_tol}")));
    }
    let stop = Stopping { max_iters, dist_tol: gap_tol, gap_abs: 0.0, gap_rel: gap_tol };
    distance_with(q1, q2, fold, &stop)
}

/// Nearest points of two moment sets, accurate only to a relative duality
/// gap of `gap_rel` unless the sets come within `dist_tol`.
pub(crate) fn approximate_moment_distance(
    q1: &EigenspaceBasis,
    q2: &EigenspaceBasis,
    max_iters: usize,
    dist_tol: f64,
    gap_rel: f64,
) -> Result<MomentDistance> {
    distance_with(q1, q2, None, &Stopping { max_iters, dist_tol, gap_abs: 0.0, gap_rel })
}

fn distance_with(q1: &EigenspaceBasis, q2: &EigenspaceBasis, fold: Option<&[Vec<usize>]>, stop: &Stopping) -> Result<MomentDistance> {
    if q1.ambient_dim() != q2.ambient_dim() {
        return Err(Error::DimensionMismatch { expected: q1.ambient_dim(), got: q2.ambient_dim() });
    }
    let problem = Problem::new(
        vec![Block { q: q1.columns.clone(), sign: 1.0 }, Block { q: q2.columns.clone(), sign: -1.0 }],
        vec![vec![0], vec![1]],
    );
    let problem = match fold {
        Some(f) => problem.with_fold(f.to_vec()),
        None => problem,
    };
    let sol = problem.solve(problem.barycenter(), stop)?;
    let y = DensityMatrix::from_psd_unnormalized(&sol.blocks[0])?;
    let z = DensityMatrix::from_psd_unnormalized(&sol.blocks[1])?;
    Ok(MomentDistance {
        distance: sol.objective.sqrt(),
        y,
        z,
        certificate_gap: sol.gap,
        iterations: sol.iterations,
        converged: sol.converged,
        history: sol.history,
    })
}

/// Least-norm element of `co(m_{S1} ∪ −m_{S2})` together with the weights
/// `(U, V)` (PSD, `tr U + tr V = 1`) that produce it.
#[derive(Debug, Clone)]
pub struct HullPoint {
    pub point: Vec<f64>,
    pub u: CMatrix,
    pub v: CMatrix,
    pub gap: f64,
    pub converged: bool,
}

pub fn least_norm_hull_point(
    q1: Option<&EigenspaceBasis>,
    q2: Option<&EigenspaceBasis>,
    max_iters: usize,
    tol: f64,
) -> Result<HullPoint> {
    let mut blocks = Vec::new();
    if let Some(q) = q1 {
        blocks.push(Block { q: q.columns.clone(), sign: 1.0 });
    }
    if let Some(q) = q2 {
        blocks.push(Block { q: q.columns.clone(), sign: -1.0 });
    }
    if blocks.is_empty() {
        return Err(Error::Precondition("at least one eigenspace is required".into()));
    }
    let group = (0..blocks.len()).collect();
    let problem = Problem::new(blocks, vec![group]);
    let stop = Stopping { max_iters, dist_tol: tol, gap_abs: tol * tol, gap_rel: 0.0 };
    let sol = problem.solve(problem.barycenter(), &stop)?;
    let mut it = sol.blocks.into_iter();
    let (u, v) = match (q1, q2) {
        (Some(_), Some(_)) => (it.next().unwrap(), it.next().unwrap()),
        (Some(_), None) => (it.next().unwrap(), CMatrix::zeros(0, 0)),
        _ => (CMatrix::zeros(0, 0), it.next().unwrap()),
    };
    Ok(HullPoint { point: sol.residual, u, v, gap: sol.gap, converged: sol.converged })
}

//! Closed-form minimizing diagonals for rank-one matrices `h h*` with a unit
//! vector `h`, the closed-polygon construction behind the spread case, and
//! generators of matrices known to be minimal.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hermitian::{eigendecompose, HermitianMatrix, RealDiagonal};

const UNIT_TOL: f64 = 1e-10;
const POLYGON_SUM_TOL: f64 = 1e-12;
const POLYGON_SIDE_SLACK: f64 = 1e-15;
/// `|h_j|²` within this of `1/2` is the boundary between the two cases.
const BOUNDARY_TOL: f64 = 1e-12;

/// Complex vector with `Σ |h_j|² = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitVector(Vec<Complex64>);

impl UnitVector {
    pub fn new(h: Vec<Complex64>) -> Result<Self> {
        Self::with_tolerance(h, UNIT_TOL)
    }

    /// Accepts `h` when `|‖h‖² − 1| ≤ tol`, then renormalizes exactly.
    pub fn with_tolerance(h: Vec<Complex64>, tol: f64) -> Result<Self> {
        let norm_sq: f64 = h.iter().map(|z| z.norm_sqr()).sum();
        if h.is_empty() || !((norm_sq - 1.0).abs() <= tol) {
            return Err(Error::NotUnitVector { norm_sq });
        }
        let norm = norm_sq.sqrt();
        Ok(Self(h.into_iter().map(|z| z / norm).collect()))
    }

    pub fn from_real(h: &[f64]) -> Result<Self> {
        Self::new(h.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    pub fn normalized(h: &[Complex64]) -> Result<Self> {
        let norm_sq: f64 = h.iter().map(|z| z.norm_sqr()).sum();
        if !(norm_sq > 0.0) {
            return Err(Error::NotUnitVector { norm_sq });
        }
        Ok(Self(h.iter().map(|z| z / norm_sq.sqrt()).collect()))
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn weights(&self) -> Vec<f64> {
        self.0.iter().map(|z| z.norm_sqr()).collect()
    }

    pub fn projector(&self) -> HermitianMatrix {
        HermitianMatrix::rank_one(&self.0, 1.0)
    }

    fn largest_weight(&self) -> (usize, f64) {
        self.weights()
            .into_iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (i, w)| if w > best.1 { (i, w) } else { best })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RankOneCase {
    /// Some `|h_{j0}|² > 1/2`.
    BigCoordinate,
    /// Every `|h_j|² < 1/2`.
    Spread,
    /// `max |h_j|² = 1/2`; both formulas give `−½·1`.
    Boundary,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankOneSolution {
    /// `d` such that `h h* + Diag(d)` is minimal.
    pub diagonal: RealDiagonal,
    pub minimal_norm: f64,
    pub case_tag: RankOneCase,
    pub unique: bool,
    /// The big coordinate `j0` (0-based) in the `BigCoordinate` case.
    pub big_index: Option<usize>,
}

pub fn minimizing_diagonal(h: &UnitVector) -> RankOneSolution {
    let n = h.len();
    let unique = h.as_slice().iter().all(|z| z.norm_sqr() > 0.0);
    let (j0, p) = h.largest_weight();
    if p > 0.5 + BOUNDARY_TOL {
        let mut d = vec![p - 1.0; n];
        d[j0] += 1.0 - 2.0 * p;
        RankOneSolution {
            diagonal: RealDiagonal::new(d),
            minimal_norm: (p * (1.0 - p)).sqrt(),
            case_tag: RankOneCase::BigCoordinate,
            unique,
            big_index: Some(j0),
        }
    } else {
        let case_tag = if (p - 0.5).abs() <= BOUNDARY_TOL { RankOneCase::Boundary } else { RankOneCase::Spread };
        RankOneSolution { diagonal: RealDiagonal::new(vec![-0.5; n]), minimal_norm: 0.5, case_tag, unique, big_index: None }
    }
}

/// Minimizing diagonal of `r · h h*` for `r > 0`.
pub fn minimizing_diagonal_scaled(h: &UnitVector, r: f64) -> Result<RankOneSolution> {
    if !(r > 0.0) {
        return Err(Error::InvalidParameter(format!("scale must be positive, got {r}")));
    }
    let mut sol = minimizing_diagonal(h);
    sol.diagonal = RealDiagonal::new(sol.diagonal.0.iter().map(|v| v * r).collect());
    sol.minimal_norm *= r;
    Ok(sol)
}

/// Angles `θ_j` with `Σ e^{iθ_j} l_j = 0` for side lengths summing to one,
/// none longer than `1/2`.
///
/// Lengths are sorted descending and dealt greedily into the lightest of
/// three groups; every group then weighs at most `1/2`, so the three group
/// sums form a (possibly flat) triangle. Each group's segments are laid
/// collinearly along one edge.
pub fn closed_polygon_angles(lengths: &[f64]) -> Result<Vec<f64>> {
    if lengths.is_empty() {
        return Err(Error::Precondition("no side lengths".into()));
    }
    if let Some(index) = lengths.iter().position(|&l| !(l >= 0.0)) {
        return Err(Error::Precondition(format!("side {index} has negative length {}", lengths[index])));
    }
    let total: f64 = lengths.iter().sum();
    if (total - 1.0).abs() > POLYGON_SUM_TOL {
        return Err(Error::Precondition(format!("side lengths sum to {total}, expected 1")));
    }
    if let Some(index) = lengths.iter().position(|&l| l > 0.5 + POLYGON_SIDE_SLACK) {
        return Err(Error::PolygonInfeasible { index, length: lengths[index] });
    }

    let mut order: Vec<usize> = (0..lengths.len()).collect();
    order.sort_by(|&a, &b| lengths[b].total_cmp(&lengths[a]).then(a.cmp(&b)));
    let mut sums = [0.0_f64; 3];
    let mut group = vec![0usize; lengths.len()];
    for &i in &order {
        let g = (0..3).fold(0, |best, g| if sums[g] < sums[best] { g } else { best });
        group[i] = g;
        sums[g] += lengths[i];
    }

    // Triangle 0 → P1 → P2 → 0 with |P1| = s0, |P2 − P1| = s1, |P2| = s2.
    let [s0, s1, s2] = sums;
    let px = (s0 * s0 + s2 * s2 - s1 * s1) / (2.0 * s0);
    let py = (s2 * s2 - px * px).max(0.0).sqrt();
    let edge_angle = |dx: f64, dy: f64| {
        if dx == 0.0 && dy == 0.0 {
            return 0.0;
        }
        let a = dy.atan2(dx);
        if a <= -PI { a + 2.0 * PI } else { a }
    };
    let angles = [0.0, edge_angle(px - s0, py), edge_angle(-px, 0.0 - py)];
    Ok(group.iter().map(|&g| canonical_angle(angles[g])).collect())
}

/// Maps `−π` (and its round-off neighbourhood of `−0.0` sign flips) to `π`.
fn canonical_angle(a: f64) -> f64 {
    if a <= -PI + 1e-15 { a + 2.0 * PI } else { a }
}

/// `|Σ e^{iθ_j} l_j|`.
pub fn polygon_residual(lengths: &[f64], angles: &[f64]) -> f64 {
    lengths.iter().zip(angles).map(|(&l, &t)| Complex64::from_polar(l, t)).sum::<Complex64>().norm()
}

/// Unit vector `k ⟂ h` with `|k_j| = |h_j|`, built from the closed polygon
/// with sides `|h_j|²`: `k_j = |h_j| e^{−i(θ_j − α_j)}` where `h_j = |h_j| e^{iα_j}`.
pub fn orthogonal_partner(h: &UnitVector) -> Result<UnitVector> {
    let weights = h.weights();
    let total: f64 = weights.iter().sum();
    let lengths: Vec<f64> = weights.iter().map(|w| w / total).collect();
    let theta = closed_polygon_angles(&lengths)?;
    let k = h
        .as_slice()
        .iter()
        .zip(&theta)
        .map(|(z, &t)| Complex64::from_polar(z.norm(), -(t - z.arg())))
        .collect();
    Ok(UnitVector(k))
}

/// `⟨h, k⟩ = Σ h_j conj(k_j)`.
pub fn inner(h: &[Complex64], k: &[Complex64]) -> Complex64 {
    h.iter().zip(k).map(|(a, b)| a * b.conj()).sum()
}

fn require_spread(h: &UnitVector) -> Result<()> {
    if let Some(j) = h.weights().iter().position(|&w| w > 0.5 + BOUNDARY_TOL) {
        return Err(Error::Precondition(format!("|h_{j}|^2 = {} exceeds 1/2", h.weights()[j])));
    }
    Ok(())
}

/// The two minimal matrices `h h* − ½(I − e_{j0}e_{j0}*) ± ½ e_{j0}e_{j0}*`
/// for a spread `h` with `h_{j0} = 0`: the diagonal entry at `j0` of a
/// minimizing diagonal can be either `+½` or `−½`, so it is not unique.
pub fn nonunique_diagonals(h: &UnitVector, j0: usize) -> Result<(HermitianMatrix, HermitianMatrix)> {
    if j0 >= h.len() {
        return Err(Error::IndexOutOfRange { index: j0, dim: h.len() });
    }
    require_spread(h)?;
    if h.as_slice()[j0].norm() != 0.0 {
        return Err(Error::Precondition(format!("h_{j0} must be zero")));
    }
    let base = h.projector();
    let make = |sign: f64| {
        let mut d = vec![-0.5; h.len()];
        d[j0] = 0.5 * sign;
        base.add(&HermitianMatrix::from_diagonal(&d))
    };
    Ok((make(1.0)?, make(-1.0)?))
}

/// `A = ½ I − h h*` built from the first `n` coordinates of `h`
/// (renormalized). `A` is minimal: its minimizing diagonal is zero.
pub fn generate_minimal_from_negative(h: &UnitVector, n: usize) -> Result<HermitianMatrix> {
    if n == 0 || n > h.len() {
        return Err(Error::Precondition(format!("truncation {n} outside 1..={}", h.len())));
    }
    let h = UnitVector::normalized(&h.as_slice()[..n])?;
    require_spread(&h)?;
    if let Some(j) = h.as_slice().iter().position(|z| z.norm() == 0.0) {
        return Err(Error::Precondition(format!("h_{j} must be nonzero")));
    }
    HermitianMatrix::identity(n).scale(0.5).sub(&h.projector())
}

/// Outcome of the zero-diagonal big-column test.
#[derive(Debug, Clone, PartialEq)]
pub struct ColumnCriterion {
    pub holds: bool,
    /// `‖col_{j0}(T)‖`, which equals `‖T‖` when the test holds.
    pub column_norm: f64,
    /// `‖T^{(j0)}‖`, the norm with row and column `j0` removed.
    pub reduced_norm: f64,
}

/// Checks `T_{j0 j0} = 0`, `T_{j0 k} ≠ 0` for `k ≠ j0`,
/// `‖col_{j0}(T)‖ ≥ ‖T^{(j0)}‖` and `col_{j0}(T) ⟂ col_k(T)` for `k ≠ j0`.
/// When all hold, `T` is minimal with `‖T‖ = ‖col_{j0}(T)‖`.
pub fn verify_column_criterion(t: &HermitianMatrix, j0: usize, tol: f64) -> Result<ColumnCriterion> {
    let n = t.dim();
    if j0 >= n {
        return Err(Error::IndexOutOfRange { index: j0, dim: n });
    }
    let m = t.matrix();
    let col0 = m.column(j0);
    let column_norm = col0.norm();
    let mut reduced = m.clone();
    for k in 0..n {
        reduced[(j0, k)] = Complex64::new(0.0, 0.0);
        reduced[(k, j0)] = Complex64::new(0.0, 0.0);
    }
    let reduced_norm = eigendecompose(&HermitianMatrix::new(reduced)?)?.norm();
    let scale = 1.0 + t.max_abs_entry();
    let zero_diag = m[(j0, j0)].norm() <= tol * scale;
    let nonzero_row = (0..n).filter(|&k| k != j0).all(|k| m[(j0, k)].norm() > tol * scale);
    let dominates = column_norm >= reduced_norm - tol * scale;
    let orthogonal = (0..n)
        .filter(|&k| k != j0)
        .all(|k| m.column(k).dotc(&col0).norm() <= tol * scale * scale);
    Ok(ColumnCriterion { holds: zero_diag && nonzero_row && dominates && orthogonal, column_norm, reduced_norm })
}

/// Candidate minimizing diagonal from the big-column lemma, in the
/// `h h* + Diag(d)` convention, with `d_{j0} = −|h_{j0}|²` and, for `j ≠ j0`,
/// the entry that makes `col_j ⟂ col_{j0}`. The entries are real only when
/// the phases of `h` line up; `max_imag` reports the violation.
#[derive(Debug, Clone, PartialEq)]
pub struct LemmaDiagonal {
    pub entries: Vec<Complex64>,
    pub max_imag: f64,
}

impl LemmaDiagonal {
    pub fn is_real(&self, tol: f64) -> bool {
        self.max_imag <= tol
    }

    pub fn real(&self) -> RealDiagonal {
        RealDiagonal::new(self.entries.iter().map(|z| z.re).collect())
    }
}

pub fn lemma_diagonal(h: &UnitVector, j0: usize) -> Result<LemmaDiagonal> {
    let hs = h.as_slice();
    if j0 >= hs.len() {
        return Err(Error::IndexOutOfRange { index: j0, dim: hs.len() });
    }
    let p0 = hs[j0].norm_sqr();
    if let Some(j) = hs.iter().position(|z| z.norm() == 0.0) {
        return Err(Error::Precondition(format!("h_{j} must be nonzero")));
    }
    // (hh* + D)_{jj} = −⟨col_j, col_{j0}⟩_{without entry j} / (hh* + D)_{j j0}
    let entries: Vec<Complex64> = hs
        .iter()
        .enumerate()
        .map(|(j, &hj)| {
            if j == j0 {
                return Complex64::new(-p0, 0.0);
            }
            let pj = hj.norm_sqr();
            let rest = 1.0 - pj - p0;
            let phase = hj.conj() * hs[j0] / (hj * hs[j0].conj());
            -(Complex64::new(pj, 0.0) + phase * rest)
        })
        .collect();
    let max_imag = entries.iter().fold(0.0_f64, |m, z| m.max(z.im.abs()));
    Ok(LemmaDiagonal { entries, max_imag })
}

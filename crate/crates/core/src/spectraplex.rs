//! Conditional-gradient solver for
//!
//! ```text
//!   minimize ‖ Σ_b σ_b · diag(Q_b R_b Q_b*) ‖²
//! ```
//!
//! over Hermitian blocks `R_b ⪰ 0`, where the blocks are partitioned into
//! groups and the traces inside each group sum to one. Two groups of one
//! block each give the distance between two moment sets; one group holding
//! both blocks gives the least-norm point of `co(m_1 ∪ −m_2)`.
//!
//! Each iteration takes a Frank–Wolfe step (rank-one vertex from the minimal
//! eigenvector of the gradient block, exact line search) followed by a
//! corrective least-squares step restricted to the current face of the
//! product of spectrahedra. Both steps are monotone.

use nalgebra::{DMatrix, DVector, SVD};
use num_complex::Complex64;

use crate::error::Result;
use crate::hermitian::{eigh_block, hermitian_part, CMatrix};

/// Eigenvalues of a block below this are treated as outside the face.
const FACE_TOL: f64 = 1e-12;
const PINV_TOL: f64 = 1e-12;
/// Bound on consecutive boundary-capped corrective steps per iteration.
const MAX_FACE_DROPS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Correction {
    None,
    /// Stopped at the PSD boundary; one face direction hit zero.
    Capped,
    Full,
}

#[derive(Debug, Clone)]
pub(crate) struct Block {
    pub q: CMatrix,
    pub sign: f64,
}

#[derive(Debug, Clone)]
pub(crate) struct Stopping {
    pub max_iters: usize,
    /// Stop once `‖L(R)‖ ≤ dist_tol`.
    pub dist_tol: f64,
    /// Stop once the duality gap is at most `gap_abs + gap_rel · ‖L(R)‖`.
    pub gap_abs: f64,
    pub gap_rel: f64,
}

#[derive(Debug, Clone)]
pub(crate) struct Solution {
    pub blocks: Vec<CMatrix>,
    /// `L(R)` at the returned point.
    pub residual: Vec<f64>,
    pub objective: f64,
    pub gap: f64,
    pub iterations: usize,
    pub converged: bool,
    pub history: Vec<f64>,
}

pub(crate) struct Problem {
    blocks: Vec<Block>,
    groups: Vec<Vec<usize>>,
    /// Output coordinate `j` sums the diagonal entries listed in `fold[j]`.
    fold: Vec<Vec<usize>>,
    n: usize,
}

/// `diag(Q R Q*)`.
pub(crate) fn diag_image(q: &CMatrix, r: &CMatrix) -> Vec<f64> {
    let qr = q * r;
    (0..q.nrows())
        .map(|k| (0..q.ncols()).map(|a| (qr[(k, a)] * q[(k, a)].conj()).re).sum())
        .collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn rank_one(u: &[Complex64]) -> CMatrix {
    let s = u.len();
    CMatrix::from_fn(s, s, |i, j| u[i] * u[j].conj())
}

impl Problem {
    pub fn new(blocks: Vec<Block>, groups: Vec<Vec<usize>>) -> Self {
        let ambient = blocks[0].q.nrows();
        debug_assert!(blocks.iter().all(|b| b.q.nrows() == ambient));
        let fold = (0..ambient).map(|i| vec![i]).collect();
        Self { blocks, groups, fold, n: ambient }
    }

    pub fn with_fold(mut self, fold: Vec<Vec<usize>>) -> Self {
        self.n = fold.len();
        self.fold = fold;
        self
    }

    fn fold_diag(&self, d: &[f64]) -> Vec<f64> {
        self.fold.iter().map(|idx| idx.iter().map(|&i| d[i]).sum()).collect()
    }

    fn unfold(&self, r: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.blocks[0].q.nrows()];
        for (idx, v) in self.fold.iter().zip(r) {
            for &i in idx {
                out[i] += v;
            }
        }
        out
    }

    /// Barycenter start: every group spreads its unit trace uniformly.
    pub fn barycenter(&self) -> Vec<CMatrix> {
        let mut out: Vec<CMatrix> = self.blocks.iter().map(|b| CMatrix::zeros(b.q.ncols(), b.q.ncols())).collect();
        for g in &self.groups {
            let total: usize = g.iter().map(|&b| self.blocks[b].q.ncols()).sum();
            for &b in g {
                let s = self.blocks[b].q.ncols();
                out[b] = CMatrix::identity(s, s).scale(1.0 / total as f64);
            }
        }
        out
    }

    pub fn image(&self, r: &[CMatrix]) -> Vec<f64> {
        let mut acc = vec![0.0; self.n];
        for (block, rb) in self.blocks.iter().zip(r) {
            for (a, v) in acc.iter_mut().zip(self.fold_diag(&diag_image(&block.q, rb))) {
                *a += block.sign * v;
            }
        }
        acc
    }

    /// Linear minimization oracle. Returns the vertex, its image, and the
    /// value `Σ_groups min ⟨L(vertex), residual⟩`.
    fn vertex(&self, residual: &[f64]) -> Result<(Vec<CMatrix>, Vec<f64>, f64)> {
        let mut vertex: Vec<CMatrix> = self.blocks.iter().map(|b| CMatrix::zeros(b.q.ncols(), b.q.ncols())).collect();
        let weights = self.unfold(residual);
        let mut lin = 0.0;
        for g in &self.groups {
            let mut best: Option<(f64, usize, Vec<Complex64>)> = None;
            for &b in g {
                let block = &self.blocks[b];
                let scaled: Vec<f64> = weights.iter().map(|v| v * block.sign).collect();
                let compressed = compress(&block.q, &scaled);
                let es = eigh_block(&compressed)?;
                let k = es.dim() - 1;
                let val = es.values[k];
                if best.as_ref().map_or(true, |(bv, _, _)| val < *bv) {
                    best = Some((val, b, es.vectors.column(k).iter().copied().collect()));
                }
            }
            let (val, b, u) = best.expect("group is nonempty");
            vertex[b] = rank_one(&u);
            lin += val;
        }
        let img = self.image(&vertex);
        Ok((vertex, img, lin))
    }

    /// Least-squares correction on the face spanned by the current iterate.
    fn corrective_step(&self, r: &mut [CMatrix], residual: &mut Vec<f64>) -> Result<Correction> {
        struct FaceBlock {
            basis: CMatrix,
            values: Vec<f64>,
            offset: usize,
            rank: usize,
        }
        let mut faces = Vec::with_capacity(self.blocks.len());
        let mut offset = 0;
        for rb in r.iter() {
            let es = eigh_block(rb)?;
            let keep: Vec<usize> = (0..es.dim()).filter(|&i| es.values[i] > FACE_TOL).collect();
            let basis = es.vectors.select_columns(&keep);
            let values = keep.iter().map(|&i| es.values[i]).collect();
            faces.push(FaceBlock { basis, values, offset, rank: keep.len() });
            offset += keep.len() * keep.len();
        }
        let p = offset;
        if p == 0 {
            return Ok(Correction::None);
        }
        let sqrt2 = std::f64::consts::SQRT_2;
        let mut m = DMatrix::<f64>::zeros(self.n, p);
        let mut trace_row = vec![usize::MAX; p];
        for (bi, (block, face)) in self.blocks.iter().zip(&faces).enumerate() {
            let w = &block.q * &face.basis;
            let mut col = face.offset;
            for a in 0..face.rank {
                for c in a..face.rank {
                    for (k, idx) in self.fold.iter().enumerate() {
                        let z: Complex64 = idx.iter().map(|&i| w[(i, a)] * w[(i, c)].conj()).sum();
                        if a == c {
                            m[(k, col)] = block.sign * z.re;
                        } else {
                            m[(k, col)] = block.sign * sqrt2 * z.re;
                            m[(k, col + 1)] = -block.sign * sqrt2 * z.im;
                        }
                    }
                    if a == c {
                        trace_row[col] = bi;
                        col += 1;
                    } else {
                        col += 2;
                    }
                }
            }
        }
        // Project out the per-group trace directions.
        let mut projector = DMatrix::<f64>::identity(p, p);
        for g in &self.groups {
            let idx: Vec<usize> = (0..p).filter(|&c| trace_row[c] != usize::MAX && g.contains(&trace_row[c])).collect();
            let w = 1.0 / idx.len().max(1) as f64;
            for &i in &idx {
                for &j in &idx {
                    projector[(i, j)] -= w;
                }
            }
        }
        let mp = &m * &projector;
        let rhs = DVector::from_iterator(self.n, residual.iter().map(|v| -v));
        let Some(delta) = min_norm_solve(&mp, &rhs) else {
            return Ok(Correction::None);
        };
        let delta = &projector * delta;
        let md = &m * &delta;
        let md_sq = md.norm_squared();
        if md_sq <= f64::MIN_POSITIVE {
            return Ok(Correction::None);
        }
        let mut step = (-dot(residual, md.as_slice()) / md_sq).min(1.0);
        let mut capped = false;
        if !(step > 0.0) {
            return Ok(Correction::None);
        }
        // Rebuild the Hermitian corrections and cap the step at the PSD boundary.
        let mut corrections = Vec::with_capacity(faces.len());
        for face in &faces {
            let k = face.rank;
            let mut h = CMatrix::zeros(k, k);
            let mut col = face.offset;
            for a in 0..k {
                for c in a..k {
                    if a == c {
                        h[(a, a)] = Complex64::new(delta[col], 0.0);
                        col += 1;
                    } else {
                        let z = Complex64::new(delta[col], delta[col + 1]) / sqrt2;
                        h[(a, c)] = z;
                        h[(c, a)] = z.conj();
                        col += 2;
                    }
                }
            }
            if k > 0 {
                let inv_sqrt: Vec<f64> = face.values.iter().map(|v| 1.0 / v.sqrt()).collect();
                let scaled = CMatrix::from_fn(k, k, |i, j| h[(i, j)] * inv_sqrt[i] * inv_sqrt[j]);
                let es = eigh_block(&scaled)?;
                let lowest = es.lambda_min();
                if lowest < 0.0 && -1.0 / lowest < step {
                    step = -1.0 / lowest;
                    capped = true;
                }
            }
            corrections.push(&face.basis * h * face.basis.adjoint());
        }
        if !(step > 0.0) {
            return Ok(Correction::None);
        }
        let new_residual: Vec<f64> = residual.iter().zip(md.iter()).map(|(a, b)| a + step * b).collect();
        if dot(&new_residual, &new_residual) >= dot(residual, residual) {
            return Ok(Correction::None);
        }
        for (rb, corr) in r.iter_mut().zip(corrections) {
            *rb = hermitian_part(&(&*rb + corr.scale(step)));
        }
        if capped {
            // land exactly on the boundary so the next face drops the direction
            for rb in r.iter_mut() {
                let es = eigh_block(rb)?;
                let mut fixed = CMatrix::zeros(rb.nrows(), rb.ncols());
                for (i, &v) in es.values.iter().enumerate() {
                    if v > FACE_TOL {
                        let u = es.vectors.column(i);
                        fixed += (&u * u.adjoint()).scale(v);
                    }
                }
                *rb = fixed;
            }
        }
        *residual = self.image(r);
        Ok(if capped { Correction::Capped } else { Correction::Full })
    }

    pub fn solve(&self, start: Vec<CMatrix>, stop: &Stopping) -> Result<Solution> {
        let mut r = start;
        let mut residual = self.image(&r);
        let mut f = dot(&residual, &residual);
        let mut history = vec![f];
        let mut gap = f64::INFINITY;
        let mut iterations = 0;
        let mut converged = false;
        loop {
            let dist = f.sqrt();
            if dist <= stop.dist_tol {
                converged = true;
                if gap.is_infinite() {
                    gap = self.vertex(&residual).map(|(_, _, lin)| 2.0 * (f - lin))?.max(0.0);
                }
                break;
            }
            let (vertex, vimg, lin) = self.vertex(&residual)?;
            gap = (2.0 * (f - lin)).max(0.0);
            if gap <= stop.gap_abs + stop.gap_rel * dist {
                converged = true;
                break;
            }
            if iterations >= stop.max_iters {
                break;
            }
            iterations += 1;

            let dir: Vec<f64> = vimg.iter().zip(&residual).map(|(v, c)| v - c).collect();
            let dd = dot(&dir, &dir);
            if dd > 0.0 {
                let gamma = (-dot(&residual, &dir) / dd).clamp(0.0, 1.0);
                if gamma > 0.0 {
                    for (rb, vb) in r.iter_mut().zip(&vertex) {
                        *rb = hermitian_part(&(rb.scale(1.0 - gamma) + vb.scale(gamma)));
                    }
                    residual = self.image(&r);
                }
            }
            // Active-set style: a capped step pins a direction of the face to
            // zero, so re-solve on the smaller face right away.
            for _ in 0..MAX_FACE_DROPS {
                if self.corrective_step(&mut r, &mut residual)? != Correction::Capped {
                    break;
                }
            }
            f = dot(&residual, &residual);
            history.push(f);
        }
        Ok(Solution { blocks: r, residual, objective: f, gap, iterations, converged, history })
    }
}

/// Minimum-norm least-squares solution of `A δ = b` for a wide `A`.
///
/// The SVD is taken of the tall `Aᵀ = U Σ Vᵀ`, so `A⁺ = U Σ⁺ Vᵀ`.
fn min_norm_solve(a: &DMatrix<f64>, b: &DVector<f64>) -> Option<DVector<f64>> {
    let svd = SVD::new(a.transpose(), true, true);
    let (u, v_t) = (svd.u?, svd.v_t?);
    let top = svd.singular_values.iter().fold(0.0_f64, |m, v| m.max(*v));
    if !(top > 0.0) {
        return None;
    }
    let mut coeffs = &v_t * b;
    for (c, s) in coeffs.iter_mut().zip(svd.singular_values.iter()) {
        *c = if *s > PINV_TOL * top { *c / s } else { 0.0 };
    }
    Some(u * coeffs)
}

/// `Q* · Diag(w) · Q`.
pub(crate) fn compress(q: &CMatrix, w: &[f64]) -> CMatrix {
    let wq = CMatrix::from_fn(q.nrows(), q.ncols(), |k, a| q[(k, a)] * w[k]);
    hermitian_part(&(q.adjoint() * wq))
}

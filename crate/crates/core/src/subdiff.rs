//! Subdifferentials of `λ_max`, `λ_min` and the spectral norm of
//! `A(x) = A0 + Diag(x)` as functions of the real diagonal `x`.
//!
//! Subdifferentials are returned in generator form: the basis `Q` of the
//! extreme eigenspace. Elements are `±diag(Q R Q*)` for density matrices `R`,
//! obtained through [`moment_element`](crate::moment::moment_element).

use crate::error::{Error, Result};
use crate::hermitian::{bottom_eigenspace, eigendecompose, eigh_block, shifted, top_eigenspace, EigenSystem, EigenspaceBasis, HermitianMatrix, RealDiagonal};
use crate::moment::{moment_element, DensityMatrix};

/// One side of the norm subdifferential: `m_S` (max side) or `−m_S` (min side).
#[derive(Debug, Clone)]
pub struct SideSubdiff {
    pub basis: EigenspaceBasis,
    pub negated: bool,
}

impl SideSubdiff {
    pub fn element(&self, r: &DensityMatrix) -> Result<Vec<f64>> {
        let m = moment_element(&self.basis, r)?.into_vec();
        Ok(if self.negated { m.into_iter().map(|v| -v).collect() } else { m })
    }

    /// Element at the uniform density `I/s`.
    pub fn barycenter(&self) -> Vec<f64> {
        self.element(&DensityMatrix::maximally_mixed(self.basis.multiplicity()))
            .expect("dimensions agree by construction")
    }

    /// `max_{g ∈ ∂} ⟨g, w⟩`.
    pub fn support(&self, w: &[f64]) -> Result<f64> {
        let b = eigh_block(&self.basis.compress_diagonal(w))?;
        Ok(if self.negated { -b.lambda_min() } else { b.lambda_max() })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SubdiffKind {
    MaxSide,
    MinSide,
    BothSides,
}

#[derive(Debug, Clone)]
pub struct SubdiffDescriptor {
    pub kind: SubdiffKind,
    pub qmax: Option<EigenspaceBasis>,
    pub qmin: Option<EigenspaceBasis>,
    pub lambda_max: f64,
    pub lambda_min: f64,
}

impl SubdiffDescriptor {
    pub fn norm(&self) -> f64 {
        self.lambda_max.max(-self.lambda_min)
    }

    pub fn max_side(&self) -> Option<SideSubdiff> {
        self.qmax.clone().map(|basis| SideSubdiff { basis, negated: false })
    }

    pub fn min_side(&self) -> Option<SideSubdiff> {
        self.qmin.clone().map(|basis| SideSubdiff { basis, negated: true })
    }

    /// One-sided directional derivative of `φ = ‖A(·)‖` along `w`.
    pub fn directional_derivative(&self, w: &[f64]) -> Result<f64> {
        let mut best = f64::NEG_INFINITY;
        for side in [self.max_side(), self.min_side()].into_iter().flatten() {
            best = best.max(side.support(w)?);
        }
        Ok(best)
    }
}

pub fn subdiff_lambda_max(a0: &HermitianMatrix, x: &RealDiagonal, cluster_tol: f64) -> Result<EigenspaceBasis> {
    let es = eigendecompose(&shifted(a0, x)?)?;
    Ok(top_eigenspace(&es, cluster_tol))
}

/// The subdifferential of `λ_min` is `−m_S` for the returned bottom eigenspace.
pub fn subdiff_lambda_min(a0: &HermitianMatrix, x: &RealDiagonal, cluster_tol: f64) -> Result<SideSubdiff> {
    let es = eigendecompose(&shifted(a0, x)?)?;
    Ok(SideSubdiff { basis: bottom_eigenspace(&es, cluster_tol), negated: true })
}

/// Whether `a` and `b` agree within the relative cluster tolerance of `es`.
pub(crate) fn ties(es: &EigenSystem, a: f64, b: f64, cluster_tol: f64) -> bool {
    (a - b).abs() <= cluster_tol * (1.0 + es.norm())
}

pub(crate) fn descriptor_from(es: &EigenSystem, cluster_tol: f64) -> Result<SubdiffDescriptor> {
    let norm = es.norm();
    if norm <= cluster_tol {
        return Err(Error::DegenerateZero { norm });
    }
    let (lmax, lmin) = (es.lambda_max(), es.lambda_min());
    let kind = if ties(es, lmax, -lmin, cluster_tol) {
        SubdiffKind::BothSides
    } else if lmax > -lmin {
        SubdiffKind::MaxSide
    } else {
        SubdiffKind::MinSide
    };
    let qmax = (kind != SubdiffKind::MinSide).then(|| top_eigenspace(es, cluster_tol));
    let qmin = (kind != SubdiffKind::MaxSide).then(|| bottom_eigenspace(es, cluster_tol));
    Ok(SubdiffDescriptor { kind, qmax, qmin, lambda_max: lmax, lambda_min: lmin })
}

pub fn subdiff_norm(a0: &HermitianMatrix, x: &RealDiagonal, cluster_tol: f64) -> Result<SubdiffDescriptor> {
    descriptor_from(&eigendecompose(&shifted(a0, x)?)?, cluster_tol)
}

/// `λ₁'(x; w) = λ_max(Q₁* Diag(w) Q₁)`.
pub fn directional_derivative(a0: &HermitianMatrix, x: &RealDiagonal, w: &[f64], cluster_tol: f64) -> Result<f64> {
    if w.len() != a0.dim() {
        return Err(Error::DimensionMismatch { expected: a0.dim(), got: w.len() });
    }
    let q = subdiff_lambda_max(a0, x, cluster_tol)?;
    Ok(eigh_block(&q.compress_diagonal(w))?.lambda_max())
}

//! Minimality certificates for `A(x) = A0 + Diag(x)`.
//!
//! `A(x)` is minimal (no real diagonal perturbation lowers its norm) exactly
//! when `λ_max = −λ_min` and the moment sets of the two extreme eigenspaces
//! intersect. An intersection point `diag(Q1 Y Q1*) = diag(Q2 Z Q2*)` yields
//! the trace certificate `(U, V) = (Y/2, Z/2)` and the zero-diagonal witness
//! `X = Q1 U Q1* − Q2 V Q2*`. When the sets are disjoint, the separating
//! hyperplane gives a descent direction for `φ(x) = ‖A(x)‖`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::hermitian::{
    complex_to_real_embed, eigendecompose, eigh_block, operator_norm, shifted, CMatrix, EigenSystem, EigenspaceBasis, HermitianMatrix,
    RealDiagonal, DEFAULT_CLUSTER_TOL,
};
use crate::moment::{moment_barycenter, moment_set_distance_folded, MomentVector, DEFAULT_GAP_TOL, DEFAULT_MAX_ITERS};
use crate::spectraplex::{compress, diag_image};
use crate::subdiff::{descriptor_from, SubdiffKind};

/// Relative tolerance under which `λ_max + λ_min` counts as an exact tie.
pub const DEFAULT_TIE_TOL: f64 = 1e-12;

/// A returned descent direction must have a slope below `−DESCENT_TOL`.
pub const DESCENT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CertifyParams {
    pub gap_tol: f64,
    pub max_iters: usize,
    pub cluster_tol: f64,
    pub tie_tol: f64,
}

impl Default for CertifyParams {
    fn default() -> Self {
        Self { gap_tol: DEFAULT_GAP_TOL, max_iters: DEFAULT_MAX_ITERS, cluster_tol: DEFAULT_CLUSTER_TOL, tie_tol: DEFAULT_TIE_TOL }
    }
}

impl CertifyParams {
    fn validate(&self) -> Result<()> {
        for (name, v) in [("gap_tol", self.gap_tol), ("cluster_tol", self.cluster_tol), ("tie_tol", self.tie_tol)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!("{name} must be positive and finite, got {v}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Minimal,
    NotMinimal,
    Inconclusive,
}

#[derive(Debug, Clone)]
pub struct MinimalityCertificate {
    pub verdict: Verdict,
    pub kind: SubdiffKind,
    pub norm: f64,
    pub lambda_max: f64,
    pub lambda_min: f64,
    /// Moment-set distance; present when the extreme eigenvalues tie.
    pub gap: Option<f64>,
    /// Frank–Wolfe duality gap of the distance computation.
    pub duality_gap: Option<f64>,
    pub intersection_point: Option<MomentVector>,
    pub u: Option<CMatrix>,
    pub v: Option<CMatrix>,
    pub qmax: Option<EigenspaceBasis>,
    pub qmin: Option<EigenspaceBasis>,
    pub witness_x: Option<HermitianMatrix>,
    /// Unit-norm `w` with `φ'(x; w) < 0` (present when not minimal).
    pub descent_direction: Option<Vec<f64>>,
    pub descent_slope: Option<f64>,
}

impl MinimalityCertificate {
    fn bare(kind: SubdiffKind, es: &EigenSystem) -> Self {
        Self {
            verdict: Verdict::Inconclusive,
            kind,
            norm: es.norm(),
            lambda_max: es.lambda_max(),
            lambda_min: es.lambda_min(),
            gap: None,
            duality_gap: None,
            intersection_point: None,
            u: None,
            v: None,
            qmax: None,
            qmin: None,
            witness_x: None,
            descent_direction: None,
            descent_slope: None,
        }
    }

    pub fn is_minimal(&self) -> bool {
        self.verdict == Verdict::Minimal
    }

    /// `A(x)` vanishes (up to `cluster_tol`): nothing can have a smaller norm.
    pub(crate) fn zero_norm(es: &EigenSystem) -> Self {
        Self { verdict: Verdict::Minimal, gap: Some(0.0), ..Self::bare(SubdiffKind::BothSides, es) }
    }
}

/// Maps each coordinate of `x` to the diagonal entries of the matrix it shifts.
#[derive(Debug, Clone)]
struct Fold(Vec<Vec<usize>>);

impl Fold {
    fn identity(n: usize) -> Self {
        Self((0..n).map(|i| vec![i]).collect())
    }

    fn apply(&self, d: &[f64]) -> Vec<f64> {
        self.0.iter().map(|idx| idx.iter().map(|&i| d[i]).sum()).collect()
    }

    fn unfold(&self, w: &[f64], ambient: usize) -> Vec<f64> {
        let mut out = vec![0.0; ambient];
        for (idx, v) in self.0.iter().zip(w) {
            for &i in idx {
                out[i] += v;
            }
        }
        out
    }
}

fn unit(mut w: Vec<f64>) -> Vec<f64> {
    let norm = w.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm > 0.0 {
        w.iter_mut().for_each(|v| *v /= norm);
    }
    w
}

/// `max(λ_max(Q1* W Q1), −λ_min(Q2* W Q2))` for the active sides.
fn slope(qmax: Option<&EigenspaceBasis>, qmin: Option<&EigenspaceBasis>, w_full: &[f64]) -> Result<f64> {
    let mut best = f64::NEG_INFINITY;
    if let Some(q) = qmax {
        best = best.max(eigh_block(&compress(&q.columns, w_full))?.lambda_max());
    }
    if let Some(q) = qmin {
        best = best.max(-eigh_block(&compress(&q.columns, w_full))?.lambda_min());
    }
    Ok(best)
}

fn certify_eigensystem(es: &EigenSystem, fold: &Fold, params: &CertifyParams, direct: bool) -> Result<MinimalityCertificate> {
    params.validate()?;
    let desc = descriptor_from(es, params.cluster_tol)?;
    let ambient = es.dim();
    let mut cert = MinimalityCertificate::bare(desc.kind, es);
    cert.qmax = desc.qmax.clone();
    cert.qmin = desc.qmin.clone();

    let with_descent = |cert: &mut MinimalityCertificate, w: Vec<f64>| -> Result<()> {
        let w = unit(w);
        let s = slope(cert.qmax.as_ref(), cert.qmin.as_ref(), &fold.unfold(&w, ambient))?;
        cert.verdict = if s < -DESCENT_TOL { Verdict::NotMinimal } else { Verdict::Inconclusive };
        cert.descent_direction = Some(w);
        cert.descent_slope = Some(s);
        Ok(())
    };

    match desc.kind {
        SubdiffKind::MaxSide => {
            let g = fold.apply(&moment_barycenter(desc.qmax.as_ref().unwrap()));
            with_descent(&mut cert, g.into_iter().map(|v| -v).collect())?;
            return Ok(cert);
        }
        SubdiffKind::MinSide => {
            let g = fold.apply(&moment_barycenter(desc.qmin.as_ref().unwrap()));
            with_descent(&mut cert, g)?;
            return Ok(cert);
        }
        SubdiffKind::BothSides => {}
    }

    let (q1, q2) = (desc.qmax.as_ref().unwrap(), desc.qmin.as_ref().unwrap());
    let exact_tie = (es.lambda_max() + es.lambda_min()).abs() <= params.tie_tol * (1.0 + es.norm());
    let md = moment_set_distance_folded(q1, q2, Some(&fold.0), params.max_iters, params.gap_tol)?;
    cert.gap = Some(md.distance);
    cert.duality_gap = Some(md.certificate_gap);
    let (p, q) = md.nearest_points(q1, q2);
    let (p, q) = (fold.apply(&p), fold.apply(&q));

    if md.distance <= params.gap_tol {
        let u = md.y.scaled(0.5);
        let v = md.z.scaled(0.5);
        let mid: Vec<f64> = p.iter().zip(&q).map(|(a, b)| 0.5 * (a + b)).collect();
        cert.intersection_point = MomentVector::new(mid).ok();
        if direct {
            let x = &q1.columns * &u * q1.columns.adjoint() - &q2.columns * &v * q2.columns.adjoint();
            cert.witness_x = Some(HermitianMatrix::new(crate::hermitian::hermitian_part(&x))?);
        }
        cert.u = Some(u);
        cert.v = Some(v);
        cert.verdict = if exact_tie { Verdict::Minimal } else { Verdict::Inconclusive };
        return Ok(cert);
    }

    // Separation test: a = min_{m1} ⟨·, r⟩ must exceed b = max_{m2} ⟨·, r⟩.
    let r: Vec<f64> = p.iter().zip(&q).map(|(a, b)| a - b).collect();
    let r_full = fold.unfold(&r, ambient);
    let a = eigh_block(&compress(&q1.columns, &r_full))?.lambda_min();
    let b = eigh_block(&compress(&q2.columns, &r_full))?.lambda_max();
    if a > b {
        let c = 0.5 * (a + b);
        with_descent(&mut cert, r.iter().map(|v| c - v).collect())?;
    }
    Ok(cert)
}

pub fn certify_minimality(a0: &HermitianMatrix, x: &RealDiagonal, params: &CertifyParams) -> Result<MinimalityCertificate> {
    let es = eigendecompose(&shifted(a0, x)?)?;
    certify_eigensystem(&es, &Fold::identity(a0.dim()), params, true)
}

/// Certifies an already-formed matrix `A` (i.e. `x = 0`).
pub fn certify_matrix(a: &HermitianMatrix, params: &CertifyParams) -> Result<MinimalityCertificate> {
    certify_minimality(a, &RealDiagonal::zeros(a.dim()), params)
}

/// Which diagonal pairs of the `2n × 2n` embedding a coordinate `x_k` moves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EmbeddingPairing {
    /// `A_k = E_k + E_{n+k}`: both copies of coordinate `k`.
    #[default]
    Paired,
    /// `A_k = E_k + E_{n−k}` (1-based), with index 0 read as `2n`.
    Reflected,
}

impl EmbeddingPairing {
    fn fold(self, n: usize) -> Fold {
        match self {
            Self::Paired => Fold((0..n).map(|k| vec![k, n + k]).collect()),
            Self::Reflected => Fold(
                (1..=n)
                    .map(|k| {
                        let other = if n == k { 2 * n } else { n - k };
                        vec![k - 1, other - 1]
                    })
                    .collect(),
            ),
        }
    }
}

/// Certifies minimality through the real `2n × 2n` embedding of `A(x)`,
/// with trace conditions taken against `A_k` from `pairing`.
pub fn real_embedding_certificate(
    a0: &HermitianMatrix,
    x: &RealDiagonal,
    params: &CertifyParams,
    pairing: EmbeddingPairing,
) -> Result<MinimalityCertificate> {
    let a = shifted(a0, x)?;
    let embedded = HermitianMatrix::from_real(&complex_to_real_embed(&a))?;
    let es = eigendecompose(&embedded)?;
    certify_eigensystem(&es, &pairing.fold(a.dim()), params, false)
}

fn check_psd(m: &CMatrix, tol: f64, what: &str) -> Result<()> {
    if m.nrows() == 0 {
        return Ok(());
    }
    let lowest = eigh_block(m)?.lambda_min();
    if lowest < -tol {
        return Err(Error::Precondition(format!("{what} is not PSD (min eigenvalue {lowest:e})")));
    }
    Ok(())
}

fn trace(m: &CMatrix) -> f64 {
    (0..m.nrows()).map(|i| m[(i, i)].re).sum()
}

fn verify_b_folded(
    ambient: usize,
    qmax: &EigenspaceBasis,
    qmin: &EigenspaceBasis,
    u: &CMatrix,
    v: &CMatrix,
    fold: &Fold,
    tol: f64,
) -> Result<bool> {
    for q in [qmax, qmin] {
        if q.ambient_dim() != ambient {
            return Err(Error::DimensionMismatch { expected: ambient, got: q.ambient_dim() });
        }
    }
    if u.nrows() != qmax.multiplicity() || u.ncols() != qmax.multiplicity() {
        return Err(Error::DimensionMismatch { expected: qmax.multiplicity(), got: u.nrows() });
    }
    if v.nrows() != qmin.multiplicity() || v.ncols() != qmin.multiplicity() {
        return Err(Error::DimensionMismatch { expected: qmin.multiplicity(), got: v.nrows() });
    }
    check_psd(u, tol, "U")?;
    check_psd(v, tol, "V")?;
    if (trace(u) + trace(v) - 1.0).abs() > tol {
        return Ok(false);
    }
    let du = fold.apply(&diag_image(&qmax.columns, u));
    let dv = fold.apply(&diag_image(&qmin.columns, v));
    Ok(du.iter().zip(&dv).all(|(a, b)| (a - b).abs() <= tol))
}

/// Checks `tr U + tr V = 1` and `tr(Qmax* E_k Qmax U) = tr(Qmin* E_k Qmin V)`
/// for every `k`.
pub fn verify_certificate_b(
    a: &HermitianMatrix,
    qmax: &EigenspaceBasis,
    qmin: &EigenspaceBasis,
    u: &CMatrix,
    v: &CMatrix,
    tol: f64,
) -> Result<bool> {
    verify_b_folded(a.dim(), qmax, qmin, u, v, &Fold::identity(a.dim()), tol)
}

/// The same trace conditions for a certificate of the real embedding, with
/// `E_k` replaced by the paired projectors `A_k`.
pub fn verify_embedded_certificate_b(
    n: usize,
    qmax: &EigenspaceBasis,
    qmin: &EigenspaceBasis,
    u: &CMatrix,
    v: &CMatrix,
    pairing: EmbeddingPairing,
    tol: f64,
) -> Result<bool> {
    verify_b_folded(2 * n, qmax, qmin, u, v, &pairing.fold(n), tol)
}

/// Outcome of checking a zero-diagonal witness `X` for `A`.
#[derive(Debug, Clone, PartialEq)]
pub struct WitnessCheck {
    pub max_diag: f64,
    /// `‖A X − ‖A‖ |X|‖` (operator norm).
    pub modulus_residual: f64,
    pub trace_ax: f64,
    /// `‖A‖ · ‖X‖₁`.
    pub norm_times_trace_norm: f64,
    /// Diagonal vanishes and `A X = ‖A‖ |X|`.
    pub holds_c: bool,
    /// Diagonal vanishes and `tr(A X) = ‖A‖ ‖X‖₁`.
    pub holds_d: bool,
}

impl WitnessCheck {
    pub fn holds(&self) -> bool {
        self.holds_c
    }
}

pub fn verify_witness_cd(a: &HermitianMatrix, x: &HermitianMatrix, tol: f64) -> Result<WitnessCheck> {
    if a.dim() != x.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), got: x.dim() });
    }
    if x.max_abs_entry() == 0.0 {
        return Err(Error::ZeroWitness);
    }
    let norm_a = eigendecompose(a)?.norm();
    let ex = eigendecompose(x)?;
    let n = x.dim();
    let abs_scaled = CMatrix::from_fn(n, n, |i, j| ex.vectors[(i, j)] * ex.values[j].abs());
    let modulus = abs_scaled * ex.vectors.adjoint();
    let trace_norm: f64 = ex.values.iter().map(|v| v.abs()).sum();

    let ax = a.matrix() * x.matrix();
    let modulus_residual = operator_norm(&(&ax - modulus.scale(norm_a)));
    let trace_ax = trace(&ax);
    let max_diag = x.diagonal().iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let scale = tol * (1.0 + norm_a);
    let diag_ok = max_diag <= tol;
    Ok(WitnessCheck {
        max_diag,
        modulus_residual,
        trace_ax,
        norm_times_trace_norm: norm_a * trace_norm,
        holds_c: diag_ok && modulus_residual <= scale,
        holds_d: diag_ok && (trace_ax - norm_a * trace_norm).abs() <= scale,
    })
}

//! Minimization of `φ(x) = ‖A0 + Diag(x)‖` over real diagonals.
//!
//! A Polyak-type subgradient phase gets close; a refinement phase then runs
//! ε-steepest descent on the half spread `ψ(x) = (λ_max − λ_min)/2`, which is
//! `φ` after the optimal identity shift. Its ε-steepest direction is the gap
//! between the moment sets of the near-extreme eigenspaces, so the method
//! stalls exactly where a minimality certificate exists.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::certify::{certify_minimality, CertifyParams, MinimalityCertificate, DEFAULT_TIE_TOL};
use crate::error::{Error, Result};
use crate::hermitian::{eigendecompose, shifted, EigenSystem, EigenspaceBasis, HermitianMatrix, RealDiagonal, DEFAULT_CLUSTER_TOL};
use crate::moment::{approximate_moment_distance, least_norm_hull_point, moment_barycenter, DEFAULT_GAP_TOL, DEFAULT_MAX_ITERS};
use crate::random::{normal, seeded};
use crate::rank_one::{minimizing_diagonal, UnitVector};
use crate::subdiff::{descriptor_from, SubdiffKind};

/// Singular-value ratio above which `A0` is treated as rank one.
pub const RANK_ONE_RATIO: f64 = 1e10;

/// ε is reduced once the ε-moment sets are within `SHRINK_FACTOR·√ε`.
const SHRINK_FACTOR: f64 = 1e-2;

/// Relative duality gap at which a descent direction is accurate enough.
const DIRECTION_GAP_REL: f64 = 1e-2;

/// Any element of the subdifferential is a valid subgradient step, so the
/// least-norm element at a tie is only computed roughly.
const SUBGRADIENT_HULL_ITERS: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizeParams {
    /// Cap on subgradient plus refinement iterations.
    pub max_iters: usize,
    /// Length of the subgradient phase.
    pub subgradient_iters: usize,
    /// `ε_k = polyak_c · φ(x0) / (k + 1)` in the Polyak step.
    pub polyak_c: f64,
    /// Consecutive non-improving steps before the diminishing fallback.
    pub stall_limit: usize,
    /// Subgradient iterations between certification attempts.
    pub certify_every: usize,
    pub gap_tol: f64,
    pub cluster_tol: f64,
    pub tie_tol: f64,
    /// Frank–Wolfe cap for each moment-set computation.
    pub inner_iters: usize,
    /// Relative size of the random start perturbations in `multi_start`.
    pub perturbation: f64,
}

impl Default for OptimizeParams {
    fn default() -> Self {
        Self {
            max_iters: 2000,
            subgradient_iters: 200,
            polyak_c: 0.5,
            stall_limit: 20,
            certify_every: 25,
            gap_tol: DEFAULT_GAP_TOL,
            cluster_tol: DEFAULT_CLUSTER_TOL,
            tie_tol: DEFAULT_TIE_TOL,
            inner_iters: 500,
            perturbation: 0.5,
        }
    }
}

impl OptimizeParams {
    fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(Error::InvalidParameter("max_iters must be at least 1".into()));
        }
        if self.certify_every == 0 || self.inner_iters == 0 {
            return Err(Error::InvalidParameter("certify_every and inner_iters must be at least 1".into()));
        }
        for (name, v) in [("gap_tol", self.gap_tol), ("cluster_tol", self.cluster_tol), ("tie_tol", self.tie_tol), ("polyak_c", self.polyak_c)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!("{name} must be positive and finite, got {v}")));
            }
        }
        if !(self.perturbation >= 0.0 && self.perturbation.is_finite()) {
            return Err(Error::InvalidParameter(format!("perturbation must be nonnegative, got {}", self.perturbation)));
        }
        Ok(())
    }

    pub fn certify_params(&self) -> CertifyParams {
        CertifyParams { gap_tol: self.gap_tol, max_iters: DEFAULT_MAX_ITERS, cluster_tol: self.cluster_tol, tie_tol: self.tie_tol }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ClosedForm,
    Subgradient,
}

#[derive(Debug, Clone)]
pub struct OptimizeResult {
    pub x_star: RealDiagonal,
    pub phi_star: f64,
    pub iterations: usize,
    pub certificate: MinimalityCertificate,
    /// `(iteration, best φ so far)`.
    pub trace: Vec<(usize, f64)>,
    pub method: Method,
}

fn eig_at(a0: &HermitianMatrix, x: &RealDiagonal) -> Result<EigenSystem> {
    eigendecompose(&shifted(a0, x)?)
}

/// Shifts `x` by a multiple of `1` so that `λ_max = −λ_min`.
fn balance(x: &RealDiagonal, es: &EigenSystem) -> RealDiagonal {
    let c = 0.5 * (es.lambda_max() + es.lambda_min());
    RealDiagonal::new(x.0.iter().map(|v| v - c).collect())
}

fn half_spread(es: &EigenSystem) -> f64 {
    0.5 * (es.lambda_max() - es.lambda_min())
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

fn certificate_at(a0: &HermitianMatrix, x: &RealDiagonal, es: &EigenSystem, params: &OptimizeParams) -> Result<MinimalityCertificate> {
    match certify_minimality(a0, x, &params.certify_params()) {
        Err(Error::DegenerateZero { .. }) => Ok(MinimalityCertificate::zero_norm(es)),
        other => other,
    }
}

fn done(cert: &MinimalityCertificate, params: &OptimizeParams) -> bool {
    cert.is_minimal() && cert.gap.is_none_or(|g| g <= params.gap_tol)
}

/// Element of `∂φ(x)`: the barycentric moment of the dominant side, or at a
/// tie the least-norm element of `co(m_max ∪ −m_min)`.
fn subgradient(es: &EigenSystem, params: &OptimizeParams) -> Result<Option<Vec<f64>>> {
    let desc = match descriptor_from(es, params.cluster_tol) {
        Ok(d) => d,
        Err(Error::DegenerateZero { .. }) => return Ok(None),
        Err(e) => return Err(e),
    };
    let g = match desc.kind {
        SubdiffKind::MaxSide => moment_barycenter(desc.qmax.as_ref().unwrap()),
        SubdiffKind::MinSide => moment_barycenter(desc.qmin.as_ref().unwrap()).into_iter().map(|v| -v).collect(),
        SubdiffKind::BothSides => least_norm_hull_point(desc.qmax.as_ref(), desc.qmin.as_ref(), SUBGRADIENT_HULL_ITERS, 1e-8)?.point,
    };
    Ok(Some(g))
}

struct Run<'a> {
    a0: &'a HermitianMatrix,
    params: &'a OptimizeParams,
    best_x: RealDiagonal,
    best_phi: f64,
    trace: Vec<(usize, f64)>,
    iterations: usize,
}

impl Run<'_> {
    fn record(&mut self, x: &RealDiagonal, phi: f64) {
        if phi < self.best_phi {
            self.best_phi = phi;
            self.best_x = x.clone();
        }
        self.iterations += 1;
        self.trace.push((self.iterations, self.best_phi));
    }

    /// Accepts moves that are level with the best value up to round-off.
    fn record_refined(&mut self, x: &RealDiagonal, phi: f64, slack: f64) {
        if phi <= self.best_phi + slack {
            self.best_x = x.clone();
        }
        self.best_phi = self.best_phi.min(phi);
        self.iterations += 1;
        self.trace.push((self.iterations, self.best_phi));
    }

    fn certify_best(&self) -> Result<MinimalityCertificate> {
        let es = eig_at(self.a0, &self.best_x)?;
        certificate_at(self.a0, &self.best_x, &es, self.params)
    }

    /// Returns a certificate when the run can stop early.
    fn subgradient_phase(&mut self, x0: RealDiagonal) -> Result<Option<MinimalityCertificate>> {
        let p = self.params;
        let mut x = x0;
        let phi0 = eig_at(self.a0, &x)?.norm().max(f64::MIN_POSITIVE);
        let mut stalled = 0usize;
        let mut fallback = false;
        for k in 0..p.subgradient_iters.min(p.max_iters) {
            let es = eig_at(self.a0, &x)?;
            let phi = es.norm();
            if phi < self.best_phi {
                stalled = 0;
            } else {
                stalled += 1;
            }
            self.record(&x, phi);
            if stalled >= p.stall_limit {
                fallback = true;
            }
            let Some(g) = subgradient(&es, p)? else {
                return Ok(None);
            };
            let gg: f64 = g.iter().map(|v| v * v).sum();
            if gg == 0.0 {
                break;
            }
            let t = if fallback {
                phi0 / ((k + 1) as f64 * gg.sqrt())
            } else {
                (phi - self.best_phi + p.polyak_c * phi0 / (k + 1) as f64) / gg
            };
            x = x.axpy(-t, &g);
            if (k + 1) % p.certify_every == 0 {
                let cert = self.certify_best()?;
                if done(&cert, p) {
                    return Ok(Some(cert));
                }
            }
        }
        Ok(None)
    }

    /// Minimizes the convex `t ↦ ψ(x + t d)` for a descent direction `d` by
    /// bisection on the sign of a subgradient. Returns the bracketed minimizer
    /// unless a probe found a value lower by more than round-off.
    fn line_search(&self, x: &RealDiagonal, d: &[f64], psi0: f64, t0: f64, slack: f64) -> Result<(RealDiagonal, f64, f64)> {
        let mut best = (x.clone(), psi0, 0.0);
        let probe = |t: f64, best: &mut (RealDiagonal, f64, f64)| -> Result<(f64, f64)> {
            let xt = x.axpy(t, d);
            let es = eig_at(self.a0, &xt)?;
            let psi = half_spread(&es);
            if psi < best.1 {
                *best = (xt, psi, t);
            }
            let n = es.dim();
            let top = es.vectors.column(0);
            let bot = es.vectors.column(n - 1);
            Ok((psi, 0.5 * (0..n).map(|i| d[i] * (top[i].norm_sqr() - bot[i].norm_sqr())).sum::<f64>()))
        };
        let (mut lo, mut hi) = (0.0, t0);
        let mut expansions = 0;
        while probe(hi, &mut best)?.1 < 0.0 {
            lo = hi;
            hi *= 2.0;
            expansions += 1;
            if expansions > 200 {
                break;
            }
        }
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if probe(mid, &mut best)?.1 < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let t = 0.5 * (lo + hi);
        let xt = x.axpy(t, d);
        let psi = half_spread(&eig_at(self.a0, &xt)?);
        if t > 0.0 && psi <= best.1 + slack {
            return Ok((xt, psi, t));
        }
        Ok(best)
    }

    /// ε-steepest descent on `ψ` with the identity shift applied after every
    /// step, followed by certification.
    fn refine(&mut self) -> Result<MinimalityCertificate> {
        let p = self.params;
        let es = eig_at(self.a0, &self.best_x)?;
        let mut x = balance(&self.best_x, &es);
        let mut es = eig_at(self.a0, &x)?;
        let mut psi = half_spread(&es);
        self.record(&x, es.norm());
        let scale = 1.0 + psi;
        let eps_min = 1e-14 * scale;
        let mut eps = 1e-2 * scale;
        let mut step = psi.max(1e-8);
        let mut certified_early = false;
        let slack = 8.0 * f64::EPSILON * scale;

        while self.iterations < p.max_iters {
            if psi <= p.cluster_tol {
                break;
            }
            let (q1, q2) = near_extreme(&es, eps);
            let threshold = SHRINK_FACTOR * (eps / scale).sqrt();
            let md = approximate_moment_distance(&q1, &q2, p.inner_iters, 0.5 * threshold, DIRECTION_GAP_REL)?;
            let (a, b) = md.nearest_points(&q1, &q2);
            let r: Vec<f64> = a.iter().zip(&b).map(|(u, v)| u - v).collect();
            let rn = norm2(&r);
            let mut shrink = rn <= threshold;
            if !shrink {
                let newton = if q1.multiplicity() == 1 && q2.multiplicity() == 1 { newton_direction(&es) } else { None };
                let is_newton = newton.is_some();
                let (d, t0) = match newton {
                    Some(d) => (d, 1.0),
                    None => (r.iter().map(|v| -v / rn).collect(), step),
                };
                let (xt, psi_t, t) = self.line_search(&x, &d, psi, t0, slack)?;
                let gain = psi - psi_t;
                if t > 0.0 && gain >= -slack {
                    let es_t = eig_at(self.a0, &xt)?;
                    x = balance(&xt, &es_t);
                    es = eig_at(self.a0, &x)?;
                    psi = half_spread(&es);
                    if !is_newton {
                        step = t.max(1e-15);
                    }
                    self.record_refined(&x, es.norm(), slack);
                } else {
                    self.iterations += 1;
                    self.trace.push((self.iterations, self.best_phi));
                }
                shrink = t == 0.0 || gain <= slack;
            }
            if shrink {
                if eps <= p.cluster_tol * scale && !certified_early {
                    certified_early = true;
                    let cert = self.certify_best()?;
                    if done(&cert, p) {
                        return Ok(cert);
                    }
                }
                if eps <= eps_min {
                    break;
                }
                eps *= 0.1;
            }
        }
        self.certify_best()
    }
}

/// Gradient and Hessian of a simple eigenvalue `λ_k` with respect to `x`.
fn eigen_derivatives(es: &EigenSystem, k: usize) -> (DVector<f64>, DMatrix<f64>) {
    let n = es.dim();
    let vk = es.vectors.column(k);
    let grad = DVector::from_fn(n, |i, _| vk[i].norm_sqr());
    let mut hess = DMatrix::zeros(n, n);
    for m in (0..n).filter(|&m| m != k) {
        let gap = es.values[k] - es.values[m];
        let vm = es.vectors.column(m);
        // c_i = conj(v_{m,i}) v_{k,i}; the term is 2 Re(c_i conj(c_j)) / gap
        let c: Vec<_> = (0..n).map(|i| vm[i].conj() * vk[i]).collect();
        for i in 0..n {
            for j in 0..n {
                hess[(i, j)] += 2.0 * (c[i] * c[j].conj()).re / gap;
            }
        }
    }
    (grad, hess)
}

/// Newton direction for the smooth `ψ` when both extreme eigenvalues are
/// simple; `None` if it is not a descent direction.
fn newton_direction(es: &EigenSystem) -> Option<Vec<f64>> {
    let n = es.dim();
    if n < 2 {
        return None;
    }
    let (g1, h1) = eigen_derivatives(es, 0);
    let (gn, hn) = eigen_derivatives(es, n - 1);
    let g = (g1 - gn) * 0.5;
    let h = (h1 - hn) * 0.5;
    let tol = 1e-12 * h.iter().fold(0.0_f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    let d = -(h.pseudo_inverse(tol).ok()? * &g);
    (d.dot(&g) < 0.0 && d.iter().all(|v| v.is_finite())).then(|| d.iter().copied().collect())
}

/// Eigenspaces of the eigenvalues within `eps` of `λ_max` and of `λ_min`.
fn near_extreme(es: &EigenSystem, eps: f64) -> (EigenspaceBasis, EigenspaceBasis) {
    let n = es.dim();
    let top = es.values.iter().take_while(|&&v| v >= es.lambda_max() - eps).count().max(1);
    let bottom = es.values.iter().rev().take_while(|&&v| v <= es.lambda_min() + eps).count().max(1);
    let q1 = EigenspaceBasis::new(es.lambda_max(), es.vectors.columns(0, top).into_owned());
    let q2 = EigenspaceBasis::new(es.lambda_min(), es.vectors.columns(n - bottom, bottom).into_owned());
    (q1, q2)
}

pub fn minimize_sup_norm(a0: &HermitianMatrix, x0: &RealDiagonal, params: &OptimizeParams) -> Result<OptimizeResult> {
    params.validate()?;
    if x0.len() != a0.dim() {
        return Err(Error::DimensionMismatch { expected: a0.dim(), got: x0.len() });
    }
    let mut run = Run { a0, params, best_x: x0.clone(), best_phi: f64::INFINITY, trace: Vec::new(), iterations: 0 };
    let certificate = match run.subgradient_phase(x0.clone())? {
        Some(cert) => cert,
        None if run.iterations < params.max_iters => run.refine()?,
        None => run.certify_best()?,
    };
    let phi_star = eig_at(a0, &run.best_x)?.norm();
    Ok(OptimizeResult {
        x_star: run.best_x,
        phi_star,
        iterations: run.iterations,
        certificate,
        trace: run.trace,
        method: Method::Subgradient,
    })
}

/// Runs from `−diag(A0)` and `starts − 1` seeded perturbations of it, keeping
/// the smallest `φ*` (ties broken by start index).
pub fn multi_start(a0: &HermitianMatrix, starts: usize, seed: u64, params: &OptimizeParams) -> Result<OptimizeResult> {
    if starts == 0 {
        return Err(Error::InvalidParameter("starts must be at least 1".into()));
    }
    let center: Vec<f64> = a0.diagonal().iter().map(|v| -v).collect();
    let scale = params.perturbation * a0.off_diagonal().max_abs_entry().max(f64::MIN_POSITIVE);
    let mut rng = seeded(seed);
    let origins: Vec<RealDiagonal> = (0..starts)
        .map(|k| {
            if k == 0 {
                RealDiagonal::new(center.clone())
            } else {
                RealDiagonal::new(center.iter().map(|c| c + scale * normal(&mut rng)).collect())
            }
        })
        .collect();
    let runs: Vec<Result<OptimizeResult>> = origins.par_iter().map(|x0| minimize_sup_norm(a0, x0, params)).collect();
    let mut best: Option<(usize, OptimizeResult)> = None;
    for (k, run) in runs.into_iter().enumerate() {
        let run = run?;
        if best.as_ref().is_none_or(|(_, b)| run.phi_star.total_cmp(&b.phi_star).is_lt()) {
            best = Some((k, run));
        }
    }
    Ok(best.expect("starts >= 1").1)
}

/// `A0 = c·h h*` when every other eigenvalue is below `|c| / RANK_ONE_RATIO`.
pub fn rank_one_factor(a0: &HermitianMatrix) -> Result<Option<(f64, UnitVector)>> {
    let es = eigendecompose(a0)?;
    let n = es.dim();
    let (lead, rest) = if es.lambda_max().abs() >= es.lambda_min().abs() {
        (0, es.values[1..].iter().fold(0.0_f64, |m, v| m.max(v.abs())))
    } else {
        (n - 1, es.values[..n - 1].iter().fold(0.0_f64, |m, v| m.max(v.abs())))
    };
    let c = es.values[lead];
    if c == 0.0 || rest * RANK_ONE_RATIO > c.abs() {
        return Ok(None);
    }
    let h: Vec<_> = es.vectors.column(lead).iter().copied().collect();
    Ok(Some((c, UnitVector::normalized(&h)?)))
}

/// Closed form for rank-one `A0 = c·h h*`, `multi_start` otherwise.
pub fn dispatch(a0: &HermitianMatrix, starts: usize, seed: u64, params: &OptimizeParams) -> Result<OptimizeResult> {
    params.validate()?;
    let Some((c, h)) = rank_one_factor(a0)? else {
        return multi_start(a0, starts, seed, params);
    };
    let sol = minimizing_diagonal(&h);
    let x_star = RealDiagonal::new(sol.diagonal.0.iter().map(|d| c * d).collect());
    let es = eig_at(a0, &x_star)?;
    let certificate = certificate_at(a0, &x_star, &es, params)?;
    let phi_star = es.norm();
    Ok(OptimizeResult { x_star, phi_star, iterations: 0, certificate, trace: vec![(0, phi_star)], method: Method::ClosedForm })
}

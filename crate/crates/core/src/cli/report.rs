//! Reports: a JSON document with a fixed key order (struct field order) and a
//! plain-text summary. Floats are printed in shortest round-trip form, so
//! identical runs give byte-identical output.

use std::fmt::Write as _;

use serde::Serialize;

use crate::certify::{MinimalityCertificate, Verdict};
use crate::hermitian::{CMatrix, HermitianMatrix};
use crate::optimize::{Method, OptimizeResult};
use crate::rank_one::{RankOneCase, RankOneSolution};
use crate::subdiff::SubdiffKind;

#[derive(Debug, Clone, Serialize)]
pub struct ComplexMatrix {
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl ComplexMatrix {
    pub fn from_cmatrix(m: &CMatrix) -> Self {
        let rows = |f: fn(&num_complex::Complex64) -> f64| (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| f(&m[(i, j)]) + 0.0).collect()).collect();
        Self { re: rows(|z| z.re), im: rows(|z| z.im) }
    }

    pub fn from_hermitian(m: &HermitianMatrix) -> Self {
        Self::from_cmatrix(m.matrix())
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Tolerances {
    pub gap_tol: f64,
    pub cluster_tol: f64,
    pub tie_tol: f64,
    pub max_iters: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct CertificatePayload {
    pub kind: SubdiffKind,
    pub multiplicity_max: Option<usize>,
    pub multiplicity_min: Option<usize>,
    pub duality_gap: Option<f64>,
    pub intersection_point: Option<Vec<f64>>,
    pub u: Option<ComplexMatrix>,
    pub v: Option<ComplexMatrix>,
    pub witness_x: Option<ComplexMatrix>,
    pub descent_direction: Option<Vec<f64>>,
    pub descent_slope: Option<f64>,
}

impl CertificatePayload {
    pub fn from_certificate(c: &MinimalityCertificate) -> Self {
        Self {
            kind: c.kind,
            multiplicity_max: c.qmax.as_ref().map(|q| q.multiplicity()),
            multiplicity_min: c.qmin.as_ref().map(|q| q.multiplicity()),
            duality_gap: c.duality_gap,
            intersection_point: c.intersection_point.as_ref().map(|p| p.as_slice().to_vec()),
            u: c.u.as_ref().map(ComplexMatrix::from_cmatrix),
            v: c.v.as_ref().map(ComplexMatrix::from_cmatrix),
            witness_x: c.witness_x.as_ref().map(ComplexMatrix::from_hermitian),
            descent_direction: c.descent_direction.clone(),
            descent_slope: c.descent_slope,
        }
    }
}

/// Output of `minimize` and `certify`; fields that do not apply are `null`.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub command: &'static str,
    pub input_sha256: String,
    pub n: usize,
    pub seed: Option<u64>,
    pub starts: Option<usize>,
    pub tolerances: Tolerances,
    pub phi_star: f64,
    pub x_star: Vec<f64>,
    pub verdict: Verdict,
    pub gap: Option<f64>,
    pub lambda_max: f64,
    pub lambda_min: f64,
    pub certificate: CertificatePayload,
    pub iterations: Option<usize>,
    pub method: Option<Method>,
    pub trace: Vec<(usize, f64)>,
}

impl Report {
    pub fn certify(digest: String, x: Vec<f64>, tolerances: Tolerances, c: &MinimalityCertificate) -> Self {
        Self {
            command: "certify",
            input_sha256: digest,
            n: x.len(),
            seed: None,
            starts: None,
            tolerances,
            phi_star: c.norm,
            x_star: unsign(&x),
            verdict: c.verdict,
            gap: c.gap,
            lambda_max: c.lambda_max,
            lambda_min: c.lambda_min,
            certificate: CertificatePayload::from_certificate(c),
            iterations: None,
            method: None,
            trace: Vec::new(),
        }
    }

    pub fn minimize(digest: String, seed: u64, starts: usize, tolerances: Tolerances, r: &OptimizeResult) -> Self {
        let c = &r.certificate;
        Self {
            command: "minimize",
            input_sha256: digest,
            n: r.x_star.len(),
            seed: Some(seed),
            starts: Some(starts),
            tolerances,
            phi_star: r.phi_star,
            x_star: unsign(&r.x_star.0),
            verdict: c.verdict,
            gap: c.gap,
            lambda_max: c.lambda_max,
            lambda_min: c.lambda_min,
            certificate: CertificatePayload::from_certificate(c),
            iterations: Some(r.iterations),
            method: Some(r.method),
            trace: r.trace.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail") + "\n"
    }

    pub fn summary(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "command:   {}", self.command);
        let _ = writeln!(s, "input:     sha256 {}", self.input_sha256);
        let _ = writeln!(s, "n:         {}", self.n);
        let _ = writeln!(s, "verdict:   {}", verdict_name(self.verdict));
        let _ = writeln!(s, "phi*:      {}", num(self.phi_star));
        let _ = writeln!(s, "x*:        {}", join(&self.x_star));
        let _ = writeln!(s, "lambda:    max {} / min {}", num(self.lambda_max), num(self.lambda_min));
        if let Some(g) = self.gap {
            let _ = writeln!(s, "gap:       {g:e}");
        }
        if let Some(d) = &self.certificate.descent_direction {
            let _ = writeln!(s, "descent:   {} (slope {})", join(d), num(self.certificate.descent_slope.unwrap_or(f64::NAN)));
        }
        if let (Some(it), Some(m)) = (self.iterations, self.method) {
            let method = match m {
                Method::ClosedForm => "closed_form",
                Method::Subgradient => "subgradient",
            };
            let _ = writeln!(s, "method:    {method}, {it} iterations");
        }
        s
    }
}

pub fn verdict_name(v: Verdict) -> &'static str {
    match v {
        Verdict::Minimal => "minimal",
        Verdict::NotMinimal => "not_minimal",
        Verdict::Inconclusive => "inconclusive",
    }
}

fn num(x: f64) -> String {
    if x != 0.0 && (x.abs() < 1e-4 || x.abs() >= 1e6) { format!("{x:e}") } else { format!("{}", x + 0.0) }
}

fn join(v: &[f64]) -> String {
    v.iter().map(|&x| num(x)).collect::<Vec<_>>().join(", ")
}

/// `-0.0 + 0.0 == +0.0`: keeps signed zeros out of the reports.
fn unsign(v: &[f64]) -> Vec<f64> {
    v.iter().map(|x| x + 0.0).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct Witness {
    pub diagonal: Vec<f64>,
    pub matrix: ComplexMatrix,
}

#[derive(Debug, Clone, Serialize)]
pub struct RankOneReport {
    pub command: &'static str,
    pub h_re: Vec<f64>,
    pub h_im: Vec<f64>,
    pub case: RankOneCase,
    pub diagonal: Vec<f64>,
    pub minimal_norm: f64,
    pub unique: bool,
    pub big_index: Option<usize>,
    pub partner_re: Option<Vec<f64>>,
    pub partner_im: Option<Vec<f64>>,
    pub angles: Option<Vec<f64>>,
    /// Both `±½ e_{j0}` minimal matrices when `h_{j0} = 0`.
    pub zero_index: Option<usize>,
    pub witnesses: Option<[Witness; 2]>,
}

impl RankOneReport {
    pub fn new(h: &[num_complex::Complex64], sol: &RankOneSolution) -> Self {
        Self {
            command: "rank1",
            h_re: unsign(&h.iter().map(|z| z.re).collect::<Vec<_>>()),
            h_im: unsign(&h.iter().map(|z| z.im).collect::<Vec<_>>()),
            case: sol.case_tag,
            diagonal: unsign(&sol.diagonal.0),
            minimal_norm: sol.minimal_norm,
            unique: sol.unique,
            big_index: sol.big_index,
            partner_re: None,
            partner_im: None,
            angles: None,
            zero_index: None,
            witnesses: None,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail") + "\n"
    }

    pub fn summary(&self) -> String {
        let mut s = String::new();
        let case = match self.case {
            RankOneCase::BigCoordinate => "big_coordinate",
            RankOneCase::Spread => "spread",
            RankOneCase::Boundary => "boundary",
        };
        let _ = writeln!(s, "case:      {case}");
        if let Some(j) = self.big_index {
            let _ = writeln!(s, "big index: {j}");
        }
        let _ = writeln!(s, "diagonal:  {}", join(&self.diagonal));
        let _ = writeln!(s, "norm:      {}", num(self.minimal_norm));
        let _ = writeln!(s, "unique:    {}", self.unique);
        if let (Some(re), Some(im)) = (&self.partner_re, &self.partner_im) {
            let _ = writeln!(s, "k (re):    {}", join(re));
            let _ = writeln!(s, "k (im):    {}", join(im));
        }
        if let Some(a) = &self.angles {
            let _ = writeln!(s, "angles:    {}", join(a));
        }
        if let (Some(j), Some(w)) = (self.zero_index, &self.witnesses) {
            let _ = writeln!(s, "h_{j} = 0; both diagonals are minimizing:");
            for wi in w {
                let _ = writeln!(s, "  {}", join(&wi.diagonal));
            }
        }
        s
    }
}

//! JSON problem files.
//!
//! ```json
//! { "n": 2, "real": [[0, 1], [1, 0]], "imag": [[0, 0], [0, 0]], "metadata": { "source": "demo" } }
//! ```
//!
//! Parsing goes through `serde_json::Value` so that every diagnostic can name
//! the offending field (`real[1][0]`, `metadata.source`, …).

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::hermitian::HermitianMatrix;
use crate::rank_one::UnitVector;

/// Input rejected before any numerics ran (exit code 2).
#[derive(Debug, Clone, PartialEq)]
pub struct InputError(pub String);

impl std::fmt::Display for InputError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for InputError {}

fn bad(msg: impl Into<String>) -> InputError {
    InputError(msg.into())
}

#[derive(Debug, Clone)]
pub struct ProblemFile {
    pub n: usize,
    pub matrix: HermitianMatrix,
    pub metadata: BTreeMap<String, String>,
    /// Hex SHA-256 of the raw file bytes.
    pub digest: String,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

pub fn read_bytes(path: &str) -> Result<Vec<u8>, InputError> {
    std::fs::read(path).map_err(|e| bad(format!("cannot read {path}: {e}")))
}

fn number(v: &Value, field: &str) -> Result<f64, InputError> {
    match v.as_f64() {
        Some(x) if x.is_finite() => Ok(x),
        Some(_) => Err(bad(format!("field `{field}`: number is not finite"))),
        None => Err(bad(format!("field `{field}`: expected a number, found {}", kind(v)))),
    }
}

fn kind(v: &Value) -> &'static str {
    match v {
        Value::Null => "null",
        Value::Bool(_) => "a boolean",
        Value::Number(_) => "a number",
        Value::String(_) => "a string",
        Value::Array(_) => "an array",
        Value::Object(_) => "an object",
    }
}

fn square(v: &Value, field: &str, n: usize) -> Result<DMatrix<f64>, InputError> {
    let rows = v.as_array().ok_or_else(|| bad(format!("field `{field}`: expected an array of rows, found {}", kind(v))))?;
    if rows.len() != n {
        return Err(bad(format!("field `{field}`: expected {n} rows, found {}", rows.len())));
    }
    let mut m = DMatrix::zeros(n, n);
    for (i, row) in rows.iter().enumerate() {
        let cols = row.as_array().ok_or_else(|| bad(format!("field `{field}[{i}]`: expected an array, found {}", kind(row))))?;
        if cols.len() != n {
            return Err(bad(format!("field `{field}[{i}]`: expected {n} entries, found {}", cols.len())));
        }
        for (j, x) in cols.iter().enumerate() {
            m[(i, j)] = number(x, &format!("{field}[{i}][{j}]"))?;
        }
    }
    Ok(m)
}

pub fn parse_problem(bytes: &[u8]) -> Result<ProblemFile, InputError> {
    let doc: Value = serde_json::from_slice(bytes).map_err(|e| bad(format!("malformed JSON: {e}")))?;
    let obj = doc.as_object().ok_or_else(|| bad(format!("top level: expected an object, found {}", kind(&doc))))?;
    if let Some(k) = obj.keys().find(|k| !matches!(k.as_str(), "n" | "real" | "imag" | "metadata")) {
        return Err(bad(format!("field `{k}`: unknown field (expected n, real, imag, metadata)")));
    }
    let nv = obj.get("n").ok_or_else(|| bad("field `n`: missing"))?;
    let n = match nv.as_u64() {
        Some(n) if n >= 1 => n as usize,
        _ => return Err(bad(format!("field `n`: expected a positive integer, found {nv}"))),
    };
    let re = square(obj.get("real").ok_or_else(|| bad("field `real`: missing"))?, "real", n)?;
    let im = match obj.get("imag") {
        None | Some(Value::Null) => DMatrix::zeros(n, n),
        Some(v) => square(v, "imag", n)?,
    };
    let mut metadata = BTreeMap::new();
    match obj.get("metadata") {
        None | Some(Value::Null) => {}
        Some(Value::Object(map)) => {
            for (k, v) in map {
                let s = v.as_str().ok_or_else(|| bad(format!("field `metadata.{k}`: expected a string, found {}", kind(v))))?;
                metadata.insert(k.clone(), s.to_string());
            }
        }
        Some(v) => return Err(bad(format!("field `metadata`: expected an object, found {}", kind(v)))),
    }
    let matrix = HermitianMatrix::from_parts(&re, &im).map_err(|e| bad(format!("fields `real`/`imag`: {e}")))?;
    Ok(ProblemFile { n, matrix, metadata, digest: sha256_hex(bytes) })
}

pub fn read_problem(path: &str) -> Result<ProblemFile, InputError> {
    parse_problem(&read_bytes(path)?)
}

pub fn parse_floats(text: &str, flag: &str) -> Result<Vec<f64>, InputError> {
    text.split(',')
        .enumerate()
        .map(|(k, t)| {
            let t = t.trim();
            match t.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(bad(format!("{flag}: entry {k} `{t}` is not a finite number"))),
            }
        })
        .collect()
}

/// Rank-one input file: `{"h": [...], "h_imag": [...]}`.
pub fn parse_vector_file(bytes: &[u8]) -> Result<(Vec<f64>, Option<Vec<f64>>), InputError> {
    let doc: Value = serde_json::from_slice(bytes).map_err(|e| bad(format!("malformed JSON: {e}")))?;
    let obj = doc.as_object().ok_or_else(|| bad(format!("top level: expected an object, found {}", kind(&doc))))?;
    if let Some(k) = obj.keys().find(|k| !matches!(k.as_str(), "h" | "h_imag")) {
        return Err(bad(format!("field `{k}`: unknown field (expected h, h_imag)")));
    }
    let list = |field: &str| -> Result<Option<Vec<f64>>, InputError> {
        match obj.get(field) {
            None | Some(Value::Null) => Ok(None),
            Some(Value::Array(xs)) => xs.iter().enumerate().map(|(k, x)| number(x, &format!("{field}[{k}]"))).collect::<Result<_, _>>().map(Some),
            Some(v) => Err(bad(format!("field `{field}`: expected an array, found {}", kind(v)))),
        }
    };
    let h = list("h")?.ok_or_else(|| bad("field `h`: missing"))?;
    Ok((h, list("h_imag")?))
}

pub const UNIT_TOL: f64 = 1e-8;

pub fn unit_vector(re: &[f64], im: Option<&[f64]>) -> Result<UnitVector, InputError> {
    if re.is_empty() {
        return Err(bad("h: vector is empty"));
    }
    if let Some(im) = im {
        if im.len() != re.len() {
            return Err(bad(format!("h_imag: length {} does not match h length {}", im.len(), re.len())));
        }
    }
    let h: Vec<Complex64> = (0..re.len()).map(|k| Complex64::new(re[k], im.map_or(0.0, |im| im[k]))).collect();
    let norm = h.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > UNIT_TOL {
        return Err(bad(format!("h: ‖h‖ = {norm} is not 1 within {UNIT_TOL:e}")));
    }
    UnitVector::normalized(&h).map_err(|e| bad(format!("h: {e}")))
}

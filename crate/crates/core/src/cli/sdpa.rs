//! SDPA sparse format (`.dat-s`) for the real semidefinite program
//!
//! ```text
//!   minimize w   s.t.   w·I − (Ā0 + Diag(x, x)) ⪰ 0,   w·I + (Ā0 + Diag(x, x)) ⪰ 0
//! ```
//!
//! where `Ā0` is the `2n × 2n` real embedding of `A0`. Its optimum is
//! `min_x ‖A0 + Diag(x)‖`. SDPA reads constraints as `Σ F_i y_i − F_0 ⪰ 0`
//! with `y = (w, x_1, …, x_n)`.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::hermitian::{complex_to_real_embed, HermitianMatrix};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Entry {
    /// 0 is the constant matrix `F_0`.
    pub matrix: usize,
    /// 1-based.
    pub block: usize,
    /// 1-based, `row ≤ col`.
    pub row: usize,
    pub col: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SdpaProblem {
    pub comments: Vec<String>,
    /// Negative sizes denote diagonal blocks.
    pub block_sizes: Vec<i64>,
    pub objective: Vec<f64>,
    pub entries: Vec<Entry>,
}

impl SdpaProblem {
    pub fn num_variables(&self) -> usize {
        self.objective.len()
    }

    /// Dense `F_i` for one block (symmetrized).
    pub fn dense(&self, matrix: usize, block: usize) -> Vec<Vec<f64>> {
        let size = self.block_sizes[block - 1].unsigned_abs() as usize;
        let mut out = vec![vec![0.0; size]; size];
        for e in self.entries.iter().filter(|e| e.matrix == matrix && e.block == block) {
            out[e.row - 1][e.col - 1] = e.value;
            out[e.col - 1][e.row - 1] = e.value;
        }
        out
    }
}

pub fn problem_for(a0: &HermitianMatrix) -> SdpaProblem {
    let n = a0.dim();
    let m = 2 * n;
    let embed = complex_to_real_embed(a0);
    let mut entries = Vec::new();
    // block 1: w·I − Diag(x,x) − Ā0; block 2: w·I + Diag(x,x) + Ā0
    for (block, sign) in [(1usize, -1.0), (2usize, 1.0)] {
        for i in 0..m {
            for j in i..m {
                let v = embed[(i, j)];
                if v != 0.0 {
                    entries.push(Entry { matrix: 0, block, row: i + 1, col: j + 1, value: -sign * v });
                }
            }
        }
        for i in 0..m {
            entries.push(Entry { matrix: 1, block, row: i + 1, col: i + 1, value: 1.0 });
        }
        for k in 0..n {
            for i in [k, n + k] {
                entries.push(Entry { matrix: k + 2, block, row: i + 1, col: i + 1, value: sign });
            }
        }
    }
    entries.sort_by_key(|e| (e.matrix, e.block, e.row, e.col));
    let mut objective = vec![0.0; n + 1];
    objective[0] = 1.0;
    SdpaProblem {
        comments: vec![
            format!("mindiag: min w s.t. wI - A(x) >= 0, wI + A(x) >= 0 (real 2n x 2n embedding), n = {n}"),
            format!("variables: 1 = w, 2..{} = x_1..x_{n}", n + 1),
        ],
        block_sizes: vec![m as i64, m as i64],
        objective,
        entries,
    }
}

fn fmt_num(v: f64) -> String {
    // shortest round-trip representation; `-0` is normalized away
    if v == 0.0 { "0".to_string() } else { format!("{v}") }
}

pub fn write(problem: &SdpaProblem) -> String {
    let mut out = String::new();
    for c in &problem.comments {
        let _ = writeln!(out, "\"{c}");
    }
    let _ = writeln!(out, "{}", problem.num_variables());
    let _ = writeln!(out, "{}", problem.block_sizes.len());
    let sizes: Vec<String> = problem.block_sizes.iter().map(|s| s.to_string()).collect();
    let _ = writeln!(out, "{}", sizes.join(" "));
    let obj: Vec<String> = problem.objective.iter().map(|&v| fmt_num(v)).collect();
    let _ = writeln!(out, "{}", obj.join(" "));
    for e in &problem.entries {
        let _ = writeln!(out, "{} {} {} {} {}", e.matrix, e.block, e.row, e.col, fmt_num(e.value));
    }
    out
}

pub fn export(a0: &HermitianMatrix) -> String {
    write(&problem_for(a0))
}

fn syntax(line: usize, msg: impl std::fmt::Display) -> Error {
    Error::Precondition(format!("SDPA line {line}: {msg}"))
}

/// Parses the SDPA sparse grammar: leading comment lines (`"` or `*`), then
/// `m`, `nBlocks`, the block structure and `c` (separators `,(){}` allowed),
/// then `matno blkno i j value` lines.
pub fn parse(text: &str) -> Result<SdpaProblem> {
    let mut comments = Vec::new();
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l)).peekable();
    while let Some(&(_, l)) = lines.peek() {
        match l.trim_start().chars().next() {
            Some('"') | Some('*') => comments.push(l.trim_start()[1..].to_string()),
            None => {}
            _ => break,
        }
        lines.next();
    }
    let clean = |l: &str| -> String {
        l.chars().map(|c| if matches!(c, ',' | '(' | ')' | '{' | '}') { ' ' } else { c }).collect()
    };
    let mut header = Vec::new();
    let mut header_lines = Vec::new();
    let next_line = |lines: &mut std::iter::Peekable<_>| -> Result<(usize, Vec<String>)> {
        loop {
            let (no, l): (usize, &str) = lines.next().ok_or_else(|| syntax(0, "unexpected end of file"))?;
            let toks: Vec<String> = clean(l).split_whitespace().map(str::to_string).collect();
            if !toks.is_empty() {
                return Ok((no, toks));
            }
        }
    };
    for _ in 0..2 {
        let (no, toks) = next_line(&mut lines)?;
        let v: usize = toks[0].parse().map_err(|e| syntax(no, e))?;
        header.push(v);
        header_lines.push(no);
    }
    let (m, nblocks) = (header[0], header[1]);
    let mut block_sizes = Vec::new();
    while block_sizes.len() < nblocks {
        let (no, toks) = next_line(&mut lines)?;
        for t in toks {
            if block_sizes.len() < nblocks {
                block_sizes.push(t.parse::<i64>().map_err(|e| syntax(no, e))?);
            }
        }
    }
    if block_sizes.contains(&0) {
        return Err(syntax(header_lines[1], "zero block size"));
    }
    let mut objective = Vec::new();
    while objective.len() < m {
        let (no, toks) = next_line(&mut lines)?;
        for t in toks {
            if objective.len() < m {
                objective.push(t.parse::<f64>().map_err(|e| syntax(no, e))?);
            }
        }
    }
    let mut entries = Vec::new();
    for (no, l) in lines {
        let toks: Vec<String> = clean(l).split_whitespace().map(str::to_string).collect();
        if toks.is_empty() {
            continue;
        }
        if toks.len() != 5 {
            return Err(syntax(no, format!("expected 5 fields, found {}", toks.len())));
        }
        let int = |s: &str| s.parse::<usize>().map_err(|e| syntax(no, e));
        let e = Entry {
            matrix: int(&toks[0])?,
            block: int(&toks[1])?,
            row: int(&toks[2])?,
            col: int(&toks[3])?,
            value: toks[4].parse().map_err(|e| syntax(no, e))?,
        };
        if e.matrix > m {
            return Err(syntax(no, format!("matrix number {} exceeds {m}", e.matrix)));
        }
        if e.block == 0 || e.block > nblocks {
            return Err(syntax(no, format!("block {} out of range", e.block)));
        }
        let size = block_sizes[e.block - 1].unsigned_abs() as usize;
        if e.row == 0 || e.col == 0 || e.row > size || e.col > size || e.row > e.col {
            return Err(syntax(no, format!("index ({}, {}) invalid for block of size {size}", e.row, e.col)));
        }
        if block_sizes[e.block - 1] < 0 && e.row != e.col {
            return Err(syntax(no, "off-diagonal entry in a diagonal block"));
        }
        entries.push(e);
    }
    Ok(SdpaProblem { comments, block_sizes, objective, entries })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_case() {
        let a = HermitianMatrix::from_real_rows(&[vec![2.5]]).unwrap();
        let p = parse(&export(&a)).unwrap();
        assert_eq!(p.num_variables(), 2);
        assert_eq!(p.block_sizes, vec![2, 2]);
        // block 1: w − (a + x) on both embedded copies; F0 = Ā0
        assert_eq!(p.dense(0, 1), vec![vec![2.5, 0.0], vec![0.0, 2.5]]);
        assert_eq!(p.dense(2, 1), vec![vec![-1.0, 0.0], vec![0.0, -1.0]]);
        assert_eq!(p.dense(0, 2), vec![vec![-2.5, 0.0], vec![0.0, -2.5]]);
        assert_eq!(p.dense(2, 2), vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
        assert_eq!(p.dense(1, 1), vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
    }

    #[test]
    fn real_input_gives_duplicated_blocks() {
        let a = HermitianMatrix::from_real_rows(&[vec![1.0, 2.0], vec![2.0, -1.0]]).unwrap();
        let p = problem_for(&a);
        let f0 = p.dense(0, 1);
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(f0[i][j], f0[i + 2][j + 2]);
                assert_eq!(f0[i][j + 2], 0.0);
            }
        }
    }

    #[test]
    fn entries_are_ordered_and_round_trip() {
        let a = HermitianMatrix::from_rows(&[
            vec![num_complex::Complex64::new(1.0, 0.0), num_complex::Complex64::new(0.5, -0.25)],
            vec![num_complex::Complex64::new(0.5, 0.25), num_complex::Complex64::new(-2.0, 0.0)],
        ])
        .unwrap();
        let p = problem_for(&a);
        let keys: Vec<_> = p.entries.iter().map(|e| (e.matrix, e.block, e.row, e.col)).collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
        assert_eq!(parse(&write(&p)).unwrap(), p);
    }

    #[test]
    fn parser_accepts_punctuation_and_rejects_garbage() {
        // trailing annotations after the header value are allowed
        let text = "* comment\n2 =mDIM\n1 =nBLOCK\n{2}\n(1.0, 0.0)\n0 1 1 1 1.5\n1 1 1 2 -1\n";
        let p = parse(text).unwrap();
        assert_eq!(p.block_sizes, vec![2]);
        assert_eq!(p.entries.len(), 2);
        assert!(parse("2\n1\n2\n1 0\n0 1 2 1 1.0\n").is_err());
        assert!(parse("2\n1\n2\n1 0\n3 1 1 1 1.0\n").is_err());
        assert!(parse("2\n1\n2\n1\n").is_err());
    }
}

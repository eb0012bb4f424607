//! The `mindiag` command line.
//!
//! Exit codes: 0 success / minimal, 1 not minimal (`certify`), 2 bad input or
//! I/O failure, 3 inconclusive or numerical failure.

pub mod io;
pub mod report;
pub mod sdpa;

use std::ffi::OsString;
use std::io::Write;
use std::panic::{catch_unwind, AssertUnwindSafe};

use clap::{Args, Parser, Subcommand};

use crate::certify::{certify_minimality, CertifyParams, Verdict, DEFAULT_TIE_TOL};
use crate::hermitian::{RealDiagonal, DEFAULT_CLUSTER_TOL};
use crate::moment::{DEFAULT_GAP_TOL, DEFAULT_MAX_ITERS};
use crate::optimize::{dispatch, OptimizeParams};
use crate::rank_one::{closed_polygon_angles, minimizing_diagonal, nonunique_diagonals, orthogonal_partner, RankOneCase};
use io::InputError;
use report::{ComplexMatrix, RankOneReport, Report, Tolerances, Witness};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NOT_MINIMAL: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_INCONCLUSIVE: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "mindiag", version, about = "Best diagonal approximants of Hermitian matrices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Minimize ‖A0 + Diag(x)‖ over real x and certify the result.
    Minimize {
        input: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 4)]
        starts: usize,
        #[command(flatten)]
        flags: SolverFlags,
    },
    /// Decide whether A0 + Diag(x) is minimal.
    Certify {
        input: String,
        /// Comma-separated diagonal (default: zero).
        #[arg(long, allow_hyphen_values = true)]
        x: Option<String>,
        #[command(flatten)]
        flags: SolverFlags,
    },
    /// Write the real semidefinite program in SDPA sparse format.
    ExportSdpa { input: String, out: String },
    /// Closed-form minimizing diagonal of h h* for a unit vector h.
    Rank1 {
        /// Comma-separated real parts.
        #[arg(long, allow_hyphen_values = true, conflicts_with = "file")]
        h: Option<String>,
        /// Comma-separated imaginary parts.
        #[arg(long, allow_hyphen_values = true, requires = "h")]
        h_imag: Option<String>,
        /// JSON file `{"h": [...], "h_imag": [...]}`.
        #[arg(long)]
        file: Option<String>,
        #[arg(long)]
        json: bool,
        #[arg(long)]
        report: Option<String>,
    },
}

#[derive(Debug, Args)]
struct SolverFlags {
    #[arg(long)]
    max_iters: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_GAP_TOL)]
    gap_tol: f64,
    #[arg(long, default_value_t = DEFAULT_CLUSTER_TOL)]
    cluster_tol: f64,
    /// Print the JSON report instead of the summary.
    #[arg(long)]
    json: bool,
    /// Also write the JSON report to this path.
    #[arg(long)]
    report: Option<String>,
}

impl SolverFlags {
    fn tolerances(&self, default_iters: usize) -> Tolerances {
        Tolerances {
            gap_tol: self.gap_tol,
            cluster_tol: self.cluster_tol,
            tie_tol: DEFAULT_TIE_TOL,
            max_iters: self.max_iters.unwrap_or(default_iters),
        }
    }
}

enum Failure {
    Input(String),
    Numeric(String),
}

impl From<InputError> for Failure {
    fn from(e: InputError) -> Self {
        Failure::Input(e.0)
    }
}

impl From<crate::Error> for Failure {
    fn from(e: crate::Error) -> Self {
        match e {
            crate::Error::InvalidParameter(m) => Failure::Input(format!("invalid parameter: {m}")),
            e => Failure::Numeric(e.to_string()),
        }
    }
}

struct Io<'a> {
    out: &'a mut dyn Write,
}

impl Io<'_> {
    fn emit(&mut self, json: bool, report_path: Option<&str>, json_text: &str, summary: &str) -> Result<(), Failure> {
        if let Some(path) = report_path {
            std::fs::write(path, json_text).map_err(|e| Failure::Input(format!("cannot write report {path}: {e}")))?;
        }
        let text = if json { json_text } else { summary };
        self.out.write_all(text.as_bytes()).map_err(|e| Failure::Input(format!("cannot write output: {e}")))
    }
}

fn minimize(io: &mut Io, input: &str, seed: u64, starts: usize, flags: &SolverFlags) -> Result<i32, Failure> {
    let problem = io::read_problem(input)?;
    let tol = flags.tolerances(OptimizeParams::default().max_iters);
    let params = OptimizeParams { max_iters: tol.max_iters, gap_tol: tol.gap_tol, cluster_tol: tol.cluster_tol, ..OptimizeParams::default() };
    let result = dispatch(&problem.matrix, starts, seed, &params)?;
    let report = Report::minimize(problem.digest, seed, starts, tol, &result);
    io.emit(flags.json, flags.report.as_deref(), &report.to_json(), &report.summary())?;
    Ok(if result.certificate.is_minimal() { EXIT_OK } else { EXIT_INCONCLUSIVE })
}

fn certify(io: &mut Io, input: &str, x: Option<&str>, flags: &SolverFlags) -> Result<i32, Failure> {
    let problem = io::read_problem(input)?;
    let x = match x {
        Some(text) => io::parse_floats(text, "--x")?,
        None => vec![0.0; problem.n],
    };
    if x.len() != problem.n {
        return Err(Failure::Input(format!("--x: expected {} entries, found {}", problem.n, x.len())));
    }
    let tol = flags.tolerances(DEFAULT_MAX_ITERS);
    let params = CertifyParams { gap_tol: tol.gap_tol, max_iters: tol.max_iters, cluster_tol: tol.cluster_tol, tie_tol: tol.tie_tol };
    let cert = certify_minimality(&problem.matrix, &RealDiagonal::new(x.clone()), &params)?;
    let report = Report::certify(problem.digest, x, tol, &cert);
    io.emit(flags.json, flags.report.as_deref(), &report.to_json(), &report.summary())?;
    Ok(match cert.verdict {
        Verdict::Minimal => EXIT_OK,
        Verdict::NotMinimal => EXIT_NOT_MINIMAL,
        Verdict::Inconclusive => EXIT_INCONCLUSIVE,
    })
}

fn export_sdpa(io: &mut Io, input: &str, out: &str) -> Result<i32, Failure> {
    let problem = io::read_problem(input)?;
    std::fs::write(out, sdpa::export(&problem.matrix)).map_err(|e| Failure::Input(format!("cannot write {out}: {e}")))?;
    writeln!(io.out, "wrote {out} ({} variables, 2 blocks of size {})", problem.n + 1, 2 * problem.n)
        .map_err(|e| Failure::Input(format!("cannot write output: {e}")))?;
    Ok(EXIT_OK)
}

fn rank1(io: &mut Io, h: Option<&str>, h_imag: Option<&str>, file: Option<&str>, json: bool, report_path: Option<&str>) -> Result<i32, Failure> {
    let (re, im) = match (h, file) {
        (Some(h), _) => (io::parse_floats(h, "--h")?, h_imag.map(|t| io::parse_floats(t, "--h-imag")).transpose()?),
        (None, Some(path)) => io::parse_vector_file(&io::read_bytes(path)?)?,
        (None, None) => return Err(Failure::Input("rank1: give --h or --file".into())),
    };
    let h = io::unit_vector(&re, im.as_deref())?;
    let sol = minimizing_diagonal(&h);
    let mut report = RankOneReport::new(h.as_slice(), &sol);
    if sol.case_tag != RankOneCase::BigCoordinate {
        let weights = h.weights();
        // sides |h_j|² already sum to one
        report.angles = Some(closed_polygon_angles(&weights)?);
        let k = orthogonal_partner(&h)?;
        report.partner_re = Some(k.as_slice().iter().map(|z| z.re + 0.0).collect());
        report.partner_im = Some(k.as_slice().iter().map(|z| z.im + 0.0).collect());
        if let Some(j0) = h.as_slice().iter().position(|z| z.norm() == 0.0) {
            let (plus, minus) = nonunique_diagonals(&h, j0)?;
            let witness = |m: &crate::hermitian::HermitianMatrix| Witness {
                diagonal: m.diagonal().iter().zip(&weights).map(|(d, w)| d - w).collect(),
                matrix: ComplexMatrix::from_hermitian(m),
            };
            report.zero_index = Some(j0);
            report.witnesses = Some([witness(&plus), witness(&minus)]);
        }
    }
    io.emit(json, report_path, &report.to_json(), &report.summary())?;
    Ok(EXIT_OK)
}

fn dispatch_command(io: &mut Io, cli: Cli) -> Result<i32, Failure> {
    match cli.command {
        Command::Minimize { input, seed, starts, flags } => minimize(io, &input, seed, starts, &flags),
        Command::Certify { input, x, flags } => certify(io, &input, x.as_deref(), &flags),
        Command::ExportSdpa { input, out } => export_sdpa(io, &input, &out),
        Command::Rank1 { h, h_imag, file, json, report } => rank1(io, h.as_deref(), h_imag.as_deref(), file.as_deref(), json, report.as_deref()),
    }
}

/// Runs the CLI with explicit streams; returns the exit code.
pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    let outcome = catch_unwind(AssertUnwindSafe(|| dispatch_command(&mut Io { out: &mut *out }, cli)));
    match outcome {
        Ok(Ok(code)) => code,
        Ok(Err(Failure::Input(msg))) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_INPUT
        }
        Ok(Err(Failure::Numeric(msg))) => {
            let _ = writeln!(err, "numerical failure: {msg}");
            EXIT_INCONCLUSIVE
        }
        Err(_) => {
            let _ = writeln!(err, "internal error: solver panicked");
            EXIT_INCONCLUSIVE
        }
    }
}

pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(args, &mut stdout.lock(), &mut stderr.lock())
}

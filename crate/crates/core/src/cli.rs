//! The `krylov` command-line harness.
//!
//! Exit codes: 0 converged, 1 error (including usage errors), 2 breakdown or
//! stagnation, 3 iteration limit reached.
//!
//! Convergence CSVs have the header `iter,rnorm_primal,rnorm_dual,enorm_primal,enorm_dual`.
//! Columns that do not apply to a method are left empty, and every number is
//! printed with 17 significant digits.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use log::info;

use crate::bilq::{bicg_solve, bilq_solve};
use crate::dual::{bilqr_solve, trilqr_solve, usymlq_solve, usymqr_solve};
use crate::error::{KrylovError, Result};
use crate::functional::superconvergence_study;
use crate::linop::{jacobi_scaled, read_matrix_market, read_vector, DiagonalScaling, LinearOperator, SparseMatrix};
use crate::minres::minres_augmented_solve;
use crate::problems::{convdiff_2d_reference, ode_1d_reference, polar_poisson, random_vector};
use crate::qmr::qmr_solve;
use crate::record::{History, SolveOptions, Status, StoppingRule};
use crate::scalar::{cast_vec, sci17, Scalar};
use crate::vecops::dist;

pub const EXIT_CONVERGED: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_BREAKDOWN: i32 = 2;
pub const EXIT_MAX_ITERATIONS: i32 = 3;

pub const CSV_HEADER: &str = "iter,rnorm_primal,rnorm_dual,enorm_primal,enorm_dual";

#[derive(Debug, Parser)]
#[command(
    name = "krylov",
    version,
    about = "BiLQ, QMR and their adjoint-pair companions on sparse test problems"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one method and write its convergence history.
    Solve(SolveArgs),
    /// Run several methods on the same problem and summarize.
    Compare(CompareArgs),
    /// Functional-error study on the 1D problem.
    Superconv(SuperconvArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Bilq,
    Bicg,
    Qmr,
    Usymlq,
    Usymqr,
    Bilqr,
    Trilqr,
    #[value(name = "minres-aug")]
    MinresAug,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Bilq => "bilq",
            Method::Bicg => "bicg",
            Method::Qmr => "qmr",
            Method::Usymlq => "usymlq",
            Method::Usymqr => "usymqr",
            Method::Bilqr => "bilqr",
            Method::Trilqr => "trilqr",
            Method::MinresAug => "minres-aug",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProblemName {
    #[value(name = "polar-poisson")]
    PolarPoisson,
    Ode1d,
    Convdiff2d,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Precision {
    Single,
    Double,
    Quad,
}

#[derive(Debug, Clone, Args)]
#[group(skip)]
pub struct ProblemArgs {
    /// Built-in problem generator.
    #[arg(long, value_enum, group = "source")]
    pub problem: Option<ProblemName>,
    /// Matrix Market file with the operator.
    #[arg(long, group = "source")]
    pub mm: Option<PathBuf>,
    /// Right-hand side `b` for `--mm` (seeded random vector when absent).
    #[arg(long, requires = "mm")]
    pub rhs: Option<PathBuf>,
    /// Adjoint right-hand side `c` for `--mm` (defaults to `b`).
    #[arg(long, requires = "mm")]
    pub dual_rhs: Option<PathBuf>,
    /// Seed of the random right-hand side.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 50)]
    pub nr: usize,
    #[arg(long, default_value_t = 50)]
    pub ntheta: usize,
    #[arg(long, default_value_t = 1.0)]
    pub radius: f64,
    /// Interior grid points per direction for `ode1d` and `convdiff2d`.
    #[arg(long, default_value_t = 50)]
    pub n: usize,
    #[arg(long, default_value = "1,1,1", value_parser = parse_triple)]
    pub chi: (f64, f64, f64),
    #[arg(long, default_value = "5,20", value_parser = parse_pair)]
    pub kappa: (f64, f64),
    /// Solve the left Jacobi-scaled systems `D⁻¹A x = D⁻¹b`, `(D⁻¹A)ᵀ t̂ = c`.
    #[arg(long)]
    pub jacobi: bool,
}

#[derive(Debug, Clone, Args)]
pub struct SolverArgs {
    #[arg(long, value_enum, default_value = "double")]
    pub precision: Precision,
    #[arg(long, default_value_t = 1e-10)]
    pub atol: f64,
    #[arg(long, default_value_t = 1e-7)]
    pub rtol: f64,
    #[arg(long, alias = "max-iterations", default_value_t = 10_000)]
    pub max_iter: usize,
    /// Report the BiCG (or CG-like) point whenever it exists.
    #[arg(long)]
    pub transfer: bool,
    /// Test explicit residuals `‖b − Ax‖`, `‖c − Aᵀt‖` every iteration.
    #[arg(long)]
    pub explicit: bool,
}

#[derive(Debug, Clone, Args)]
#[command(group = ArgGroup::new("source").required(true).multiple(false))]
pub struct SolveArgs {
    #[arg(long, value_enum)]
    pub method: Method,
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// CSV destination; standard output when absent.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
#[command(group = ArgGroup::new("source").required(true).multiple(false))]
pub struct CompareArgs {
    #[arg(long, value_enum, value_delimiter = ',', required = true)]
    pub methods: Vec<Method>,
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Directory for `<method>.csv` and `summary.csv`.
    #[arg(long, default_value = ".")]
    pub output_dir: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct SuperconvArgs {
    #[arg(long, value_delimiter = ',', default_value = "16,32,64,128,256")]
    pub ns: Vec<usize>,
    #[arg(long, default_value = "1,1,1", value_parser = parse_triple)]
    pub chi: (f64, f64, f64),
    #[arg(long, default_value_t = 1e-10)]
    pub atol: f64,
    #[arg(long, default_value_t = 1e-7)]
    pub rtol: f64,
    #[arg(long, alias = "max-iterations", default_value_t = 10_000)]
    pub max_iter: usize,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

fn parse_list(s: &str, len: usize) -> std::result::Result<Vec<f64>, String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| format!("{t:?}: {e}")))
        .collect::<std::result::Result<_, _>>()?;
    if v.len() != len {
        return Err(format!("expected {len} comma-separated numbers, got {}", v.len()));
    }
    Ok(v)
}

fn parse_triple(s: &str) -> std::result::Result<(f64, f64, f64), String> {
    let v = parse_list(s, 3)?;
    Ok((v[0], v[1], v[2]))
}

fn parse_pair(s: &str) -> std::result::Result<(f64, f64), String> {
    let v = parse_list(s, 2)?;
    Ok((v[0], v[1]))
}

/// A loaded or generated problem in binary64.
#[derive(Debug, Clone)]
pub struct LoadedProblem {
    pub matrix: SparseMatrix<f64>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    pub x_exact: Option<Vec<f64>>,
    pub t_exact: Option<Vec<f64>>,
}

pub fn load_problem(args: &ProblemArgs) -> Result<LoadedProblem> {
    if let Some(path) = &args.mm {
        let matrix = read_matrix_market(path)?;
        if matrix.nrows() != matrix.ncols() {
            return Err(KrylovError::NotSquare {
                rows: matrix.nrows(),
                cols: matrix.ncols(),
            });
        }
        let n = matrix.nrows();
        let b = match &args.rhs {
            Some(p) => read_vector(p)?,
            None => random_vector(n, args.seed),
        };
        let c = match &args.dual_rhs {
            Some(p) => read_vector(p)?,
            None => b.clone(),
        };
        crate::error::check_len("right-hand side length", n, b.len())?;
        crate::error::check_len("dual right-hand side length", n, c.len())?;
        return Ok(LoadedProblem {
            matrix,
            b,
            c,
            x_exact: None,
            t_exact: None,
        });
    }
    let p = match args.problem {
        Some(ProblemName::PolarPoisson) => {
            polar_poisson(args.nr, args.ntheta, args.radius, |_, t| -3.0 * t.cos(), |_| 0.0)?
                .with_exact_primal(|q| q[0] * (args.radius - q[0]) * q[1].cos())
        }
        Some(ProblemName::Ode1d) => ode_1d_reference(args.n, args.chi)?,
        Some(ProblemName::Convdiff2d) => convdiff_2d_reference(args.n, args.kappa)?,
        None => return Err(KrylovError::InvalidInput("no problem source given".into())),
    };
    let c = p.dual_rhs_or_primal().to_vec();
    Ok(LoadedProblem {
        matrix: p.operator,
        b: p.rhs_primal,
        c,
        x_exact: p.exact_primal,
        t_exact: p.exact_dual,
    })
}

/// Histories and solutions of one method, converted to binary64.
#[derive(Debug, Clone)]
pub struct MethodRun {
    pub method: Method,
    pub primal: Option<History>,
    pub dual: Option<History>,
    pub x: Option<Vec<f64>>,
    pub t: Option<Vec<f64>>,
    pub iterations: usize,
}

impl MethodRun {
    fn histories(&self) -> impl Iterator<Item = &History> {
        self.primal.iter().chain(self.dual.iter())
    }

    pub fn exit_code(&self) -> i32 {
        status_code(self.histories().map(|h| h.status))
    }

    pub fn status_text(&self) -> String {
        let parts: Vec<String> = [("primal", &self.primal), ("dual", &self.dual)]
            .iter()
            .filter_map(|(name, h)| h.as_ref().map(|h| format!("{name} {}", h.status)))
            .collect();
        parts.join("; ")
    }
}

fn status_code(statuses: impl Iterator<Item = Status>) -> i32 {
    let mut code = EXIT_CONVERGED;
    for s in statuses {
        let c = match s {
            Status::Converged => EXIT_CONVERGED,
            Status::Breakdown { .. } | Status::Stagnation { .. } => EXIT_BREAKDOWN,
            Status::MaxIterations | Status::Running => EXIT_MAX_ITERATIONS,
        };
        code = match (code, c) {
            (EXIT_BREAKDOWN, _) | (_, EXIT_BREAKDOWN) => EXIT_BREAKDOWN,
            (a, b) => a.max(b),
        };
    }
    code
}

fn error_code(e: &KrylovError) -> i32 {
    match e {
        KrylovError::InitBreakdown | KrylovError::UndefinedPoint { .. } => EXIT_BREAKDOWN,
        _ => EXIT_ERROR,
    }
}

pub fn run_method(method: Method, problem: &LoadedProblem, solver: &SolverArgs, jacobi: bool) -> Result<MethodRun> {
    match solver.precision {
        Precision::Single => run_typed::<f32>(method, problem, solver, jacobi),
        Precision::Double => run_typed::<f64>(method, problem, solver, jacobi),
        #[cfg(feature = "quad")]
        Precision::Quad => run_typed::<crate::scalar::Quad>(method, problem, solver, jacobi),
        #[cfg(not(feature = "quad"))]
        Precision::Quad => Err(KrylovError::Unsupported("unsupported precision: quad".into())),
    }
}

fn run_typed<T: Scalar>(
    method: Method,
    problem: &LoadedProblem,
    solver: &SolverArgs,
    jacobi: bool,
) -> Result<MethodRun> {
    let rule = StoppingRule::new(solver.atol, solver.rtol, solver.max_iter)?;
    let a: SparseMatrix<T> = problem.matrix.cast();
    let mut b: Vec<T> = cast_vec(&problem.b);
    let c: Vec<T> = cast_vec(&problem.c);
    let mut t_exact: Option<Vec<T>> = problem.t_exact.as_deref().map(cast_vec);
    let scaling = if jacobi {
        Some(DiagonalScaling::jacobi(&a)?)
    } else {
        None
    };
    let op: Box<dyn LinearOperator<T> + '_> = match &scaling {
        Some(d) => {
            b = d.scale(&b);
            // t̂ = D t solves the scaled adjoint system.
            t_exact = t_exact.map(|t| t.iter().zip(d.diagonal()).map(|(&x, &s)| x * s).collect());
            Box::new(jacobi_scaled(&a, d)?)
        }
        None => Box::new(&a),
    };
    let opts = SolveOptions {
        rule,
        transfer: solver.transfer,
        explicit_residuals: solver.explicit,
        x_exact: problem.x_exact.as_deref().map(cast_vec),
        t_exact,
        ..SolveOptions::default()
    };
    let run = dispatch(method, &op, &b, &c, &opts, |t| match &scaling {
        Some(d) => d.unscale_dual(&t),
        None => t,
    })?;
    info!(
        "{}: {} after {} iterations",
        method.name(),
        run.status_text(),
        run.iterations
    );
    Ok(run)
}

/// Runs `method` on `op` in precision `T`; `finish_t` maps the adjoint
/// solution before it is converted to binary64.
fn dispatch<T: Scalar, O: LinearOperator<T>>(
    method: Method,
    op: O,
    b: &[T],
    c: &[T],
    opts: &SolveOptions<T>,
    finish_t: impl Fn(Vec<T>) -> Vec<T>,
) -> Result<MethodRun> {
    let to64 = |v: Vec<T>| -> Vec<f64> { cast_vec(&v) };
    let single = |r: crate::record::SolveResult<T>, primal: bool| MethodRun {
        method,
        iterations: r.history.iterations,
        primal: primal.then(|| r.history.clone()),
        dual: (!primal).then(|| r.history.clone()),
        x: primal.then(|| to64(r.x.clone())),
        t: (!primal).then(|| to64(finish_t(r.x.clone()))),
    };
    let pair = |s: crate::record::DualSolution<T>| MethodRun {
        method,
        iterations: s.iterations,
        primal: Some(s.primal),
        dual: Some(s.dual),
        x: Some(to64(s.x)),
        t: Some(to64(finish_t(s.t))),
    };
    Ok(match method {
        Method::Bilq => single(bilq_solve(&op, b, None, opts)?, true),
        Method::Bicg => single(bicg_solve(&op, b, None, opts)?, true),
        Method::Qmr => single(qmr_solve(&op, b, None, opts)?, true),
        Method::Usymlq => single(usymlq_solve(&op, b, None, opts)?, true),
        Method::Usymqr => single(usymqr_solve(&op, b, c, opts)?, false),
        Method::Bilqr => pair(bilqr_solve(&op, b, c, opts)?),
        Method::Trilqr => pair(trilqr_solve(&op, b, c, opts)?),
        Method::MinresAug => pair(minres_augmented_solve(&op, b, c, opts)?),
    })
}

/// Runs `method` on a square operator of size `n` given by binary64 callbacks
/// for `y = A x` and `y = Aᵀ x`. In single and quad precision vectors are
/// rounded to binary64 around every application, so the operator is never
/// more accurate than binary64. Jacobi scaling needs an assembled matrix and
/// is not offered here.
pub fn run_with_callbacks<F, G>(
    method: Method,
    n: usize,
    forward: F,
    adjoint: G,
    b: &[f64],
    c: &[f64],
    solver: &SolverArgs,
) -> Result<MethodRun>
where
    F: Fn(&[f64], &mut [f64]) + Send + Sync,
    G: Fn(&[f64], &mut [f64]) + Send + Sync,
{
    crate::error::check_len("right-hand side length", n, b.len())?;
    crate::error::check_len("dual right-hand side length", n, c.len())?;
    match solver.precision {
        Precision::Single => callbacks_typed::<f32, _, _>(method, n, &forward, &adjoint, b, c, solver),
        Precision::Double => callbacks_typed::<f64, _, _>(method, n, &forward, &adjoint, b, c, solver),
        #[cfg(feature = "quad")]
        Precision::Quad => callbacks_typed::<crate::scalar::Quad, _, _>(method, n, &forward, &adjoint, b, c, solver),
        #[cfg(not(feature = "quad"))]
        Precision::Quad => Err(KrylovError::Unsupported("unsupported precision: quad".into())),
    }
}

fn callbacks_typed<T: Scalar, F, G>(
    method: Method,
    n: usize,
    forward: &F,
    adjoint: &G,
    b: &[f64],
    c: &[f64],
    solver: &SolverArgs,
) -> Result<MethodRun>
where
    F: Fn(&[f64], &mut [f64]) + Send + Sync,
    G: Fn(&[f64], &mut [f64]) + Send + Sync,
{
    let through64 = |f: &(dyn Fn(&[f64], &mut [f64]) + Send + Sync), v: &[T], out: &mut [T]| {
        let x: Vec<f64> = cast_vec(v);
        let mut y = vec![0.0; out.len()];
        f(&x, &mut y);
        for (o, y) in out.iter_mut().zip(y) {
            *o = T::of(y);
        }
    };
    let op = crate::linop::FnOperator::new(
        n,
        n,
        |v: &[T], out: &mut [T]| through64(forward, v, out),
        |u: &[T], out: &mut [T]| through64(adjoint, u, out),
    );
    let opts = SolveOptions {
        rule: StoppingRule::new(solver.atol, solver.rtol, solver.max_iter)?,
        transfer: solver.transfer,
        explicit_residuals: solver.explicit,
        ..SolveOptions::default()
    };
    dispatch(method, op, &cast_vec(b), &cast_vec(c), &opts, |t| t)
}

fn num(x: Option<f64>) -> String {
    x.map(sci17).unwrap_or_default()
}

/// Convergence history in the stable CSV schema.
pub fn history_csv(run: &MethodRun) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    let last = run
        .histories()
        .filter_map(|h| h.records.last().map(|r| r.iteration))
        .max()
        .unwrap_or(0);
    // Records are sorted by iteration; a cursor per side keeps this linear.
    let mut cursors = [0usize, 0usize];
    for k in 1..=last {
        let mut row = [None, None];
        for (side, h) in [&run.primal, &run.dual].into_iter().enumerate() {
            if let Some(h) = h {
                let recs = &h.records;
                while cursors[side] < recs.len() && recs[cursors[side]].iteration < k {
                    cursors[side] += 1;
                }
                if cursors[side] < recs.len() && recs[cursors[side]].iteration == k {
                    row[side] = Some(recs[cursors[side]]);
                }
            }
        }
        if row.iter().all(Option::is_none) {
            continue;
        }
        let r = |side: usize| row[side].map(|r| r.rnorm_explicit.unwrap_or(r.rnorm));
        let e = |side: usize| row[side].and_then(|r| r.enorm);
        let _ = writeln!(out, "{k},{},{},{},{}", num(r(0)), num(r(1)), num(e(0)), num(e(1)));
    }
    out
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|source| KrylovError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn final_enorms(run: &MethodRun, problem: &LoadedProblem) -> (Option<f64>, Option<f64>) {
    let e = |sol: &Option<Vec<f64>>, exact: &Option<Vec<f64>>| match (sol, exact) {
        (Some(s), Some(x)) => Some(dist(s, x)),
        _ => None,
    };
    (e(&run.x, &problem.x_exact), e(&run.t, &problem.t_exact))
}

fn cmd_solve(args: &SolveArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let problem = load_problem(&args.problem)?;
    let run = run_method(args.method, &problem, &args.solver, args.problem.jacobi)?;
    let csv = history_csv(&run);
    match &args.output {
        Some(p) => write_file(p, &csv)?,
        None => out.write_all(csv.as_bytes()).map_err(io_err)?,
    }
    let finals: Vec<String> = run.histories().map(|h| sci17(h.final_rnorm)).collect();
    writeln!(
        err,
        "{}: {} after {} iterations; final residual {}",
        args.method.name(),
        run.status_text(),
        run.iterations,
        finals.join(" / ")
    )
    .map_err(io_err)?;
    Ok(run.exit_code())
}

fn io_err(source: std::io::Error) -> KrylovError {
    KrylovError::Io {
        path: PathBuf::from("<stdout>"),
        source,
    }
}

fn cmd_compare(args: &CompareArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let problem = load_problem(&args.problem)?;
    std::fs::create_dir_all(&args.output_dir).map_err(|source| KrylovError::Io {
        path: args.output_dir.clone(),
        source,
    })?;
    let results: Vec<Result<MethodRun>> = std::thread::scope(|s| {
        let handles: Vec<_> = args
            .methods
            .iter()
            .map(|&m| {
                let problem = &problem;
                s.spawn(move || run_method(m, problem, &args.solver, args.problem.jacobi))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| {
                h.join()
                    .unwrap_or_else(|_| Err(KrylovError::InvalidInput("solver thread panicked".into())))
            })
            .collect()
    });

    let mut summary = String::from(
        "method,status,iterations,final_rnorm_primal,final_rnorm_dual,final_enorm_primal,final_enorm_dual\n",
    );
    let mut table = format!(
        "{:<11} {:>10} {:>24} {:>24} {:>24} {:>24}  status\n",
        "method", "iterations", "rnorm_primal", "rnorm_dual", "enorm_primal", "enorm_dual"
    );
    let mut codes = Vec::new();
    for (m, res) in args.methods.iter().zip(results) {
        match res {
            Ok(run) => {
                write_file(&args.output_dir.join(format!("{}.csv", m.name())), &history_csv(&run))?;
                let (ep, ed) = final_enorms(&run, &problem);
                let rp = run.primal.as_ref().map(|h| h.final_rnorm);
                let rd = run.dual.as_ref().map(|h| h.final_rnorm);
                let status = run.status_text();
                let _ = writeln!(
                    summary,
                    "{},{},{},{},{},{},{}",
                    m.name(),
                    status,
                    run.iterations,
                    num(rp),
                    num(rd),
                    num(ep),
                    num(ed)
                );
                let _ = writeln!(
                    table,
                    "{:<11} {:>10} {:>24} {:>24} {:>24} {:>24}  {}",
                    m.name(),
                    run.iterations,
                    num(rp),
                    num(rd),
                    num(ep),
                    num(ed),
                    status
                );
                codes.push(run.exit_code());
            }
            Err(e) => {
                writeln!(err, "{}: {e}", m.name()).map_err(io_err)?;
                let _ = writeln!(summary, "{},error: {},,,,,", m.name(), e.to_string().replace(',', ";"));
                let _ = writeln!(table, "{:<11} error: {e}", m.name());
                codes.push(error_code(&e));
            }
        }
    }
    write_file(&args.output_dir.join("summary.csv"), &summary)?;
    out.write_all(table.as_bytes()).map_err(io_err)?;
    Ok(combine_codes(&codes))
}

fn combine_codes(codes: &[i32]) -> i32 {
    for c in [EXIT_ERROR, EXIT_BREAKDOWN, EXIT_MAX_ITERATIONS] {
        if codes.contains(&c) {
            return c;
        }
    }
    EXIT_CONVERGED
}

fn cmd_superconv(args: &SuperconvArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let rule = StoppingRule::new(args.atol, args.rtol, args.max_iter)?;
    let report = superconvergence_study(&args.ns, args.chi, rule)?;
    let mut csv = String::from("N,h,naive_error,corrected_error,converged\n");
    for r in &report.rows {
        let _ = writeln!(
            csv,
            "{},{},{},{},{}",
            r.n,
            sci17(r.h),
            sci17(r.naive_error),
            sci17(r.corrected_error),
            r.converged
        );
        if !r.converged {
            writeln!(
                err,
                "N = {}: the discrete systems did not converge; row excluded from the slope fit",
                r.n
            )
            .map_err(io_err)?;
        }
    }
    if report.rows.len() >= 2 {
        let _ = writeln!(
            csv,
            "slope,,{},{},",
            num(report.naive_slope),
            num(report.corrected_slope)
        );
    }
    match &args.output {
        Some(p) => write_file(p, &csv)?,
        None => out.write_all(csv.as_bytes()).map_err(io_err)?,
    }
    Ok(if report.rows.iter().all(|r| r.converged) {
        EXIT_CONVERGED
    } else {
        EXIT_MAX_ITERATIONS
    })
}

/// Parses `args` (including the program name) and runs the command.
pub fn run_with(
    args: impl IntoIterator<Item = impl Into<OsString> + Clone>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(err, "{}", e.render());
            return if e.use_stderr() { EXIT_ERROR } else { EXIT_CONVERGED };
        }
    };
    let res = match &cli.command {
        Command::Solve(a) => cmd_solve(a, out, err),
        Command::Compare(a) => cmd_compare(a, out, err),
        Command::Superconv(a) => cmd_superconv(a, out, err),
    };
    match res {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            error_code(&e)
        }
    }
}

/// Entry point of the binary: logging from `KRYLOV_LOG`, process arguments.
pub fn main_entry() -> i32 {
    let _ = env_logger::Builder::from_env(env_logger::Env::new().filter_or("KRYLOV_LOG", "warn")).try_init();
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock())
}

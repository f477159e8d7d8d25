//! C interface to the krylov-core solvers.
//!
//! Operators and results are opaque handles owned by the caller and released
//! with the matching `_free` function. Every fallible call returns a
//! [`KrylovStatus`]; on failure [`krylov_last_error_message`] describes the
//! error on the calling thread. Enumerations are passed as `int32_t` and
//! validated, so out-of-range values are reported rather than trusted.
//! Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, c_void, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::atomic::{AtomicBool, Ordering};

use krylov_core::cli::{run_method, run_with_callbacks, LoadedProblem, Method, MethodRun, Precision, SolverArgs};
use krylov_core::linop::{read_matrix_market, SparseMatrix};
use krylov_core::record::{History, Status};
use krylov_core::KrylovError;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KrylovStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    Io = 4,
    Parse = 5,
    /// `bᵀc = 0`: the biorthogonal process cannot start.
    InitBreakdown = 6,
    Unsupported = 7,
    /// A user callback returned nonzero.
    CallbackFailed = 8,
    Panic = 9,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KrylovMethod {
    Bilq = 0,
    Bicg = 1,
    Qmr = 2,
    Usymlq = 3,
    Usymqr = 4,
    Bilqr = 5,
    Trilqr = 6,
    MinresAug = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KrylovPrecision {
    Single = 0,
    Double = 1,
    Quad = 2,
}

/// How one side of a solve ended.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KrylovOutcome {
    /// The method does not solve this side.
    Absent = 0,
    Converged = 1,
    Breakdown = 2,
    Stagnation = 3,
    MaxIterations = 4,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KrylovSide {
    /// `A x = b`.
    Primal = 0,
    /// `Aᵀ t = c`.
    Dual = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct KrylovOptions {
    pub atol: f64,
    pub rtol: f64,
    pub max_iterations: usize,
    /// A `KrylovPrecision` value.
    pub precision: i32,
    /// Report the BiCG (or CG-like) point whenever it exists.
    pub transfer: bool,
    /// Test explicit residuals every iteration.
    pub explicit_residuals: bool,
    /// Left Jacobi scaling; assembled operators only.
    pub jacobi: bool,
}

/// `y = A x` (or `y = Aᵀ x`) for vectors of length `n`. Returns 0 on success.
pub type KrylovApplyFn =
    Option<unsafe extern "C" fn(user_data: *mut c_void, x: *const f64, y: *mut f64, n: usize) -> i32>;

/// Opaque linear operator.
pub struct KrylovOperator {
    kind: OperatorKind,
}

enum OperatorKind {
    Matrix(SparseMatrix<f64>),
    Callbacks(Callbacks),
}

#[derive(Clone, Copy)]
struct Callbacks {
    n: usize,
    forward: unsafe extern "C" fn(*mut c_void, *const f64, *mut f64, usize) -> i32,
    adjoint: unsafe extern "C" fn(*mut c_void, *const f64, *mut f64, usize) -> i32,
    user_data: *mut c_void,
}

// SAFETY: solves run on the calling thread; the caller promises the callbacks
// and `user_data` may be used from the thread that calls `krylov_solve`.
unsafe impl Send for Callbacks {}
unsafe impl Sync for Callbacks {}

impl Callbacks {
    /// Applies `A` or `Aᵀ`; on a nonzero return code fills `y` with NaN.
    fn apply(&self, adjoint: bool, x: &[f64], y: &mut [f64]) -> bool {
        let f = if adjoint { self.adjoint } else { self.forward };
        // SAFETY: buffers have length `n`; the caller vouched for `f`.
        let ok = unsafe { f(self.user_data, x.as_ptr(), y.as_mut_ptr(), self.n) } == 0;
        if !ok {
            y.fill(f64::NAN);
        }
        ok
    }
}

/// Opaque solve result.
pub struct KrylovResult {
    run: MethodRun,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn fail(status: KrylovStatus, msg: impl Into<String>) -> KrylovStatus {
    set_error(msg);
    status
}

fn from_error(e: &KrylovError) -> KrylovStatus {
    let status = match e {
        KrylovError::DimensionMismatch { .. } | KrylovError::NotSquare { .. } => KrylovStatus::DimensionMismatch,
        KrylovError::InvalidInput(_) | KrylovError::InvalidScaling { .. } | KrylovError::InvalidSparse(_) => {
            KrylovStatus::InvalidArgument
        }
        KrylovError::InitBreakdown => KrylovStatus::InitBreakdown,
        KrylovError::Parse { .. } => KrylovStatus::Parse,
        KrylovError::Io { .. } => KrylovStatus::Io,
        KrylovError::Unsupported(_) => KrylovStatus::Unsupported,
        _ => KrylovStatus::InvalidArgument,
    };
    fail(status, e.to_string())
}

/// Runs `f`, converting a panic into [`KrylovStatus::Panic`].
fn guard(f: impl FnOnce() -> KrylovStatus) -> KrylovStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            fail(KrylovStatus::Panic, format!("internal panic: {msg}"))
        }
    }
}

fn method_of(m: i32) -> Option<Method> {
    Some(match m {
        0 => Method::Bilq,
        1 => Method::Bicg,
        2 => Method::Qmr,
        3 => Method::Usymlq,
        4 => Method::Usymqr,
        5 => Method::Bilqr,
        6 => Method::Trilqr,
        7 => Method::MinresAug,
        _ => return None,
    })
}

fn precision_of(p: i32) -> Option<Precision> {
    Some(match p {
        0 => Precision::Single,
        1 => Precision::Double,
        2 => Precision::Quad,
        _ => return None,
    })
}

/// # Safety
/// `ptr` must be null or valid for `len` reads.
unsafe fn slice<'a, T>(ptr: *const T, len: usize) -> Option<&'a [T]> {
    if ptr.is_null() {
        None
    } else if len == 0 {
        Some(&[])
    } else {
        Some(std::slice::from_raw_parts(ptr, len))
    }
}

fn store<T>(out: *mut *mut T, value: T) {
    // SAFETY: callers check `out` for null first.
    unsafe { *out = Box::into_raw(Box::new(value)) };
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn krylov_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Whether `KRYLOV_PRECISION_QUAD` solves are available in this build.
#[no_mangle]
pub extern "C" fn krylov_quad_available() -> bool {
    krylov_core::QUAD_AVAILABLE
}

/// Message of the last failed call on this thread, or null. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn krylov_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |s| s.as_ptr()))
}

/// Defaults: `atol = 1e-10`, `rtol = 1e-7`, 10000 iterations, binary64.
#[no_mangle]
pub extern "C" fn krylov_options_default() -> KrylovOptions {
    KrylovOptions {
        atol: 1e-10,
        rtol: 1e-7,
        max_iterations: 10_000,
        precision: KrylovPrecision::Double as i32,
        transfer: false,
        explicit_residuals: false,
        jacobi: false,
    }
}

/// Copies a CSR matrix (`row_ptr` has `nrows + 1` entries, `col_idx` and
/// `values` have `row_ptr[nrows]`).
///
/// # Safety
/// The arrays must be valid for the lengths above; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn krylov_operator_from_csr(
    nrows: usize,
    ncols: usize,
    row_ptr: *const usize,
    col_idx: *const usize,
    values: *const f64,
    out: *mut *mut KrylovOperator,
) -> KrylovStatus {
    guard(|| {
        if out.is_null() || row_ptr.is_null() {
            return fail(KrylovStatus::NullPointer, "null argument");
        }
        let rp = slice(row_ptr, nrows + 1).unwrap_or_default();
        let nnz = rp[nrows];
        let (Some(ci), Some(v)) = (slice(col_idx, nnz), slice(values, nnz)) else {
            return fail(KrylovStatus::NullPointer, "null column index or value array");
        };
        match SparseMatrix::from_csr(nrows, ncols, rp.to_vec(), ci.to_vec(), v.to_vec()) {
            Ok(m) => {
                store(
                    out,
                    KrylovOperator {
                        kind: OperatorKind::Matrix(m),
                    },
                );
                KrylovStatus::Ok
            }
            Err(e) => from_error(&e),
        }
    })
}

/// Reads a Matrix Market coordinate file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn krylov_operator_from_matrix_market(
    path: *const c_char,
    out: *mut *mut KrylovOperator,
) -> KrylovStatus {
    guard(|| {
        if out.is_null() || path.is_null() {
            return fail(KrylovStatus::NullPointer, "null argument");
        }
        let Ok(path) = CStr::from_ptr(path).to_str() else {
            return fail(KrylovStatus::InvalidArgument, "path is not valid UTF-8");
        };
        match read_matrix_market(path) {
            Ok(m) => {
                store(
                    out,
                    KrylovOperator {
                        kind: OperatorKind::Matrix(m),
                    },
                );
                KrylovStatus::Ok
            }
            Err(e) => from_error(&e),
        }
    })
}

/// Wraps user callbacks for `y = A x` and `y = Aᵀ x` on vectors of length `n`.
/// `user_data` is passed through untouched and must outlive the operator.
///
/// # Safety
/// `out` must be writable; the callbacks must be safe to call with
/// `user_data` and buffers of length `n` from the thread that solves.
#[no_mangle]
pub unsafe extern "C" fn krylov_operator_from_callbacks(
    n: usize,
    forward: KrylovApplyFn,
    adjoint: KrylovApplyFn,
    user_data: *mut c_void,
    out: *mut *mut KrylovOperator,
) -> KrylovStatus {
    guard(|| {
        let (Some(forward), Some(adjoint)) = (forward, adjoint) else {
            return fail(KrylovStatus::NullPointer, "null callback");
        };
        if out.is_null() {
            return fail(KrylovStatus::NullPointer, "null output pointer");
        }
        if n == 0 {
            return fail(KrylovStatus::InvalidArgument, "operator dimension must be positive");
        }
        let cb = Callbacks {
            n,
            forward,
            adjoint,
            user_data,
        };
        store(
            out,
            KrylovOperator {
                kind: OperatorKind::Callbacks(cb),
            },
        );
        KrylovStatus::Ok
    })
}

/// Number of rows and columns; writes through whichever pointer is non-null.
///
/// # Safety
/// `op` must be a live operator handle.
#[no_mangle]
pub unsafe extern "C" fn krylov_operator_shape(
    op: *const KrylovOperator,
    nrows: *mut usize,
    ncols: *mut usize,
) -> KrylovStatus {
    guard(|| {
        let Some(op) = op.as_ref() else {
            return fail(KrylovStatus::NullPointer, "null operator");
        };
        let (r, c) = match &op.kind {
            OperatorKind::Matrix(m) => (m.nrows(), m.ncols()),
            OperatorKind::Callbacks(cb) => (cb.n, cb.n),
        };
        if !nrows.is_null() {
            *nrows = r;
        }
        if !ncols.is_null() {
            *ncols = c;
        }
        KrylovStatus::Ok
    })
}

/// # Safety
/// `op` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn krylov_operator_free(op: *mut KrylovOperator) {
    if !op.is_null() {
        drop(Box::from_raw(op));
    }
}

fn solve_callbacks(
    cb: Callbacks,
    method: Method,
    b: &[f64],
    c: &[f64],
    solver: &SolverArgs,
) -> Result<MethodRun, KrylovStatus> {
    let failed = AtomicBool::new(false);
    let call = |adjoint: bool, x: &[f64], y: &mut [f64]| {
        if !cb.apply(adjoint, x, y) {
            failed.store(true, Ordering::Relaxed);
        }
    };
    let res = run_with_callbacks(
        method,
        cb.n,
        |x: &[f64], y: &mut [f64]| call(false, x, y),
        |x: &[f64], y: &mut [f64]| call(true, x, y),
        b,
        c,
        solver,
    );
    if failed.load(Ordering::Relaxed) {
        return Err(fail(
            KrylovStatus::CallbackFailed,
            "an operator callback returned nonzero",
        ));
    }
    res.map_err(|e| from_error(&e))
}

/// Solves with `method` (a `KrylovMethod`). `b` and `c` have length `n`.
/// `c` is the dual right-hand side of the adjoint-pair methods and USYMQR and
/// is ignored by the others; when null, `b` is used. `options` may be null for the
/// defaults. Solver outcomes such as breakdown are reported through
/// [`krylov_result_outcome`], not the return value.
///
/// # Safety
/// `op` must be live; `b` (and `c` when non-null) valid for `n` reads; `out`
/// writable.
#[no_mangle]
pub unsafe extern "C" fn krylov_solve(
    op: *const KrylovOperator,
    method: i32,
    b: *const f64,
    c: *const f64,
    n: usize,
    options: *const KrylovOptions,
    out: *mut *mut KrylovResult,
) -> KrylovStatus {
    guard(|| {
        let (Some(op), Some(b)) = (op.as_ref(), slice(b, n)) else {
            return fail(KrylovStatus::NullPointer, "null operator or right-hand side");
        };
        if out.is_null() {
            return fail(KrylovStatus::NullPointer, "null output pointer");
        }
        let c = slice(c, n).unwrap_or(b);
        let Some(method) = method_of(method) else {
            return fail(KrylovStatus::InvalidArgument, format!("unknown method {method}"));
        };
        let opts = options.as_ref().copied().unwrap_or_else(|| krylov_options_default());
        let Some(precision) = precision_of(opts.precision) else {
            return fail(
                KrylovStatus::InvalidArgument,
                format!("unknown precision {}", opts.precision),
            );
        };
        let solver = SolverArgs {
            precision,
            atol: opts.atol,
            rtol: opts.rtol,
            max_iter: opts.max_iterations,
            transfer: opts.transfer,
            explicit: opts.explicit_residuals,
        };
        let res = match &op.kind {
            OperatorKind::Matrix(m) => {
                if m.nrows() != n {
                    return fail(
                        KrylovStatus::DimensionMismatch,
                        format!("right-hand side length {n} does not match operator size {}", m.nrows()),
                    );
                }
                let problem = LoadedProblem {
                    matrix: m.clone(),
                    b: b.to_vec(),
                    c: c.to_vec(),
                    x_exact: None,
                    t_exact: None,
                };
                run_method(method, &problem, &solver, opts.jacobi).map_err(|e| from_error(&e))
            }
            OperatorKind::Callbacks(cb) => {
                if opts.jacobi {
                    return fail(KrylovStatus::Unsupported, "Jacobi scaling needs an assembled matrix");
                }
                solve_callbacks(*cb, method, b, c, &solver)
            }
        };
        match res {
            Ok(run) => {
                store(out, KrylovResult { run });
                KrylovStatus::Ok
            }
            Err(status) => status,
        }
    })
}

fn side_of(res: &KrylovResult, side: i32) -> Option<(&History, Option<&Vec<f64>>)> {
    match side {
        0 => res.run.primal.as_ref().map(|h| (h, res.run.x.as_ref())),
        1 => res.run.dual.as_ref().map(|h| (h, res.run.t.as_ref())),
        _ => None,
    }
}

/// # Safety
/// `res` must be a live result handle.
#[no_mangle]
pub unsafe extern "C" fn krylov_result_iterations(res: *const KrylovResult) -> usize {
    res.as_ref().map_or(0, |r| r.run.iterations)
}

/// Outcome of `side` (a `KrylovSide`); `KRYLOV_OUTCOME_ABSENT` when the
/// method does not solve it.
///
/// # Safety
/// `res` must be a live result handle.
#[no_mangle]
pub unsafe extern "C" fn krylov_result_outcome(res: *const KrylovResult, side: i32) -> KrylovOutcome {
    let Some((h, _)) = res.as_ref().and_then(|r| side_of(r, side)) else {
        return KrylovOutcome::Absent;
    };
    match h.status {
        Status::Converged => KrylovOutcome::Converged,
        Status::Breakdown { .. } => KrylovOutcome::Breakdown,
        Status::Stagnation { .. } => KrylovOutcome::Stagnation,
        Status::MaxIterations | Status::Running => KrylovOutcome::MaxIterations,
    }
}

/// Explicit residual norm of the returned solution of `side`.
///
/// # Safety
/// `res` must be live and `value` writable.
#[no_mangle]
pub unsafe extern "C" fn krylov_result_final_residual(
    res: *const KrylovResult,
    side: i32,
    value: *mut f64,
) -> KrylovStatus {
    guard(|| {
        let Some(r) = res.as_ref() else {
            return fail(KrylovStatus::NullPointer, "null result");
        };
        if value.is_null() {
            return fail(KrylovStatus::NullPointer, "null output pointer");
        }
        match side_of(r, side) {
            Some((h, _)) => {
                *value = h.final_rnorm;
                KrylovStatus::Ok
            }
            None => fail(KrylovStatus::InvalidArgument, format!("side {side} is not available")),
        }
    })
}

/// Number of recorded iterations for `side` (0 when absent).
///
/// # Safety
/// `res` must be a live result handle.
#[no_mangle]
pub unsafe extern "C" fn krylov_result_history_length(res: *const KrylovResult, side: i32) -> usize {
    res.as_ref()
        .and_then(|r| side_of(r, side))
        .map_or(0, |(h, _)| h.records.len())
}

/// Copies the residual norm tested at each iteration of `side` into `buf`,
/// which must hold [`krylov_result_history_length`] values.
///
/// # Safety
/// `res` must be live and `buf` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn krylov_result_copy_history(
    res: *const KrylovResult,
    side: i32,
    buf: *mut f64,
    len: usize,
) -> KrylovStatus {
    guard(|| {
        let Some(r) = res.as_ref() else {
            return fail(KrylovStatus::NullPointer, "null result");
        };
        let Some((h, _)) = side_of(r, side) else {
            return fail(KrylovStatus::InvalidArgument, format!("side {side} is not available"));
        };
        if len != h.records.len() {
            return fail(
                KrylovStatus::DimensionMismatch,
                format!("history has {} entries, buffer holds {len}", h.records.len()),
            );
        }
        if len > 0 {
            if buf.is_null() {
                return fail(KrylovStatus::NullPointer, "null buffer");
            }
            let dst = std::slice::from_raw_parts_mut(buf, len);
            for (d, rec) in dst.iter_mut().zip(&h.records) {
                *d = rec.rnorm;
            }
        }
        KrylovStatus::Ok
    })
}

/// Copies `x` (primal) or `t` (dual) into `buf` of length `len`.
///
/// # Safety
/// `res` must be live and `buf` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn krylov_result_copy_solution(
    res: *const KrylovResult,
    side: i32,
    buf: *mut f64,
    len: usize,
) -> KrylovStatus {
    guard(|| {
        let Some(r) = res.as_ref() else {
            return fail(KrylovStatus::NullPointer, "null result");
        };
        let Some((_, Some(sol))) = side_of(r, side) else {
            return fail(KrylovStatus::InvalidArgument, format!("side {side} is not available"));
        };
        if len != sol.len() {
            return fail(
                KrylovStatus::DimensionMismatch,
                format!("solution has {} entries, buffer holds {len}", sol.len()),
            );
        }
        if buf.is_null() {
            return fail(KrylovStatus::NullPointer, "null buffer");
        }
        std::slice::from_raw_parts_mut(buf, len).copy_from_slice(sol);
        KrylovStatus::Ok
    })
}

/// # Safety
/// `res` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn krylov_result_free(res: *mut KrylovResult) {
    if !res.is_null() {
        drop(Box::from_raw(res));
    }
}

//! Joint primal/adjoint solvers.
//!
//! BiLQR pairs BiLQ on `A x = b` with QMR on `Aᵀ t = c` over one biorthogonal
//! process; TriLQR pairs USYMLQ and USYMQR over the orthogonal
//! tridiagonalization. Each system stops on its own tolerance
//! (`‖b‖` or `‖c‖` relative) and the run ends when both have stopped.

use crate::biorth::biorth_init;
use crate::engine::{run, Mode};
use crate::error::Result;
use crate::linop::LinearOperator;
use crate::record::{DualSolution, SolveOptions, SolveResult};
use crate::scalar::Scalar;
use crate::ssy::ssy_init;

/// BiLQR. Requires `bᵀc ≠ 0`.
pub fn bilqr_solve<T: Scalar, O: LinearOperator<T> + ?Sized>(
    op: &O,
    b: &[T],
    c: &[T],
    opts: &SolveOptions<T>,
) -> Result<DualSolution<T>> {
    let (process, _, _) = biorth_init(b, c)?;
    process.check_operator(op)?;
    run(op, process, b, c, opts, Mode::BOTH)
}

/// TriLQR. Accepts `bᵀc = 0`.
pub fn trilqr_solve<T: Scalar, O: LinearOperator<T> + ?Sized>(
    op: &O,
    b: &[T],
    c: &[T],
    opts: &SolveOptions<T>,
) -> Result<DualSolution<T>> {
    let (process, _, _) = ssy_init(b, c)?;
    process.check_operator(op)?;
    run(op, process, b, c, opts, Mode::BOTH)
}

/// USYMLQ for `A x = b`; `c` (default `b`) seeds the second basis.
///
/// With `opts.transfer` the CG-like point is tested and returned when it exists.
pub fn usymlq_solve<T: Scalar, O: LinearOperator<T> + ?Sized>(
    op: &O,
    b: &[T],
    c: Option<&[T]>,
    opts: &SolveOptions<T>,
) -> Result<SolveResult<T>> {
    let c = c.unwrap_or(b);
    let (process, _, _) = ssy_init(b, c)?;
    process.check_operator(op)?;
    Ok(run(op, process, b, c, opts, Mode::PRIMAL)?.primal_result())
}

/// USYMQR for `Aᵀ t = c`; `b` seeds the second basis.
pub fn usymqr_solve<T: Scalar, O: LinearOperator<T> + ?Sized>(
    op: &O,
    b: &[T],
    c: &[T],
    opts: &SolveOptions<T>,
) -> Result<SolveResult<T>> {
    let (process, _, _) = ssy_init(b, c)?;
    process.check_operator(op)?;
    Ok(run(op, process, b, c, opts, Mode::DUAL)?.dual_result())
}

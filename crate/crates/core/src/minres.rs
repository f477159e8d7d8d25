//! MINRES on the symmetric indefinite system `[0 A; Aᵀ 0] [t; x] = [b; c]`,
//! the baseline for the joint solvers.

use log::debug;

use crate::error::{check_len, KrylovError, Result};
use crate::linop::{augmented_operator, LinearOperator};
use crate::record::{DualSolution, History, IterationRecord, SolveOptions, Status};
use crate::scalar::Scalar;
use crate::vecops::{axpy, dist, dot, nrm2};

/// Splits a length-`2n` vector into its `(t, x)` blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedVector<T> {
    pub t_part: Vec<T>,
    pub x_part: Vec<T>,
}

impl<T: Scalar> AugmentedVector<T> {
    pub fn split(v: &[T]) -> Self {
        let n = v.len() / 2;
        Self {
            t_part: v[..n].to_vec(),
            x_part: v[n..].to_vec(),
        }
    }

    pub fn join(&self) -> Vec<T> {
        let mut v = self.t_part.clone();
        v.extend_from_slice(&self.x_part);
        v
    }
}

/// Returns `(‖b − A x‖, ‖c − Aᵀt‖)` for the stacked iterate `z = (t, x)`.
fn block_residuals<T: Scalar, O: LinearOperator<T> + ?Sized>(op: &O, rhs: &[T], z: &[T], ws: &mut [T]) -> (T, T) {
    op.apply(z, ws);
    let n = rhs.len() / 2;
    (dist(&rhs[..n], &ws[..n]), dist(&rhs[n..], &ws[n..]))
}

/// Stops when both `‖b − A x‖ ≤ atol + ‖b‖rtol` and `‖c − Aᵀt‖ ≤ atol + ‖c‖rtol`.
/// Per-system residuals are computed explicitly every iteration.
pub fn minres_augmented_solve<T: Scalar, O: LinearOperator<T>>(
    op: O,
    b: &[T],
    c: &[T],
    opts: &SolveOptions<T>,
) -> Result<DualSolution<T>> {
    let rule = opts.rule;
    rule.validate()?;
    let m = augmented_operator(op)?;
    let n = m.block();
    check_len("right-hand side length", n, b.len())?;
    check_len("dual right-hand side length", n, c.len())?;
    if let Some(xe) = &opts.x_exact {
        check_len("reference primal solution", n, xe.len())?;
    }
    if let Some(te) = &opts.t_exact {
        check_len("reference dual solution", n, te.len())?;
    }
    let rhs: Vec<T> = b.iter().chain(c).copied().collect();
    let beta1 = nrm2(&rhs);
    if beta1 == T::zero() {
        return Err(KrylovError::InvalidInput("both right-hand sides are zero".into()));
    }
    let tol_p = rule.threshold(nrm2(b));
    let tol_d = rule.threshold(nrm2(c));
    let eps = T::machine_eps();

    let nn = 2 * n;
    let zero = T::zero();
    let mut z = vec![zero; nn];
    let mut r1 = rhs.clone();
    let mut r2 = rhs.clone();
    let mut y = rhs.clone();
    let mut v = vec![zero; nn];
    let mut w = vec![zero; nn];
    let mut w1 = vec![zero; nn];
    let mut w2 = vec![zero; nn];
    let mut ws = vec![zero; nn];

    let (mut oldb, mut beta) = (zero, beta1);
    let (mut dbar, mut epsln) = (zero, zero);
    let mut phibar = beta1;
    let (mut cs, mut sn) = (-T::one(), zero);

    let mut primal = History::default();
    let mut dual = History::default();
    let mut primal_iterates = Vec::new();
    let mut dual_iterates = Vec::new();
    let mut k = 0usize;
    let status = loop {
        k += 1;
        let s = T::one() / beta;
        for (vi, &yi) in v.iter_mut().zip(&y) {
            *vi = s * yi;
        }
        m.apply(&v, &mut y);
        if k >= 2 {
            axpy(-beta / oldb, &r1, &mut y);
        }
        let alfa = dot(&v, &y);
        axpy(-alfa / beta, &r2, &mut y);
        std::mem::swap(&mut r1, &mut r2);
        r2.copy_from_slice(&y);
        oldb = beta;
        beta = nrm2(&r2);

        let oldeps = epsln;
        let delta = cs * dbar + sn * alfa;
        let gbar = sn * dbar - cs * alfa;
        epsln = sn * beta;
        dbar = -cs * beta;
        let gamma = gbar.hypot(beta).max(eps);
        cs = gbar / gamma;
        sn = beta / gamma;
        let phi = cs * phibar;
        phibar = sn * phibar;

        std::mem::swap(&mut w1, &mut w2);
        std::mem::swap(&mut w2, &mut w);
        for (((wi, &vi), &a), &bb) in w.iter_mut().zip(&v).zip(&w1).zip(&w2) {
            *wi = (vi - oldeps * a - delta * bb) / gamma;
        }
        axpy(phi, &w, &mut z);

        let (rp, rd) = block_residuals(&m, &rhs, &z, &mut ws);
        let (t_part, x_part) = z.split_at(n);
        let record = |r: T, e: Option<f64>| IterationRecord {
            iteration: k,
            rnorm: r.to_f64_lossy(),
            rnorm_estimate: phibar.abs().to_f64_lossy(),
            rnorm_explicit: Some(r.to_f64_lossy()),
            enorm: e,
            ..IterationRecord::default()
        };
        primal.records.push(record(
            rp,
            opts.x_exact.as_ref().map(|xe| dist(x_part, xe).to_f64_lossy()),
        ));
        dual.records.push(record(
            rd,
            opts.t_exact.as_ref().map(|te| dist(t_part, te).to_f64_lossy()),
        ));
        if opts.keep_iterates {
            primal_iterates.push(x_part.to_vec());
            dual_iterates.push(t_part.to_vec());
        }
        debug!("k={k} minres primal={} dual={} aggregate={}", rp, rd, phibar.abs());

        if rp <= tol_p && rd <= tol_d {
            break Status::Converged;
        }
        if beta <= eps * beta1 {
            // Invariant Krylov space: the aggregate residual is as small as it gets.
            break Status::Stagnation { iteration: k };
        }
        if k >= rule.max_iterations {
            break Status::MaxIterations;
        }
    };

    let parts = AugmentedVector::split(&z);
    let (rp, rd) = block_residuals(&m, &rhs, &z, &mut ws);
    primal.set_status(status, k);
    dual.set_status(status, k);
    primal.final_rnorm = rp.to_f64_lossy();
    dual.final_rnorm = rd.to_f64_lossy();
    Ok(DualSolution {
        x: parts.x_part,
        t: parts.t_part,
        primal,
        dual,
        iterations: k,
        primal_iterates,
        dual_iterates,
    })
}

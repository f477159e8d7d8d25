//! Shared iteration for every method built on a tridiagonalization process.
//!
//! One LQ factorization of `T_{k-1,k}` drives both the minimum-norm primal
//! iterate (BiLQ, USYMLQ) and the quasi-minimal-residual adjoint iterate
//! (QMR, USYMQR). Methods differ only in the process and in which halves run.

use std::collections::VecDeque;

use log::{debug, warn};

use crate::bilq::{bilq_residual_estimates, DirectionState, LqState};
use crate::biorth::{Process, StepOutcome};
use crate::error::{check_len, Result};
use crate::linop::LinearOperator;
use crate::qmr::QmrState;
use crate::record::{BreakdownKind, DualSolution, History, IterationRecord, SolveOptions, Status};
use crate::scalar::Scalar;
use crate::vecops::{axpy, dist, nrm2};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Mode {
    pub primal: bool,
    pub dual: bool,
    /// Only the Galerkin point is acceptable for the primal system.
    pub galerkin_only: bool,
}

impl Mode {
    pub const PRIMAL: Mode = Mode {
        primal: true,
        dual: false,
        galerkin_only: false,
    };
    pub const BICG: Mode = Mode {
        primal: true,
        dual: false,
        galerkin_only: true,
    };
    pub const DUAL: Mode = Mode {
        primal: false,
        dual: true,
        galerkin_only: false,
    };
    pub const BOTH: Mode = Mode {
        primal: true,
        dual: true,
        galerkin_only: false,
    };
}

struct Side {
    enabled: bool,
    history: History,
    joint: bool,
}

impl Side {
    fn new(enabled: bool, joint: bool) -> Self {
        Self {
            enabled,
            history: History::default(),
            joint,
        }
    }

    fn updating(&self) -> bool {
        self.enabled && (!self.history.status.is_terminal() || (self.joint && self.history.status.is_converged()))
    }

    fn terminal(&self) -> bool {
        !self.enabled || self.history.status.is_terminal()
    }

    fn stop(&mut self, status: Status, k: usize) {
        if self.enabled {
            self.history.set_status(status, k);
        }
    }
}

fn explicit_residual<T: Scalar, O: LinearOperator<T> + ?Sized>(
    op: &O,
    rhs: &[T],
    sol: &[T],
    adjoint: bool,
    ws: &mut [T],
) -> T {
    if adjoint {
        op.apply_adjoint(sol, ws);
    } else {
        op.apply(sol, ws);
    }
    dist(rhs, ws)
}

pub(crate) fn run<T, O, P>(
    op: &O,
    mut process: P,
    b: &[T],
    c: &[T],
    opts: &SolveOptions<T>,
    mode: Mode,
) -> Result<DualSolution<T>>
where
    T: Scalar,
    O: LinearOperator<T> + ?Sized,
    P: Process<T>,
{
    let rule = opts.rule;
    rule.validate()?;
    let n = b.len();
    if let Some(xe) = &opts.x_exact {
        check_len("reference primal solution", n, xe.len())?;
    }
    if let Some(te) = &opts.t_exact {
        check_len("reference dual solution", c.len(), te.len())?;
    }
    let transfer = opts.transfer || mode.galerkin_only;
    let tol_p = rule.threshold(nrm2(b));
    let tol_d = rule.threshold(nrm2(c));
    let bnorm = nrm2(b);
    let beta1 = process.beta1();
    let orthonormal = process.orthonormal();

    let mut primal = Side::new(mode.primal, opts.joint_completion);
    let mut dual = Side::new(mode.dual, opts.joint_completion);
    let mut dir = DirectionState::new(if mode.primal { process.primal_column() } else { &[] });
    let mut qmr = QmrState::new(process.gamma1(), if mode.dual { c.len() } else { 0 });
    let mut lq = LqState::new(T::zero(), beta1);
    let mut ws = vec![T::zero(); n.max(c.len())];
    let mut cand = vec![T::zero(); if mode.primal { n } else { 0 }];
    let mut primal_iterates = Vec::new();
    let mut dual_iterates = Vec::new();
    let mut zeta_sq: VecDeque<T> = VecDeque::new();
    let delay = rule.error_delay;

    // Galerkin correction applied to x^L when the primal result is finalized.
    let mut primal_shift: Option<T> = None;
    let mut primal_final = false;
    let (mut beta_k, mut gamma_k) = (T::zero(), T::zero());
    let mut k = 0usize;

    loop {
        k += 1;
        if k >= 2 {
            if lq.rotate(beta_k, gamma_k).is_err() {
                primal.stop(Status::Stagnation { iteration: k }, k);
                dual.stop(Status::Stagnation { iteration: k }, k);
                break;
            }
            if primal.updating() {
                dir.advance(lq.refl, lq.zeta, process.primal_column());
            }
            if dual.updating() {
                qmr.advance_from(&lq, process.dual_column_prev());
            }
            if let Some(d) = delay {
                zeta_sq.push_back(lq.zeta * lq.zeta);
                while zeta_sq.len() > d.saturating_sub(1) {
                    zeta_sq.pop_front();
                }
            }
        }
        if dual.updating() {
            qmr.add_tau(process.dual_norm_sq());
        }

        let step = process.step(op);
        let alpha = step.coeffs.alpha;
        if step.outcome == StepOutcome::Serious {
            let status = Status::Breakdown {
                iteration: k,
                kind: BreakdownKind::Serious,
            };
            primal.stop(status, k);
            dual.stop(status, k);
            debug!("serious breakdown at iteration {k}");
            break;
        }
        if k == 1 {
            lq = LqState::new(alpha, beta1);
        } else {
            lq.absorb(alpha);
        }
        let zeta_bar = lq.zeta_bar();
        let (lucky_p, lucky_d) = match step.outcome {
            StepOutcome::Lucky { primal, dual } => (primal, dual),
            _ => (false, false),
        };
        let beta_next = step.coeffs.beta_next;
        let drift_due =
            !opts.explicit_residuals && opts.drift_check_every > 0 && k.is_multiple_of(opts.drift_check_every);

        if primal.updating() {
            let (rl, rc, clamped) = if k == 1 {
                let (_, rc, _) = bilq_residual_estimates(&lq, alpha, beta_next, step.geometry);
                (bnorm, rc, false)
            } else {
                bilq_residual_estimates(&lq, alpha, beta_next, step.geometry)
            };
            if mode.galerkin_only && zeta_bar.is_none() {
                let status = Status::Breakdown {
                    iteration: k,
                    kind: BreakdownKind::UndefinedPoint,
                };
                primal.stop(status, k);
                primal_final = true;
                dir.x.copy_from_slice(&cand);
                debug!("Galerkin point undefined at iteration {k}");
            } else {
                let use_shift = (transfer || lucky_p) && zeta_bar.is_some();
                primal_shift = if use_shift { zeta_bar } else { None };
                let mut tested = if transfer { rc.unwrap_or(rl) } else { rl };
                let need_point = opts.explicit_residuals
                    || drift_due
                    || opts.x_exact.is_some()
                    || opts.keep_iterates
                    || mode.galerkin_only;
                let mut explicit = None;
                let mut enorm = None;
                if need_point {
                    cand.copy_from_slice(&dir.x);
                    if let Some(zb) = primal_shift {
                        axpy(zb, &dir.d_bar, &mut cand);
                    }
                    if opts.explicit_residuals || drift_due {
                        let r = explicit_residual(op, b, &cand, false, &mut ws);
                        explicit = Some(r);
                        if opts.explicit_residuals {
                            tested = r;
                        } else if r > T::of(100.0) * tested.max(tol_p) {
                            warn!(
                                "primal residual estimate {} drifted from explicit value {} at iteration {k}",
                                tested, r
                            );
                        }
                    }
                    enorm = opts.x_exact.as_ref().map(|xe| dist(&cand, xe).to_f64_lossy());
                    if opts.keep_iterates {
                        primal_iterates.push(cand.clone());
                    }
                }
                let error_lower_bound = match delay {
                    Some(d) if k > d => Some(zeta_sq.iter().fold(T::zero(), |a, &z| a + z).sqrt().to_f64_lossy()),
                    _ => None,
                };
                primal.history.records.push(IterationRecord {
                    iteration: k,
                    rnorm: tested.to_f64_lossy(),
                    rnorm_estimate: rl.to_f64_lossy(),
                    rnorm_transfer: rc.map(|r| r.to_f64_lossy()),
                    rnorm_explicit: explicit.map(|r| r.to_f64_lossy()),
                    enorm,
                    znorm: Some(lq.znorm().to_f64_lossy()),
                    error_lower_bound,
                    clamped,
                });
                debug!("k={k} primal rnorm={}", tested);
                if (lucky_p && zeta_bar.is_some()) || tested <= tol_p {
                    primal.stop(Status::Converged, k);
                    if !primal.updating() {
                        if let Some(zb) = primal_shift {
                            axpy(zb, &dir.d_bar, &mut dir.x);
                        }
                        primal_final = true;
                    }
                }
            }
        }

        if dual.updating() {
            let est = if orthonormal {
                qmr.psi_bar.abs()
            } else {
                qmr.residual_bound()
            };
            let mut tested = est;
            let mut explicit = None;
            if opts.explicit_residuals || drift_due {
                let r = explicit_residual(op, c, &qmr.t, true, &mut ws);
                explicit = Some(r);
                if opts.explicit_residuals {
                    tested = r;
                } else if r > T::of(100.0) * tested.max(tol_d) {
                    warn!(
                        "dual residual estimate {} drifted from explicit value {} at iteration {k}",
                        tested, r
                    );
                }
            }
            let enorm = opts.t_exact.as_ref().map(|te| dist(&qmr.t, te).to_f64_lossy());
            if opts.keep_iterates {
                dual_iterates.push(qmr.t.clone());
            }
            dual.history.records.push(IterationRecord {
                iteration: k,
                rnorm: tested.to_f64_lossy(),
                rnorm_estimate: est.to_f64_lossy(),
                rnorm_transfer: None,
                rnorm_explicit: explicit.map(|r| r.to_f64_lossy()),
                enorm,
                znorm: None,
                error_lower_bound: None,
                clamped: false,
            });
            debug!("k={k} dual rnorm={}", tested);
            if lucky_d && lq.delta_bar != T::zero() {
                qmr.finish_invariant(&lq, process.dual_column_curr());
                dual.stop(Status::Converged, k);
            } else if tested <= tol_d {
                dual.stop(Status::Converged, k);
            }
        }

        if step.outcome != StepOutcome::Continue {
            let lucky = Status::Breakdown {
                iteration: k,
                kind: BreakdownKind::Lucky,
            };
            if lucky_p && zeta_bar.is_none() {
                primal.stop(
                    Status::Breakdown {
                        iteration: k,
                        kind: BreakdownKind::UndefinedPoint,
                    },
                    k,
                );
            }
            // A side that is still running keeps the better of its current
            // point and the point exact on the invariant subspace, and may
            // already meet its tolerance.
            if primal.enabled && !primal.terminal() {
                cand.copy_from_slice(&dir.x);
                if let Some(zb) = primal_shift {
                    axpy(zb, &dir.d_bar, &mut cand);
                }
                let mut r = explicit_residual(op, b, &cand, false, &mut ws);
                if let (None, Some(zb)) = (primal_shift, zeta_bar) {
                    let mut galerkin = dir.x.clone();
                    axpy(zb, &dir.d_bar, &mut galerkin);
                    let rg = explicit_residual(op, b, &galerkin, false, &mut ws);
                    if rg < r {
                        cand = galerkin;
                        r = rg;
                    }
                }
                dir.x.copy_from_slice(&cand);
                primal_final = true;
                if r <= tol_p {
                    primal.stop(Status::Converged, k);
                }
            }
            if dual.enabled && !dual.terminal() {
                let mut r = explicit_residual(op, c, &qmr.t, true, &mut ws);
                if lq.delta_bar != T::zero() {
                    let mut finished = qmr.clone();
                    finished.finish_invariant(&lq, process.dual_column_curr());
                    let rf = explicit_residual(op, c, &finished.t, true, &mut ws);
                    if rf < r {
                        qmr = finished;
                        r = rf;
                    }
                }
                if r <= tol_d {
                    dual.stop(Status::Converged, k);
                }
            }
            primal.stop(lucky, k);
            dual.stop(lucky, k);
            break;
        }
        if primal.terminal() && dual.terminal() {
            break;
        }
        if k >= rule.max_iterations {
            primal.stop(Status::MaxIterations, k);
            dual.stop(Status::MaxIterations, k);
            break;
        }
        beta_k = beta_next;
        gamma_k = step.coeffs.gamma_next;
    }

    if mode.primal && !primal_final {
        if mode.galerkin_only {
            dir.x.copy_from_slice(&cand);
        } else if primal.history.status.is_converged() {
            if let Some(zb) = primal_shift {
                axpy(zb, &dir.d_bar, &mut dir.x);
            }
        }
    }
    if mode.primal {
        primal.history.final_rnorm = explicit_residual(op, b, &dir.x, false, &mut ws).to_f64_lossy();
    }
    if mode.dual {
        dual.history.final_rnorm = explicit_residual(op, c, &qmr.t, true, &mut ws).to_f64_lossy();
    }

    Ok(DualSolution {
        x: dir.x,
        t: qmr.t,
        primal: primal.history,
        dual: dual.history,
        iterations: k,
        primal_iterates,
        dual_iterates,
    })
}

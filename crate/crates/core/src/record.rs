//! Stopping rules, options and per-iteration convergence records.

use std::fmt;

use crate::error::{KrylovError, Result};
use crate::scalar::Scalar;

/// `‖r_k‖ ≤ atol + ‖rhs‖·rtol`, capped at `max_iterations`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StoppingRule {
    pub atol: f64,
    pub rtol: f64,
    pub max_iterations: usize,
    /// Delay `d` of the error lower bound `‖z_{k-d} − z_{k-1}‖`.
    pub error_delay: Option<usize>,
}

impl Default for StoppingRule {
    fn default() -> Self {
        Self {
            atol: 1e-10,
            rtol: 1e-7,
            max_iterations: 10_000,
            error_delay: None,
        }
    }
}

impl StoppingRule {
    pub fn new(atol: f64, rtol: f64, max_iterations: usize) -> Result<Self> {
        let rule = Self {
            atol,
            rtol,
            max_iterations,
            error_delay: None,
        };
        rule.validate()?;
        Ok(rule)
    }

    pub fn with_error_delay(mut self, d: usize) -> Self {
        self.error_delay = Some(d);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.atol >= 0.0 && self.atol.is_finite()) {
            return Err(KrylovError::InvalidInput(format!(
                "atol must be a nonnegative number, got {}",
                self.atol
            )));
        }
        if !(self.rtol >= 0.0 && self.rtol.is_finite()) {
            return Err(KrylovError::InvalidInput(format!(
                "rtol must be a nonnegative number, got {}",
                self.rtol
            )));
        }
        if self.max_iterations == 0 {
            return Err(KrylovError::InvalidInput("max_iterations must be at least 1".into()));
        }
        if self.error_delay == Some(0) {
            return Err(KrylovError::InvalidInput("error delay must be at least 1".into()));
        }
        Ok(())
    }

    pub fn threshold<T: Scalar>(&self, rhs_norm: T) -> T {
        T::of(self.atol) + rhs_norm * T::of(self.rtol)
    }
}

/// Solver configuration shared by every method.
#[derive(Debug, Clone)]
pub struct SolveOptions<T> {
    pub rule: StoppingRule,
    /// Return the BiCG (or CG-like) point and test its residual whenever it exists.
    pub transfer: bool,
    /// Compute `‖b − A x_k‖` (and `‖c − Aᵀt_k‖`) every iteration and stop on it.
    pub explicit_residuals: bool,
    /// Period of the explicit drift check when `explicit_residuals` is off; 0 disables it.
    pub drift_check_every: usize,
    /// Reference primal solution, used for error norms.
    pub x_exact: Option<Vec<T>>,
    /// Reference dual solution, used for error norms.
    pub t_exact: Option<Vec<T>>,
    /// Keep updating a converged system until its partner converges too.
    pub joint_completion: bool,
    /// Store every reported iterate.
    pub keep_iterates: bool,
}

impl<T> Default for SolveOptions<T> {
    fn default() -> Self {
        Self {
            rule: StoppingRule::default(),
            transfer: false,
            explicit_residuals: false,
            drift_check_every: 20,
            x_exact: None,
            t_exact: None,
            joint_completion: false,
            keep_iterates: false,
        }
    }
}

impl<T> SolveOptions<T> {
    pub fn with_rule(rule: StoppingRule) -> Self {
        Self {
            rule,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BreakdownKind {
    /// `q̃ᵀp̃ = 0` with both vectors nonzero.
    Serious,
    /// The process stopped on an invariant subspace that does not solve this system.
    Lucky,
    /// The tridiagonal projection is singular, so the Galerkin point does not exist.
    UndefinedPoint,
}

impl fmt::Display for BreakdownKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BreakdownKind::Serious => "serious breakdown",
            BreakdownKind::Lucky => "invariant subspace of the companion system",
            BreakdownKind::UndefinedPoint => "undefined Galerkin point",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Status {
    #[default]
    Running,
    Converged,
    Breakdown {
        iteration: usize,
        kind: BreakdownKind,
    },
    MaxIterations,
    Stagnation {
        iteration: usize,
    },
}

impl Status {
    pub fn is_converged(&self) -> bool {
        matches!(self, Status::Converged)
    }

    pub fn is_terminal(&self) -> bool {
        !matches!(self, Status::Running)
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Status::Running => f.write_str("running"),
            Status::Converged => f.write_str("converged"),
            Status::Breakdown { iteration, kind } => write!(f, "breakdown at iteration {iteration} ({kind})"),
            Status::MaxIterations => f.write_str("max-iterations"),
            Status::Stagnation { iteration } => write!(f, "stagnation at iteration {iteration}"),
        }
    }
}

/// One row of a convergence history. Norms are reported in binary64.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct IterationRecord {
    pub iteration: usize,
    /// The quantity compared with the tolerance.
    pub rnorm: f64,
    /// Residual estimate of the minimum-norm (or quasi-minimal) iterate.
    pub rnorm_estimate: f64,
    /// Residual estimate of the Galerkin point, when it exists.
    pub rnorm_transfer: Option<f64>,
    pub rnorm_explicit: Option<f64>,
    pub enorm: Option<f64>,
    /// `‖z_{k-1}‖`, the iterate norm in the oblique `U Uᵀ` norm.
    pub znorm: Option<f64>,
    /// `‖z_{k-d} − z_{k-1}‖`.
    pub error_lower_bound: Option<f64>,
    /// The residual formula produced a negative radicand that was clamped to zero.
    pub clamped: bool,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct History {
    pub records: Vec<IterationRecord>,
    pub status: Status,
    /// Iteration at which this system stopped.
    pub iterations: usize,
    /// `‖rhs − op·sol‖` of the returned solution, computed once at exit.
    pub final_rnorm: f64,
}

impl History {
    pub fn last(&self) -> Option<&IterationRecord> {
        self.records.last()
    }

    pub(crate) fn set_status(&mut self, status: Status, iteration: usize) {
        if !self.status.is_terminal() {
            self.status = status;
            self.iterations = iteration;
        }
    }
}

/// Result of a single-system solve.
#[derive(Debug, Clone)]
pub struct SolveResult<T> {
    pub x: Vec<T>,
    pub history: History,
    pub iterates: Vec<Vec<T>>,
}

/// Result of a joint primal/adjoint solve.
#[derive(Debug, Clone)]
pub struct DualSolution<T> {
    pub x: Vec<T>,
    pub t: Vec<T>,
    pub primal: History,
    pub dual: History,
    /// Number of process steps (one product with `A` and one with `Aᵀ` each).
    pub iterations: usize,
    pub primal_iterates: Vec<Vec<T>>,
    pub dual_iterates: Vec<Vec<T>>,
}

impl<T> DualSolution<T> {
    pub fn primal_result(self) -> SolveResult<T> {
        SolveResult {
            x: self.x,
            history: self.primal,
            iterates: self.primal_iterates,
        }
    }

    pub fn dual_result(self) -> SolveResult<T> {
        SolveResult {
            x: self.t,
            history: self.dual,
            iterates: self.dual_iterates,
        }
    }
}

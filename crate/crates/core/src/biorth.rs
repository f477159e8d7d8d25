//! Lanczos biorthogonalization.
//!
//! Starting from `β₁v₁ = b` and `γ₁u₁ = c`, each step produces the next pair
//! of columns of `V_k` and `U_k` with `v_{k+1}ᵀu_{k+1} = 1` and the entries
//! `α_k`, `β_{k+1}`, `γ_{k+1}` of the tridiagonal `T_k`, where
//! `A V_k = V_{k+1} T_{k+1,k}` and `Aᵀ U_k = U_{k+1} T_{k,k+1}ᵀ`.

use crate::error::{check_len, KrylovError, Result};
use crate::linop::{require_square, LinearOperator};
use crate::scalar::Scalar;
use crate::vecops::{axpy, dot, nrm2};

/// Entries of `T` produced by one step: `α_k`, `β_{k+1}`, `γ_{k+1}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TridiagCoeffs<T> {
    pub alpha: T,
    pub beta_next: T,
    pub gamma_next: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepOutcome {
    Continue,
    /// An invariant subspace was reached. `primal` means `A V_k = V_k T_k`
    /// (the primal Galerkin point is exact), `dual` the same for `Aᵀ`.
    Lucky {
        primal: bool,
        dual: bool,
    },
    /// `q̃ᵀp̃` vanished with both vectors nonzero.
    Serious,
}

/// Data returned by a process step.
///
/// On `Continue`, `geometry` holds `(‖v_k‖, ‖v_{k+1}‖, v_kᵀv_{k+1})` for the
/// basis that carries the primal residual. On a breakdown the state is left
/// unshifted and `beta_next`, `gamma_next` are zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProcessStep<T> {
    pub k: usize,
    pub coeffs: TridiagCoeffs<T>,
    pub outcome: StepOutcome,
    pub geometry: (T, T, T),
}

/// Interface the coupled solver engine needs from a tridiagonalization process.
pub(crate) trait Process<T: Scalar> {
    fn beta1(&self) -> T;
    fn gamma1(&self) -> T;
    fn step<O: LinearOperator<T> + ?Sized>(&mut self, op: &O) -> ProcessStep<T>;
    /// Column feeding the primal directions (`v_k` or `u_k` before step `k`).
    fn primal_column(&self) -> &[T];
    /// Column feeding `w_{k-1}` before step `k`.
    fn dual_column_prev(&self) -> &[T];
    /// Column feeding `w̄_k` after an unshifted (breakdown) step `k`.
    fn dual_column_curr(&self) -> &[T];
    /// Squared norm of the current column of the dual basis.
    fn dual_norm_sq(&self) -> T;
    fn orthonormal(&self) -> bool;
}

/// Threshold factor `ε^{3/4}` for invariant-subspace detection.
pub(crate) fn breakdown_tol<T: Scalar>() -> T {
    T::machine_eps().powf(T::of(0.75))
}

#[derive(Debug, Clone)]
pub struct BiorthState<T> {
    v_prev: Vec<T>,
    v_curr: Vec<T>,
    u_prev: Vec<T>,
    u_curr: Vec<T>,
    beta: T,
    gamma: T,
    beta1: T,
    gamma1: T,
    vnorm: T,
    unorm_sq: T,
    k: usize,
    q: Vec<T>,
    p: Vec<T>,
}

/// Starts the process. `β₁ = √|bᵀc|` and `γ₁ = bᵀc / β₁`.
pub fn biorth_init<T: Scalar>(b: &[T], c: &[T]) -> Result<(BiorthState<T>, T, T)> {
    check_len("shadow vector length", b.len(), c.len())?;
    if b.is_empty() {
        return Err(KrylovError::InvalidInput("empty right-hand side".into()));
    }
    let bn = nrm2(b);
    let cn = nrm2(c);
    if bn == T::zero() || cn == T::zero() {
        return Err(KrylovError::InvalidInput(
            "right-hand side and shadow vector must be nonzero".into(),
        ));
    }
    if !bn.is_finite() || !cn.is_finite() {
        return Err(KrylovError::InvalidInput(
            "non-finite entries in the right-hand sides".into(),
        ));
    }
    let bc = dot(b, c);
    if bc.abs() <= T::machine_eps() * bn * cn {
        return Err(KrylovError::InitBreakdown);
    }
    let beta1 = bc.abs().sqrt();
    let gamma1 = bc / beta1;
    let v: Vec<T> = b.iter().map(|&x| x / beta1).collect();
    let u: Vec<T> = c.iter().map(|&x| x / gamma1).collect();
    let n = b.len();
    let state = BiorthState {
        vnorm: bn / beta1,
        unorm_sq: (cn / gamma1).powi(2),
        v_prev: vec![T::zero(); n],
        v_curr: v,
        u_prev: vec![T::zero(); n],
        u_curr: u,
        beta: T::zero(),
        gamma: T::zero(),
        beta1,
        gamma1,
        k: 1,
        q: vec![T::zero(); n],
        p: vec![T::zero(); n],
    };
    Ok((state, beta1, gamma1))
}

impl<T: Scalar> BiorthState<T> {
    /// Index of the current columns.
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn v_curr(&self) -> &[T] {
        &self.v_curr
    }

    pub fn u_curr(&self) -> &[T] {
        &self.u_curr
    }

    pub fn v_prev(&self) -> &[T] {
        &self.v_prev
    }

    pub fn u_prev(&self) -> &[T] {
        &self.u_prev
    }

    /// `(β_k, γ_k)`.
    pub fn beta_gamma(&self) -> (T, T) {
        (self.beta, self.gamma)
    }

    pub fn check_operator<O: LinearOperator<T> + ?Sized>(&self, op: &O) -> Result<()> {
        let n = require_square(op)?;
        check_len("operator dimension", self.v_curr.len(), n)
    }

    /// Runs step `k`: `q = A v_k − γ_k v_{k-1}`, `α_k = u_kᵀq`,
    /// `p = Aᵀu_k − β_k u_{k-1}`, then scales `q − α_k v_k` and `p − α_k u_k`.
    pub fn step<O: LinearOperator<T> + ?Sized>(&mut self, op: &O) -> ProcessStep<T> {
        let k = self.k;
        op.apply(&self.v_curr, &mut self.q);
        axpy(-self.gamma, &self.v_prev, &mut self.q);
        let alpha = dot(&self.u_curr, &self.q);
        op.apply_adjoint(&self.u_curr, &mut self.p);
        axpy(-self.beta, &self.u_prev, &mut self.p);

        let q_scale = nrm2(&self.q).max(alpha.abs() * self.vnorm);
        let p_scale = nrm2(&self.p).max(alpha.abs() * self.unorm_sq.sqrt());
        axpy(-alpha, &self.v_curr, &mut self.q);
        axpy(-alpha, &self.u_curr, &mut self.p);
        let qn = nrm2(&self.q);
        let pn = nrm2(&self.p);

        let tol = breakdown_tol::<T>();
        let primal = qn <= tol * q_scale;
        let dual = pn <= tol * p_scale;
        let zero = T::zero();
        let halted = |outcome| ProcessStep {
            k,
            coeffs: TridiagCoeffs {
                alpha,
                beta_next: zero,
                gamma_next: zero,
            },
            outcome,
            geometry: (zero, zero, zero),
        };
        if primal || dual {
            return halted(StepOutcome::Lucky { primal, dual });
        }
        let qp = dot(&self.q, &self.p);
        if qp.abs() <= T::machine_eps() * qn * pn {
            return halted(StepOutcome::Serious);
        }

        let beta_next = qp.abs().sqrt();
        let gamma_next = qp / beta_next;
        let cross = dot(&self.v_curr, &self.q) / beta_next;
        let vnorm_next = qn / beta_next;
        let geometry = (self.vnorm, vnorm_next, cross);

        std::mem::swap(&mut self.v_prev, &mut self.v_curr);
        std::mem::swap(&mut self.u_prev, &mut self.u_curr);
        for (dst, &src) in self.v_curr.iter_mut().zip(&self.q) {
            *dst = src / beta_next;
        }
        for (dst, &src) in self.u_curr.iter_mut().zip(&self.p) {
            *dst = src / gamma_next;
        }
        self.beta = beta_next;
        self.gamma = gamma_next;
        self.vnorm = vnorm_next;
        self.unorm_sq = (pn / gamma_next).powi(2);
        self.k += 1;

        ProcessStep {
            k,
            coeffs: TridiagCoeffs {
                alpha,
                beta_next,
                gamma_next,
            },
            outcome: StepOutcome::Continue,
            geometry,
        }
    }
}

impl<T: Scalar> Process<T> for BiorthState<T> {
    fn beta1(&self) -> T {
        self.beta1
    }
    fn gamma1(&self) -> T {
        self.gamma1
    }
    fn step<O: LinearOperator<T> + ?Sized>(&mut self, op: &O) -> ProcessStep<T> {
        BiorthState::step(self, op)
    }
    fn primal_column(&self) -> &[T] {
        &self.v_curr
    }
    fn dual_column_prev(&self) -> &[T] {
        &self.u_prev
    }
    fn dual_column_curr(&self) -> &[T] {
        &self.u_curr
    }
    fn dual_norm_sq(&self) -> T {
        self.unorm_sq
    }
    fn orthonormal(&self) -> bool {
        false
    }
}

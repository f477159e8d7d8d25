//! Orthogonal tridiagonalization with two orthonormal bases.
//!
//! `A U_k = V_{k+1} T_{k+1,k}` and `Aᵀ V_k = U_{k+1} T_{k,k+1}ᵀ`, with
//! `β_k, γ_k > 0`. Unlike the biorthogonal process it starts for any nonzero
//! `b`, `c`, including `bᵀc = 0`.

use crate::biorth::{breakdown_tol, Process, ProcessStep, StepOutcome, TridiagCoeffs};
use crate::error::{check_len, KrylovError, Result};
use crate::linop::{require_square, LinearOperator};
use crate::scalar::Scalar;
use crate::vecops::{axpy, dot, nrm2};

#[derive(Debug, Clone)]
pub struct SsyState<T> {
    v_prev: Vec<T>,
    v_curr: Vec<T>,
    u_prev: Vec<T>,
    u_curr: Vec<T>,
    beta: T,
    gamma: T,
    beta1: T,
    gamma1: T,
    k: usize,
    q: Vec<T>,
    p: Vec<T>,
}

/// `β₁ = ‖b‖`, `γ₁ = ‖c‖`.
pub fn ssy_init<T: Scalar>(b: &[T], c: &[T]) -> Result<(SsyState<T>, T, T)> {
    if b.is_empty() || c.is_empty() {
        return Err(KrylovError::InvalidInput("empty right-hand side".into()));
    }
    let beta1 = nrm2(b);
    let gamma1 = nrm2(c);
    if beta1 == T::zero() || gamma1 == T::zero() {
        return Err(KrylovError::InvalidInput(
            "right-hand side and shadow vector must be nonzero".into(),
        ));
    }
    if !beta1.is_finite() || !gamma1.is_finite() {
        return Err(KrylovError::InvalidInput(
            "non-finite entries in the right-hand sides".into(),
        ));
    }
    let state = SsyState {
        v_prev: vec![T::zero(); b.len()],
        v_curr: b.iter().map(|&x| x / beta1).collect(),
        u_prev: vec![T::zero(); c.len()],
        u_curr: c.iter().map(|&x| x / gamma1).collect(),
        beta: T::zero(),
        gamma: T::zero(),
        beta1,
        gamma1,
        k: 1,
        q: vec![T::zero(); b.len()],
        p: vec![T::zero(); c.len()],
    };
    Ok((state, beta1, gamma1))
}

impl<T: Scalar> SsyState<T> {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn v_curr(&self) -> &[T] {
        &self.v_curr
    }

    pub fn u_curr(&self) -> &[T] {
        &self.u_curr
    }

    pub fn beta_gamma(&self) -> (T, T) {
        (self.beta, self.gamma)
    }

    pub fn check_operator<O: LinearOperator<T> + ?Sized>(&self, op: &O) -> Result<()> {
        require_square(op)?;
        check_len("operator rows", self.v_curr.len(), op.nrows())?;
        check_len("operator columns", self.u_curr.len(), op.ncols())
    }

    /// Runs step `k`: `q = A u_k − γ_k v_{k-1}`, `α_k = v_kᵀq`,
    /// `p = Aᵀv_k − β_k u_{k-1}`, then normalizes `q − α_k v_k` and `p − α_k u_k`.
    pub fn step<O: LinearOperator<T> + ?Sized>(&mut self, op: &O) -> ProcessStep<T> {
        let k = self.k;
        op.apply(&self.u_curr, &mut self.q);
        axpy(-self.gamma, &self.v_prev, &mut self.q);
        let alpha = dot(&self.v_curr, &self.q);
        op.apply_adjoint(&self.v_curr, &mut self.p);
        axpy(-self.beta, &self.u_prev, &mut self.p);

        let q_scale = nrm2(&self.q).max(alpha.abs());
        let p_scale = nrm2(&self.p).max(alpha.abs());
        axpy(-alpha, &self.v_curr, &mut self.q);
        axpy(-alpha, &self.u_curr, &mut self.p);
        let beta_next = nrm2(&self.q);
        let gamma_next = nrm2(&self.p);

        let tol = breakdown_tol::<T>();
        let primal = beta_next <= tol * q_scale;
        let dual = gamma_next <= tol * p_scale;
        let zero = T::zero();
        if primal || dual {
            return ProcessStep {
                k,
                coeffs: TridiagCoeffs {
                    alpha,
                    beta_next: zero,
                    gamma_next: zero,
                },
                outcome: StepOutcome::Lucky { primal, dual },
                geometry: (zero, zero, zero),
            };
        }

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
        self.k += 1;

        ProcessStep {
            k,
            coeffs: TridiagCoeffs {
                alpha,
                beta_next,
                gamma_next,
            },
            outcome: StepOutcome::Continue,
            geometry: (T::one(), T::one(), T::zero()),
        }
    }
}

impl<T: Scalar> Process<T> for SsyState<T> {
    fn beta1(&self) -> T {
        self.beta1
    }
    fn gamma1(&self) -> T {
        self.gamma1
    }
    fn step<O: LinearOperator<T> + ?Sized>(&mut self, op: &O) -> ProcessStep<T> {
        SsyState::step(self, op)
    }
    fn primal_column(&self) -> &[T] {
        &self.u_curr
    }
    fn dual_column_prev(&self) -> &[T] {
        &self.v_prev
    }
    fn dual_column_curr(&self) -> &[T] {
        &self.v_curr
    }
    fn dual_norm_sq(&self) -> T {
        T::one()
    }
    fn orthonormal(&self) -> bool {
        true
    }
}

//! QMR on the adjoint system from the same LQ factorization: the QR
//! factorization of `T_{k-1,k}ᵀ` is `Q_kᵀ [L_{k-1}ᵀ; 0]`, so `t^Q_{k-1} = W_{k-1} h_{k-1}`
//! with `W_k = U_k L_k^{-T}` and `h̄_k = Q_k γ₁e₁`.

use crate::bilq::LqState;
use crate::biorth::biorth_init;
use crate::engine::{run, Mode};
use crate::error::Result;
use crate::linop::{LinearOperator, Transposed};
use crate::record::{SolveOptions, SolveResult};
use crate::rotations::GivensReflection;
use crate::scalar::Scalar;

/// `ψ̄`, the last two `w` columns, the iterate `t^Q` and `τ = Σ‖u_i‖²`.
#[derive(Debug, Clone, PartialEq)]
pub struct QmrState<T> {
    pub psi_bar: T,
    pub psi: T,
    pub w_prev: Vec<T>,
    pub w_prev2: Vec<T>,
    pub t: Vec<T>,
    pub tau: T,
    scratch: Vec<T>,
}

impl<T: Scalar> QmrState<T> {
    /// `ψ̄₁ = γ₁`, `t^Q_0 = 0`, `τ = 0`.
    pub fn new(gamma1: T, n: usize) -> Self {
        Self {
            psi_bar: gamma1,
            psi: T::zero(),
            w_prev: vec![T::zero(); n],
            w_prev2: vec![T::zero(); n],
            t: vec![T::zero(); n],
            tau: T::zero(),
            scratch: vec![T::zero(); n],
        }
    }

    /// `τ_k = τ_{k-1} + ‖u_k‖²`.
    pub fn add_tau(&mut self, unorm_sq: T) {
        self.tau = self.tau + unorm_sq;
    }

    /// Iteration `k`, with `refl = (c_k, s_k)`, `delta = δ_{k-1}`,
    /// `lambda = λ_{k-2}`, `eps = ε_{k-3}` and `u = u_{k-1}`:
    /// `ψ_{k-1} = c_kψ̄_{k-1}`, `ψ̄_k = s_kψ̄_{k-1}`,
    /// `w_{k-1} = (u_{k-1} − λ_{k-2}w_{k-2} − ε_{k-3}w_{k-3}) / δ_{k-1}` and
    /// `t^Q_{k-1} = t^Q_{k-2} + ψ_{k-1}w_{k-1}`.
    pub fn advance(&mut self, refl: GivensReflection<T>, delta: T, lambda: T, eps: T, u: &[T]) {
        self.psi = refl.c * self.psi_bar;
        self.psi_bar = refl.s * self.psi_bar;
        let psi = self.psi;
        for ((((w, &u), &w1), &w2), t) in self
            .scratch
            .iter_mut()
            .zip(u)
            .zip(&self.w_prev)
            .zip(&self.w_prev2)
            .zip(self.t.iter_mut())
        {
            *w = (u - lambda * w1 - eps * w2) / delta;
            *t = *t + psi * *w;
        }
        std::mem::swap(&mut self.w_prev2, &mut self.w_prev);
        std::mem::swap(&mut self.w_prev, &mut self.scratch);
    }

    /// Same as [`QmrState::advance`] with the scalars read from `lq` right
    /// after [`LqState::rotate`].
    pub fn advance_from(&mut self, lq: &LqState<T>, u: &[T]) {
        self.advance(lq.refl, lq.delta, lq.lambda, lq.eps_prev, u);
    }

    /// `|ψ̄_k|·√τ_k`, an upper bound on `‖c − Aᵀt^Q_{k-1}‖`.
    pub fn residual_bound(&self) -> T {
        self.psi_bar.abs() * self.tau.sqrt()
    }

    /// Exact solution of the adjoint system once `Aᵀ U_k = U_k T_kᵀ`:
    /// `t^Q_{k-1} + ψ̄_k w̄_k`, with `w̄_k = (u_k − λ_{k-1}w_{k-1} − ε_{k-2}w_{k-2}) / δ̄_k`.
    pub(crate) fn finish_invariant(&mut self, lq: &LqState<T>, u: &[T]) {
        let coef = self.psi_bar / lq.delta_bar;
        for (((t, &u), &w1), &w2) in self.t.iter_mut().zip(u).zip(&self.w_prev).zip(&self.w_prev2) {
            *t = *t + coef * (u - lq.lambda * w1 - lq.eps * w2);
        }
    }
}

/// Solves `A x = b` with QMR. `c` (default `b`) is the shadow vector.
///
/// The engine runs on `Aᵀ` with the seeds swapped, so its adjoint half solves
/// `(Aᵀ)ᵀ x = b` with the same recurrences BiLQR uses for `Aᵀt = c`.
pub fn qmr_solve<T: Scalar, O: LinearOperator<T>>(
    op: O,
    b: &[T],
    c: Option<&[T]>,
    opts: &SolveOptions<T>,
) -> Result<SolveResult<T>> {
    let c = c.unwrap_or(b);
    let swapped = Transposed(op);
    let mut opts = opts.clone();
    std::mem::swap(&mut opts.x_exact, &mut opts.t_exact);
    let (process, _, _) = biorth_init(c, b)?;
    process.check_operator(&swapped)?;
    Ok(run(&swapped, process, c, b, &opts, Mode::DUAL)?.dual_result())
}

/// Solves `Aᵀ t = c` with QMR, using `b` as the shadow vector.
pub fn qmr_adjoint_solve<T: Scalar, O: LinearOperator<T> + ?Sized>(
    op: &O,
    b: &[T],
    c: &[T],
    opts: &SolveOptions<T>,
) -> Result<SolveResult<T>> {
    let (process, _, _) = biorth_init(b, c)?;
    process.check_operator(op)?;
    Ok(run(op, process, b, c, opts, Mode::DUAL)?.dual_result())
}

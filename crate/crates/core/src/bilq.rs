//! BiLQ: the minimum-norm solution of `T_{k-1,k} y = β₁e₁` with `x = V_k y`,
//! obtained from an updated LQ factorization `T_k = L̄_k Q_k`, plus the cheap
//! transfer to the BiCG point `x^C_k = x^L_k + ζ̄_k d̄_k`.

use crate::biorth::biorth_init;
use crate::engine::{run, Mode};
use crate::error::{KrylovError, Result};
use crate::linop::LinearOperator;
use crate::record::{SolveOptions, SolveResult};
use crate::rotations::{sym_ortho, GivensReflection};
use crate::scalar::Scalar;
use crate::vecops::axpy;

/// Scalars of the LQ factorization of `T_{k-1,k}` and of `z̄_k`.
///
/// After [`LqState::rotate`] at iteration `k` the reflection is `(c_k, s_k)`,
/// `delta` is `δ_{k-1}`, `eps` is `ε_{k-2}` and `zeta` is `ζ_{k-1}`. After
/// [`LqState::absorb`], `lambda` is `λ_{k-1}`, `delta_bar` is `δ̄_k` and `eta` is `η_k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LqState<T> {
    pub k: usize,
    pub refl_prev: GivensReflection<T>,
    pub refl: GivensReflection<T>,
    pub beta: T,
    pub delta: T,
    pub delta_bar: T,
    pub eps: T,
    pub eps_prev: T,
    pub lambda: T,
    pub eta: T,
    pub zeta: T,
    pub zeta_prev: T,
    pub znorm_sq: T,
}

/// `δ_{k-1}` vanished: the LQ factor is singular.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SingularFactor;

impl<T: Scalar> LqState<T> {
    /// `c₁ = −1`, `s₁ = 0`, `δ̄₁ = α₁`, `η₁ = β₁`.
    pub fn new(alpha1: T, beta1: T) -> Self {
        let z = T::zero();
        Self {
            k: 1,
            refl_prev: GivensReflection::initial(),
            refl: GivensReflection::initial(),
            beta: beta1,
            delta: z,
            delta_bar: alpha1,
            eps: z,
            eps_prev: z,
            lambda: z,
            eta: beta1,
            zeta: z,
            zeta_prev: z,
            znorm_sq: z,
        }
    }

    /// First half of iteration `k`: needs only `β_k` and `γ_k`.
    pub fn rotate(&mut self, beta_k: T, gamma_k: T) -> std::result::Result<(), SingularFactor> {
        let (refl, delta) = sym_ortho(self.delta_bar, gamma_k);
        if delta == T::zero() {
            return Err(SingularFactor);
        }
        self.k += 1;
        self.refl_prev = self.refl;
        self.refl = refl;
        self.delta = delta;
        self.beta = beta_k;
        self.eps_prev = self.eps;
        self.eps = self.refl_prev.s * beta_k;
        self.zeta_prev = self.zeta;
        self.zeta = self.eta / delta;
        self.znorm_sq = self.znorm_sq + self.zeta * self.zeta;
        Ok(())
    }

    /// Second half of iteration `k`, once `α_k` is known.
    pub fn absorb(&mut self, alpha_k: T) {
        let (cp, c, s) = (self.refl_prev.c, self.refl.c, self.refl.s);
        self.lambda = -cp * c * self.beta + s * alpha_k;
        self.delta_bar = -cp * s * self.beta - c * alpha_k;
        self.eta = -self.eps * self.zeta_prev - self.lambda * self.zeta;
    }

    /// Both halves of iteration `k ≥ 2`.
    pub fn lq_advance(&mut self, coeffs_k: (T, T, T)) -> std::result::Result<(), SingularFactor> {
        let (alpha_k, beta_k, gamma_k) = coeffs_k;
        self.rotate(beta_k, gamma_k)?;
        self.absorb(alpha_k);
        Ok(())
    }

    /// `ζ̄_k = η_k / δ̄_k`, absent when `δ̄_k = 0`.
    pub fn zeta_bar(&self) -> Option<T> {
        (self.delta_bar != T::zero()).then(|| self.eta / self.delta_bar)
    }

    /// `‖z_{k-1}‖`.
    pub fn znorm(&self) -> T {
        self.znorm_sq.sqrt()
    }
}

/// `x^L_k` and the trailing direction `d̄_k` of `D̄_k = V_k Q_kᵀ`.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionState<T> {
    pub d_bar: Vec<T>,
    pub x: Vec<T>,
}

impl<T: Scalar> DirectionState<T> {
    /// `d̄₁ = v₁`, `x^L_1 = 0`.
    pub fn new(v1: &[T]) -> Self {
        Self {
            d_bar: v1.to_vec(),
            x: vec![T::zero(); v1.len()],
        }
    }

    /// `d_{k-1} = c_k d̄_{k-1} + s_k v_k`, `d̄_k = s_k d̄_{k-1} − c_k v_k`,
    /// `x^L_k = x^L_{k-1} + ζ_{k-1} d_{k-1}`.
    pub fn advance(&mut self, refl: GivensReflection<T>, zeta: T, v_k: &[T]) {
        let (c, s) = (refl.c, refl.s);
        for ((db, x), &v) in self.d_bar.iter_mut().zip(self.x.iter_mut()).zip(v_k) {
            let d = c * *db + s * v;
            *db = s * *db - c * v;
            *x = *x + zeta * d;
        }
    }
}

/// Residual norms at iteration `k ≥ 2` of the BiLQ and BiCG points.
///
/// `geometry` is `(‖v_k‖, ‖v_{k+1}‖, v_kᵀv_{k+1})`. The returned flag is set
/// when the BiLQ radicand went negative and was clamped.
pub fn bilq_residual_estimates<T: Scalar>(
    lq: &LqState<T>,
    alpha_k: T,
    beta_next: T,
    geometry: (T, T, T),
) -> (T, Option<T>, bool) {
    let (cp, sp) = (lq.refl_prev.c, lq.refl_prev.s);
    let (c, s) = (lq.refl.c, lq.refl.s);
    let mu = lq.beta * (sp * lq.zeta_prev - cp * c * lq.zeta) + alpha_k * s * lq.zeta;
    let omega = beta_next * s * lq.zeta;
    let (nk, nk1, cross) = geometry;
    let radicand = mu * mu * nk * nk + omega * omega * nk1 * nk1 + (mu + mu) * omega * cross;
    let clamped = radicand < T::zero();
    let rl = if clamped { T::zero() } else { radicand.sqrt() };
    let rc = lq.zeta_bar().map(|zb| (beta_next * (s * lq.zeta - c * zb)).abs() * nk1);
    (rl, rc, clamped)
}

/// `x^C_k = x^L_k + ζ̄_k d̄_k`.
pub fn bicg_transfer<T: Scalar>(x_l: &[T], zeta_bar: Option<T>, d_bar: &[T], iteration: usize) -> Result<Vec<T>> {
    let zb = zeta_bar.ok_or(KrylovError::UndefinedPoint { iteration })?;
    let mut x = x_l.to_vec();
    axpy(zb, d_bar, &mut x);
    Ok(x)
}

/// Solves `A x = b` with BiLQ. `c` defaults to `b`.
///
/// With `opts.transfer` the BiCG point is tested and returned whenever it exists.
pub fn bilq_solve<T: Scalar, O: LinearOperator<T> + ?Sized>(
    op: &O,
    b: &[T],
    c: Option<&[T]>,
    opts: &SolveOptions<T>,
) -> Result<SolveResult<T>> {
    let c = c.unwrap_or(b);
    let (process, _, _) = biorth_init(b, c)?;
    process.check_operator(op)?;
    Ok(run(op, process, b, c, opts, Mode::PRIMAL)?.primal_result())
}

/// BiCG through the BiLQ recurrences: only the Galerkin point is used, so the
/// method stops with an undefined-point breakdown as soon as `δ̄_k = 0`.
pub fn bicg_solve<T: Scalar, O: LinearOperator<T> + ?Sized>(
    op: &O,
    b: &[T],
    c: Option<&[T]>,
    opts: &SolveOptions<T>,
) -> Result<SolveResult<T>> {
    let c = c.unwrap_or(b);
    let (process, _, _) = biorth_init(b, c)?;
    process.check_operator(op)?;
    Ok(run(op, process, b, c, opts, Mode::BICG)?.primal_result())
}

//! Operators that expose `v ↦ A v` and `u ↦ Aᵀ u` without assembling `A`.

mod market;
mod sparse;

use std::sync::Arc;

pub use market::{read_matrix_market, read_vector, write_matrix_market, write_vector};
pub use sparse::SparseMatrix;

use crate::error::{check_len, KrylovError, Result};
use crate::scalar::Scalar;

/// A linear map with forward and adjoint products.
///
/// `apply` maps length-`ncols` inputs to length-`nrows` outputs and
/// `apply_adjoint` goes the other way. Both overwrite `out`.
pub trait LinearOperator<T: Scalar>: Send + Sync {
    fn nrows(&self) -> usize;
    fn ncols(&self) -> usize;
    fn apply(&self, v: &[T], out: &mut [T]);
    fn apply_adjoint(&self, u: &[T], out: &mut [T]);
}

impl<T: Scalar, O: LinearOperator<T> + ?Sized> LinearOperator<T> for &O {
    fn nrows(&self) -> usize {
        (**self).nrows()
    }
    fn ncols(&self) -> usize {
        (**self).ncols()
    }
    fn apply(&self, v: &[T], out: &mut [T]) {
        (**self).apply(v, out)
    }
    fn apply_adjoint(&self, u: &[T], out: &mut [T]) {
        (**self).apply_adjoint(u, out)
    }
}

impl<T: Scalar, O: LinearOperator<T> + ?Sized> LinearOperator<T> for Box<O> {
    fn nrows(&self) -> usize {
        (**self).nrows()
    }
    fn ncols(&self) -> usize {
        (**self).ncols()
    }
    fn apply(&self, v: &[T], out: &mut [T]) {
        (**self).apply(v, out)
    }
    fn apply_adjoint(&self, u: &[T], out: &mut [T]) {
        (**self).apply_adjoint(u, out)
    }
}

impl<T: Scalar, O: LinearOperator<T> + ?Sized> LinearOperator<T> for Arc<O> {
    fn nrows(&self) -> usize {
        (**self).nrows()
    }
    fn ncols(&self) -> usize {
        (**self).ncols()
    }
    fn apply(&self, v: &[T], out: &mut [T]) {
        (**self).apply(v, out)
    }
    fn apply_adjoint(&self, u: &[T], out: &mut [T]) {
        (**self).apply_adjoint(u, out)
    }
}

pub(crate) fn require_square<T: Scalar, O: LinearOperator<T> + ?Sized>(op: &O) -> Result<usize> {
    if op.nrows() != op.ncols() {
        return Err(KrylovError::NotSquare {
            rows: op.nrows(),
            cols: op.ncols(),
        });
    }
    Ok(op.nrows())
}

/// Operator backed by a pair of closures.
pub struct FnOperator<F, G> {
    nrows: usize,
    ncols: usize,
    forward: F,
    adjoint: G,
}

impl<F, G> FnOperator<F, G> {
    pub fn new(nrows: usize, ncols: usize, forward: F, adjoint: G) -> Self {
        Self {
            nrows,
            ncols,
            forward,
            adjoint,
        }
    }
}

impl<T, F, G> LinearOperator<T> for FnOperator<F, G>
where
    T: Scalar,
    F: Fn(&[T], &mut [T]) + Send + Sync,
    G: Fn(&[T], &mut [T]) + Send + Sync,
{
    fn nrows(&self) -> usize {
        self.nrows
    }
    fn ncols(&self) -> usize {
        self.ncols
    }
    fn apply(&self, v: &[T], out: &mut [T]) {
        (self.forward)(v, out)
    }
    fn apply_adjoint(&self, u: &[T], out: &mut [T]) {
        (self.adjoint)(u, out)
    }
}

/// `Aᵀ` as an operator in its own right.
pub struct Transposed<O>(pub O);

impl<T: Scalar, O: LinearOperator<T>> LinearOperator<T> for Transposed<O> {
    fn nrows(&self) -> usize {
        self.0.ncols()
    }
    fn ncols(&self) -> usize {
        self.0.nrows()
    }
    fn apply(&self, v: &[T], out: &mut [T]) {
        self.0.apply_adjoint(v, out)
    }
    fn apply_adjoint(&self, u: &[T], out: &mut [T]) {
        self.0.apply(u, out)
    }
}

/// Nonzero diagonal used for left (Jacobi) scaling.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalScaling<T> {
    d: Vec<T>,
    inv: Vec<T>,
}

impl<T: Scalar> DiagonalScaling<T> {
    pub fn new(d: Vec<T>) -> Result<Self> {
        if let Some(index) = d.iter().position(|x| *x == T::zero() || !x.is_finite()) {
            return Err(KrylovError::InvalidScaling { index });
        }
        let inv = d.iter().map(|&x| T::one() / x).collect();
        Ok(Self { d, inv })
    }

    /// The diagonal of a sparse matrix.
    pub fn jacobi(m: &SparseMatrix<T>) -> Result<Self> {
        Self::new(m.diagonal())
    }

    pub fn len(&self) -> usize {
        self.d.len()
    }

    pub fn is_empty(&self) -> bool {
        self.d.is_empty()
    }

    pub fn diagonal(&self) -> &[T] {
        &self.d
    }

    /// `D⁻¹ b`, the right-hand side of the scaled primal system.
    pub fn scale(&self, b: &[T]) -> Vec<T> {
        b.iter().zip(&self.inv).map(|(&x, &s)| x * s).collect()
    }

    /// Recovers `t = D⁻¹ t̂` from a solution `t̂` of `(D⁻¹A)ᵀ t̂ = c`.
    pub fn unscale_dual(&self, t_hat: &[T]) -> Vec<T> {
        self.scale(t_hat)
    }
}

/// `D⁻¹ A`, with adjoint `Aᵀ D⁻¹`.
pub struct JacobiScaled<O, T> {
    op: O,
    inv: Vec<T>,
}

impl<O, T: Scalar> JacobiScaled<O, T> {
    pub fn inner(&self) -> &O {
        &self.op
    }
}

pub fn jacobi_scaled<T: Scalar, O: LinearOperator<T>>(op: O, d: &DiagonalScaling<T>) -> Result<JacobiScaled<O, T>> {
    check_len("scaling length", op.nrows(), d.len())?;
    Ok(JacobiScaled { op, inv: d.inv.clone() })
}

impl<T: Scalar, O: LinearOperator<T>> LinearOperator<T> for JacobiScaled<O, T> {
    fn nrows(&self) -> usize {
        self.op.nrows()
    }
    fn ncols(&self) -> usize {
        self.op.ncols()
    }
    fn apply(&self, v: &[T], out: &mut [T]) {
        self.op.apply(v, out);
        for (o, &s) in out.iter_mut().zip(&self.inv) {
            *o = *o * s;
        }
    }
    fn apply_adjoint(&self, u: &[T], out: &mut [T]) {
        let scaled: Vec<T> = u.iter().zip(&self.inv).map(|(&x, &s)| x * s).collect();
        self.op.apply_adjoint(&scaled, out);
    }
}

/// The symmetric block operator `[0 A; Aᵀ 0]` acting on `(t, x)`.
pub struct Augmented<O> {
    op: O,
    n: usize,
}

pub fn augmented_operator<T: Scalar, O: LinearOperator<T>>(op: O) -> Result<Augmented<O>> {
    let n = require_square(&op)?;
    Ok(Augmented { op, n })
}

impl<O> Augmented<O> {
    pub fn inner(&self) -> &O {
        &self.op
    }

    /// Size of one block.
    pub fn block(&self) -> usize {
        self.n
    }
}

impl<T: Scalar, O: LinearOperator<T>> LinearOperator<T> for Augmented<O> {
    fn nrows(&self) -> usize {
        2 * self.n
    }
    fn ncols(&self) -> usize {
        2 * self.n
    }
    fn apply(&self, v: &[T], out: &mut [T]) {
        let (t, x) = v.split_at(self.n);
        let (top, bottom) = out.split_at_mut(self.n);
        self.op.apply(x, top);
        self.op.apply_adjoint(t, bottom);
    }
    fn apply_adjoint(&self, u: &[T], out: &mut [T]) {
        self.apply(u, out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vecops::dot;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn example() -> SparseMatrix<f64> {
        SparseMatrix::from_triplets(2, 2, &[(0, 1, -1.0), (1, 0, 1.0), (1, 1, 1.0)]).unwrap()
    }

    fn probe<O: LinearOperator<f64>>(op: &O, seed: u64) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v: Vec<f64> = (0..op.ncols()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let u: Vec<f64> = (0..op.nrows()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mut av = vec![0.0; op.nrows()];
        let mut atu = vec![0.0; op.ncols()];
        op.apply(&v, &mut av);
        op.apply_adjoint(&u, &mut atu);
        (dot(&u, &av) - dot(&atu, &v)).abs()
    }

    #[test]
    fn sparse_forward_and_adjoint() {
        let a = example();
        let mut out = [0.0; 2];
        a.apply(&[1.0, 0.0], &mut out);
        assert_eq!(out, [0.0, 1.0]);
        a.apply_adjoint(&[1.0, 0.0], &mut out);
        assert_eq!(out, [0.0, -1.0]);
    }

    #[test]
    fn transposed_swaps_products() {
        let a = example();
        let at = Transposed(&a);
        let mut out = [0.0; 2];
        at.apply(&[1.0, 0.0], &mut out);
        assert_eq!(out, [0.0, -1.0]);
        assert!(probe(&at, 3) < 1e-14);
    }

    #[test]
    fn jacobi_examples() {
        let a = SparseMatrix::from_triplets(2, 2, &[(0, 0, 2.0), (1, 1, 4.0)]).unwrap();
        let d = DiagonalScaling::jacobi(&a).unwrap();
        let s = jacobi_scaled(&a, &d).unwrap();
        let mut out = [0.0; 2];
        s.apply(&[1.0, 1.0], &mut out);
        assert_eq!(out, [1.0, 1.0]);

        let ones = DiagonalScaling::new(vec![1.0; 2]).unwrap();
        let s = jacobi_scaled(example(), &ones).unwrap();
        let mut a_out = [0.0; 2];
        example().apply(&[0.3, -0.7], &mut a_out);
        s.apply(&[0.3, -0.7], &mut out);
        assert_eq!(out, a_out);
        assert!(probe(&s, 9) < 1e-14);
    }

    #[test]
    fn zero_scaling_rejected() {
        let err = DiagonalScaling::new(vec![1.0, 0.0, 2.0]).unwrap_err();
        assert!(matches!(err, KrylovError::InvalidScaling { index: 1 }));
    }

    #[test]
    fn augmented_examples() {
        let id = SparseMatrix::<f64>::identity(2);
        let m = augmented_operator(&id).unwrap();
        let mut out = [0.0; 4];
        m.apply(&[1.0, 2.0, 3.0, 4.0], &mut out);
        assert_eq!(out, [3.0, 4.0, 1.0, 2.0]);

        let a = example();
        let m = augmented_operator(&a).unwrap();
        m.apply(&[0.0, 0.0, 1.0, 0.0], &mut out);
        assert_eq!(out, [0.0, 1.0, 0.0, 0.0]);
        assert!(probe(&m, 1) < 1e-14);
    }

    #[test]
    fn augmented_requires_square() {
        let a = SparseMatrix::<f64>::from_triplets(2, 3, &[(0, 0, 1.0)]).unwrap();
        assert!(matches!(
            augmented_operator(&a),
            Err(KrylovError::NotSquare { rows: 2, cols: 3 })
        ));
    }

    #[test]
    fn closure_operator() {
        let op = FnOperator::new(
            3,
            3,
            |v: &[f64], out: &mut [f64]| {
                for i in 0..3 {
                    out[i] = 2.0 * v[i];
                }
            },
            |u: &[f64], out: &mut [f64]| {
                for i in 0..3 {
                    out[i] = 2.0 * u[i];
                }
            },
        );
        let mut out = [0.0; 3];
        op.apply(&[1.0, 2.0, 3.0], &mut out);
        assert_eq!(out, [2.0, 4.0, 6.0]);
        assert!(probe(&op, 5) < 1e-14);
    }
}

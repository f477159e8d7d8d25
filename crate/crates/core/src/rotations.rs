//! Givens reflections for the LQ factorization of `T_{k-1,k}` and the QR
//! factorization of its transpose.
//!
//! A reflection `(c, s)` acts on a pair of coordinates as the symmetric
//! involution `[c s; s -c]`.

use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GivensReflection<T> {
    pub c: T,
    pub s: T,
}

impl<T: Scalar> GivensReflection<T> {
    /// The `(-1, 0)` reflection that seeds the factorization.
    pub fn initial() -> Self {
        Self {
            c: -T::one(),
            s: T::zero(),
        }
    }

    pub fn apply(&self, a: T, b: T) -> (T, T) {
        apply_reflection(*self, a, b)
    }
}

/// Builds the reflection that maps `(delta_bar, gamma)` onto `(delta, 0)`.
///
/// `delta` is computed without overflow by scaling with the larger magnitude.
/// The zero input returns the degenerate `(-1, 0)` reflection with `delta = 0`.
pub fn sym_ortho<T: Scalar>(delta_bar: T, gamma: T) -> (GivensReflection<T>, T) {
    let abar = delta_bar.abs();
    let ag = gamma.abs();
    let big = abar.max(ag);
    if big == T::zero() {
        return (GivensReflection::initial(), T::zero());
    }
    if ag == T::zero() {
        return (
            GivensReflection {
                c: delta_bar.signum(),
                s: T::zero(),
            },
            abar,
        );
    }
    if abar == T::zero() {
        return (
            GivensReflection {
                c: T::zero(),
                s: gamma.signum(),
            },
            ag,
        );
    }
    let p = delta_bar / big;
    let q = gamma / big;
    let delta = big * (p * p + q * q).sqrt();
    (
        GivensReflection {
            c: delta_bar / delta,
            s: gamma / delta,
        },
        delta,
    )
}

/// Returns `(c·a + s·b, s·a − c·b)`.
#[inline]
pub fn apply_reflection<T: Scalar>(r: GivensReflection<T>, a: T, b: T) -> (T, T) {
    (r.c * a + r.s * b, r.s * a - r.c * b)
}

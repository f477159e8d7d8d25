//! Working-precision abstraction.
//!
//! Every solver is generic over [`Scalar`], so the same code runs in IEEE
//! binary32, binary64 and, with the `quad` feature, binary128 ([`Quad`]).

use std::fmt::{Debug, Display, LowerExp};

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// IEEE binary128 (113-bit significand).
#[cfg(feature = "quad")]
pub type Quad = f128::f128;

/// Floating-point type usable as the working precision of a solve.
pub trait Scalar: Float + FromPrimitive + ToPrimitive + Debug + Display + Send + Sync + 'static {
    /// Short tag used by the CLI and in logs.
    const NAME: &'static str;

    /// Distance from 1.0 to the next representable value.
    fn machine_eps() -> Self;

    /// Converts an `f64` literal or datum, rounding if necessary.
    fn of(x: f64) -> Self;

    /// Lossy conversion used for reporting.
    fn to_f64_lossy(self) -> f64;
}

impl Scalar for f32 {
    const NAME: &'static str = "single";

    fn machine_eps() -> Self {
        f32::EPSILON
    }

    fn of(x: f64) -> Self {
        x as f32
    }

    fn to_f64_lossy(self) -> f64 {
        self as f64
    }
}

impl Scalar for f64 {
    const NAME: &'static str = "double";

    fn machine_eps() -> Self {
        f64::EPSILON
    }

    fn of(x: f64) -> Self {
        x
    }

    fn to_f64_lossy(self) -> f64 {
        self
    }
}

#[cfg(feature = "quad")]
impl Scalar for Quad {
    const NAME: &'static str = "quad";

    fn machine_eps() -> Self {
        // The crate's own epsilon() is a rounded decimal literal.
        Quad::of(2.0).powi(-112)
    }

    fn of(x: f64) -> Self {
        Quad::from_f64(x).expect("every f64 is representable in binary128")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

/// Whether binary128 support was compiled in.
pub const QUAD_AVAILABLE: bool = cfg!(feature = "quad");

/// Formats a value with 17 significant digits, the round-trip width of binary64.
pub fn fmt17<T: Scalar>(x: T) -> String {
    sci17(x.to_f64_lossy())
}

pub(crate) fn sci17<F: LowerExp>(x: F) -> String {
    format!("{x:.16e}")
}

/// Converts a slice between working precisions by way of `f64`.
pub fn cast_vec<S: Scalar, T: Scalar>(v: &[S]) -> Vec<T> {
    v.iter().map(|&x| T::of(x.to_f64_lossy())).collect()
}

pub mod bilq;
pub mod biorth;
pub mod cli;
pub mod dual;
mod engine;
pub mod error;
pub mod functional;
pub mod linop;
pub mod minres;
pub mod problems;
pub mod qmr;
pub mod record;
pub mod rotations;
pub mod scalar;
pub mod ssy;
pub mod vecops;

pub use error::{KrylovError, Result};
#[cfg(feature = "quad")]
pub use scalar::Quad;
pub use scalar::{Scalar, QUAD_AVAILABLE};

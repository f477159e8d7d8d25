#![allow(dead_code)]

pub mod oracle;
pub mod props;

use krylov_core::linop::SparseMatrix;
use krylov_core::Scalar;
use oracle::Dense;

pub fn dense_of<T: Scalar>(a: &SparseMatrix<T>) -> Dense<T> {
    let mut d = Dense::zeros(a.nrows(), a.ncols());
    for (i, j, v) in a.triplets() {
        d.set(i, j, v);
    }
    d
}

pub fn sparse_of<T: Scalar>(d: &Dense<T>) -> SparseMatrix<T> {
    let mut t = Vec::new();
    for i in 0..d.n {
        for j in 0..d.m {
            if d.at(i, j) != T::zero() {
                t.push((i, j, d.at(i, j)));
            }
        }
    }
    SparseMatrix::from_triplets(d.n, d.m, &t).unwrap()
}

/// `ε_T / ε_f64`, the factor applied to binary64 tolerances.
pub fn eps_ratio<T: Scalar>() -> f64 {
    T::machine_eps().to_f64_lossy() / f64::EPSILON
}

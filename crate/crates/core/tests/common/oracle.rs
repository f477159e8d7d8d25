//! Dense reference computations in any working precision. Nothing here calls
//! the library's kernels.

#![allow(dead_code)]

use krylov_core::Scalar;

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense<T> {
    pub n: usize,
    pub m: usize,
    pub a: Vec<T>,
}

impl<T: Scalar> Dense<T> {
    pub fn zeros(n: usize, m: usize) -> Self {
        Self {
            n,
            m,
            a: vec![T::zero(); n * m],
        }
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Self {
        Self {
            n: rows.len(),
            m: rows[0].len(),
            a: rows.iter().flatten().copied().collect(),
        }
    }

    pub fn from_columns(cols: &[Vec<T>]) -> Self {
        let mut d = Dense::zeros(cols[0].len(), cols.len());
        for (j, c) in cols.iter().enumerate() {
            for (i, &v) in c.iter().enumerate() {
                d.set(i, j, v);
            }
        }
        d
    }

    pub fn identity(n: usize) -> Self {
        let mut d = Dense::zeros(n, n);
        for i in 0..n {
            d.set(i, i, T::one());
        }
        d
    }

    pub fn at(&self, i: usize, j: usize) -> T {
        self.a[i * self.m + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.a[i * self.m + j] = v;
    }

    pub fn cast<U: Scalar>(&self) -> Dense<U> {
        Dense {
            n: self.n,
            m: self.m,
            a: self.a.iter().map(|&x| U::of(x.to_f64_lossy())).collect(),
        }
    }

    pub fn transpose(&self) -> Self {
        let mut t = Dense::zeros(self.m, self.n);
        for i in 0..self.n {
            for j in 0..self.m {
                t.set(j, i, self.at(i, j));
            }
        }
        t
    }

    pub fn matvec(&self, x: &[T]) -> Vec<T> {
        (0..self.n)
            .map(|i| (0..self.m).fold(T::zero(), |s, j| s + self.at(i, j) * x[j]))
            .collect()
    }

    pub fn matmul(&self, b: &Dense<T>) -> Self {
        let mut c = Dense::zeros(self.n, b.m);
        for i in 0..self.n {
            for k in 0..self.m {
                let aik = self.at(i, k);
                for j in 0..b.m {
                    let v = c.at(i, j) + aik * b.at(k, j);
                    c.set(i, j, v);
                }
            }
        }
        c
    }

    pub fn sub(&self, b: &Dense<T>) -> Self {
        Dense {
            n: self.n,
            m: self.m,
            a: self.a.iter().zip(&b.a).map(|(&x, &y)| x - y).collect(),
        }
    }

    pub fn frobenius(&self) -> T {
        self.a.iter().fold(T::zero(), |s, &v| s + v * v).sqrt()
    }

    /// Leading `r × c` block.
    pub fn block(&self, r: usize, c: usize) -> Self {
        let mut d = Dense::zeros(r, c);
        for i in 0..r {
            for j in 0..c {
                d.set(i, j, self.at(i, j));
            }
        }
        d
    }
}

/// Gaussian elimination with partial pivoting; `None` on an exactly zero pivot.
pub fn lu_solve<T: Scalar>(a: &Dense<T>, b: &[T]) -> Option<Vec<T>> {
    let n = a.n;
    assert_eq!(a.m, n);
    let mut m = a.a.clone();
    let mut x = b.to_vec();
    for k in 0..n {
        let p = (k..n)
            .max_by(|&i, &j| m[i * n + k].abs().partial_cmp(&m[j * n + k].abs()).unwrap())
            .unwrap();
        if m[p * n + k] == T::zero() {
            return None;
        }
        if p != k {
            for j in 0..n {
                m.swap(k * n + j, p * n + j);
            }
            x.swap(k, p);
        }
        let piv = m[k * n + k];
        for i in k + 1..n {
            let l = m[i * n + k] / piv;
            if l != T::zero() {
                for j in k..n {
                    m[i * n + j] = m[i * n + j] - l * m[k * n + j];
                }
                x[i] = x[i] - l * x[k];
            }
        }
    }
    for k in (0..n).rev() {
        let s = (k + 1..n).fold(T::zero(), |s, j| s + m[k * n + j] * x[j]);
        x[k] = (x[k] - s) / m[k * n + k];
    }
    Some(x)
}

/// Minimum-norm solution of a full-row-rank underdetermined system `M y = r`
/// through `y = Mᵀ(MMᵀ)⁻¹r`.
pub fn min_norm_solve<T: Scalar>(m: &Dense<T>, r: &[T]) -> Option<Vec<T>> {
    let mt = m.transpose();
    let w = lu_solve(&m.matmul(&mt), r)?;
    Some(mt.matvec(&w))
}

/// Least-squares solution of a full-column-rank system via the normal equations.
pub fn least_squares<T: Scalar>(m: &Dense<T>, r: &[T]) -> Option<Vec<T>> {
    let mt = m.transpose();
    lu_solve(&mt.matmul(m), &mt.matvec(r))
}

pub fn norm<T: Scalar>(x: &[T]) -> T {
    x.iter().fold(T::zero(), |s, &v| s + v * v).sqrt()
}

pub fn dist<T: Scalar>(x: &[T], y: &[T]) -> T {
    x.iter()
        .zip(y)
        .fold(T::zero(), |s, (&a, &b)| s + (a - b) * (a - b))
        .sqrt()
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

/// Uniform samples in `[-1, 1)` from a 64-bit LCG, so fixtures do not depend
/// on the library's generator.
pub struct Lcg(pub u64);

impl Lcg {
    pub fn next_f64(&mut self) -> f64 {
        self.0 = self
            .0
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        ((self.0 >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
    }

    pub fn vector(&mut self, n: usize) -> Vec<f64> {
        (0..n).map(|_| self.next_f64()).collect()
    }

    pub fn matrix(&mut self, n: usize, m: usize) -> Dense<f64> {
        Dense {
            n,
            m,
            a: self.vector(n * m),
        }
    }
}

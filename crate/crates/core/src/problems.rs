//! Finite-difference test problems with known solutions.
//!
//! * [`polar_poisson`]: Poisson's equation on the disc in polar coordinates.
//! * [`ode_1d`]: `χ₁u″ + χ₂u′ + χ₃u = f` on `(0, 1)` with zero Dirichlet data.
//! * [`convdiff_2d`]: `κ₁Δu + κ₂(∂ₓu + ∂ᵧu) = f` on the unit square.
//!
//! The 1D and 2D right-hand sides carry the `h²` factor, so the matrix rows are
//! `h²` times the difference operator. In every case the adjoint problem is
//! discretized by `Aᵀ`.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{KrylovError, Result};
use crate::linop::SparseMatrix;

/// How a stored exact solution relates to the discrete system.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExactKind {
    /// The continuous solution sampled at the grid points. It satisfies the
    /// discrete equations only up to the `O(h²)` truncation error.
    GridRestricted,
    /// The solution of the discrete system itself.
    Discrete,
}

/// Grid spacing and node coordinates, one coordinate vector per unknown.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub h: f64,
    pub points: Vec<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct TestProblem {
    pub name: &'static str,
    pub operator: SparseMatrix<f64>,
    pub rhs_primal: Vec<f64>,
    pub rhs_dual: Option<Vec<f64>>,
    pub exact_primal: Option<Vec<f64>>,
    pub exact_dual: Option<Vec<f64>>,
    pub exact_kind: ExactKind,
    pub grid: Grid,
}

impl TestProblem {
    pub fn dim(&self) -> usize {
        self.operator.nrows()
    }

    /// Stores `u` sampled at the grid points as the exact primal solution.
    pub fn with_exact_primal(mut self, u: impl Fn(&[f64]) -> f64) -> Self {
        self.exact_primal = Some(self.grid.points.iter().map(|p| u(p)).collect());
        self.exact_kind = ExactKind::GridRestricted;
        self
    }

    /// Stores `v` sampled at the grid points as the exact dual solution.
    pub fn with_exact_dual(mut self, v: impl Fn(&[f64]) -> f64) -> Self {
        self.exact_dual = Some(self.grid.points.iter().map(|p| v(p)).collect());
        self
    }

    /// Dual right-hand side, or the primal one when the problem has none.
    pub fn dual_rhs_or_primal(&self) -> &[f64] {
        self.rhs_dual.as_deref().unwrap_or(&self.rhs_primal)
    }
}

fn invalid(msg: impl Into<String>) -> KrylovError {
    KrylovError::InvalidInput(msg.into())
}

/// Centered differences for `(1/r)(r u_r)_r + u_θθ/r² = f` on `(0, R) × [0, 2π)`
/// with `u(R, θ) = g(θ)`.
///
/// Radial nodes sit at `r_i = (i − ½)Δr`, `i = 1..n_r`, with `Δr = 2R/(2n_r + 1)`,
/// so the flux through `r = 0` vanishes and `r_{n_r+1} = R` is the boundary.
/// Angular nodes are `θ_j = jΔθ`, `Δθ = 2π/n_θ`, with periodic coupling.
/// Unknown `(i, j)` is stored at index `j·n_r + (i − 1)`: one diagonal block
/// per angle, tridiagonal in `r`, coupled to its angular neighbours by
/// diagonal blocks.
pub fn polar_poisson(
    n_r: usize,
    n_theta: usize,
    radius: f64,
    f: impl Fn(f64, f64) -> f64,
    g: impl Fn(f64) -> f64,
) -> Result<TestProblem> {
    if n_r < 3 || n_theta < 3 {
        return Err(invalid(format!(
            "polar grid needs at least 3 points per direction, got {n_r}x{n_theta}"
        )));
    }
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(invalid(format!("radius must be positive, got {radius}")));
    }
    let dr = 2.0 * radius / (2 * n_r + 1) as f64;
    let dt = 2.0 * PI / n_theta as f64;
    let n = n_r * n_theta;
    let idx = |i: usize, j: usize| j * n_r + i;
    let mut trip = Vec::with_capacity(7 * n);
    let mut rhs = vec![0.0; n];
    let mut points = Vec::with_capacity(n);
    for j in 0..n_theta {
        let theta = j as f64 * dt;
        for i in 0..n_r {
            let r = (i as f64 + 0.5) * dr;
            let r_in = i as f64 * dr;
            let r_out = (i as f64 + 1.0) * dr;
            let a_in = r_in / (r * dr * dr);
            let a_out = r_out / (r * dr * dr);
            let a_th = 1.0 / (r * r * dt * dt);
            let row = idx(i, j);
            trip.push((row, row, -(a_in + a_out) - 2.0 * a_th));
            if i > 0 {
                trip.push((row, idx(i - 1, j), a_in));
            }
            rhs[row] = f(r, theta);
            if i + 1 < n_r {
                trip.push((row, idx(i + 1, j), a_out));
            } else {
                rhs[row] -= a_out * g(theta);
            }
            trip.push((row, idx(i, (j + 1) % n_theta), a_th));
            trip.push((row, idx(i, (j + n_theta - 1) % n_theta), a_th));
            points.push(vec![r, theta]);
        }
    }
    Ok(TestProblem {
        name: "polar-poisson",
        operator: SparseMatrix::from_triplets(n, n, &trip)?,
        rhs_primal: rhs,
        rhs_dual: None,
        exact_primal: None,
        exact_dual: None,
        exact_kind: ExactKind::GridRestricted,
        grid: Grid { h: dr, points },
    })
}

/// `χ₁u″ + χ₂u′ + χ₃u = f`, `u(0) = u(1) = 0`, on `x_i = ih`, `h = 1/(N+1)`.
///
/// Row `i` is `(χ₁ − χ₂h/2)u_{i−1} + (−2χ₁ + χ₃h²)u_i + (χ₁ + χ₂h/2)u_{i+1} = h²f(x_i)`,
/// and the dual right-hand side is `h²g(x_i)`.
pub fn ode_1d(n: usize, chi: (f64, f64, f64), f: impl Fn(f64) -> f64, g: impl Fn(f64) -> f64) -> Result<TestProblem> {
    if n < 2 {
        return Err(invalid(format!("1D grid needs N >= 2, got {n}")));
    }
    let (c1, c2, c3) = chi;
    let h = 1.0 / (n + 1) as f64;
    let lower = c1 - 0.5 * c2 * h;
    let upper = c1 + 0.5 * c2 * h;
    let diag = -2.0 * c1 + c3 * h * h;
    let mut trip = Vec::with_capacity(3 * n);
    for i in 0..n {
        if i > 0 {
            trip.push((i, i - 1, lower));
        }
        trip.push((i, i, diag));
        if i + 1 < n {
            trip.push((i, i + 1, upper));
        }
    }
    let xs: Vec<f64> = (1..=n).map(|i| i as f64 * h).collect();
    Ok(TestProblem {
        name: "ode1d",
        operator: SparseMatrix::from_triplets(n, n, &trip)?,
        rhs_primal: xs.iter().map(|&x| h * h * f(x)).collect(),
        rhs_dual: Some(xs.iter().map(|&x| h * h * g(x)).collect()),
        exact_primal: None,
        exact_dual: None,
        exact_kind: ExactKind::GridRestricted,
        grid: Grid {
            h,
            points: xs.into_iter().map(|x| vec![x]).collect(),
        },
    })
}

/// `κ₁Δu + κ₂(∂ₓu + ∂ᵧu) = f` on the unit square with `u = 0` on the boundary.
///
/// The `N × N` interior grid is stored column by column: unknown `(i, j)` at
/// `x = (i+1)h`, `y = (j+1)h` has index `j·N + i`. Right-hand sides include `h²`.
pub fn convdiff_2d(
    n: usize,
    kappa: (f64, f64),
    f: impl Fn(f64, f64) -> f64,
    g: impl Fn(f64, f64) -> f64,
) -> Result<TestProblem> {
    if n < 2 {
        return Err(invalid(format!("2D grid needs N >= 2, got {n}")));
    }
    let (k1, k2) = kappa;
    let h = 1.0 / (n + 1) as f64;
    let lower = k1 - 0.5 * k2 * h;
    let upper = k1 + 0.5 * k2 * h;
    let size = n * n;
    let mut trip = Vec::with_capacity(5 * size);
    let mut points = Vec::with_capacity(size);
    for j in 0..n {
        for i in 0..n {
            let row = j * n + i;
            trip.push((row, row, -4.0 * k1));
            if i > 0 {
                trip.push((row, row - 1, lower));
            }
            if i + 1 < n {
                trip.push((row, row + 1, upper));
            }
            if j > 0 {
                trip.push((row, row - n, lower));
            }
            if j + 1 < n {
                trip.push((row, row + n, upper));
            }
            points.push(vec![(i + 1) as f64 * h, (j + 1) as f64 * h]);
        }
    }
    let h2 = h * h;
    Ok(TestProblem {
        name: "convdiff2d",
        operator: SparseMatrix::from_triplets(size, size, &trip)?,
        rhs_primal: points.iter().map(|p| h2 * f(p[0], p[1])).collect(),
        rhs_dual: Some(points.iter().map(|p| h2 * g(p[0], p[1])).collect()),
        exact_primal: None,
        exact_dual: None,
        exact_kind: ExactKind::GridRestricted,
        grid: Grid { h, points },
    })
}

/// Manufactured data for `u*(x) = sin(πx)`: returns `(f, u*)` with `f = L u*`.
pub fn sine_1d(chi: (f64, f64, f64)) -> (impl Fn(f64) -> f64 + Copy, impl Fn(f64) -> f64 + Copy) {
    let (c1, c2, c3) = chi;
    let f = move |x: f64| (c3 - c1 * PI * PI) * (PI * x).sin() + c2 * PI * (PI * x).cos();
    let u = |x: f64| (PI * x).sin();
    (f, u)
}

/// Manufactured data for `u*(x, y) = sin(πx)sin(πy)`.
pub fn sine_2d(kappa: (f64, f64)) -> (impl Fn(f64, f64) -> f64 + Copy, impl Fn(f64, f64) -> f64 + Copy) {
    let (k1, k2) = kappa;
    let f = move |x: f64, y: f64| {
        let (sx, cx) = (PI * x).sin_cos();
        let (sy, cy) = (PI * y).sin_cos();
        -2.0 * k1 * PI * PI * sx * sy + k2 * PI * (cx * sy + sx * cy)
    };
    let u = |x: f64, y: f64| (PI * x).sin() * (PI * y).sin();
    (f, u)
}

/// The 1D experiment: `χ = (1, 1, 1)` by default, `u* = sin(πx)`, `g = eˣ`.
pub fn ode_1d_reference(n: usize, chi: (f64, f64, f64)) -> Result<TestProblem> {
    let (f, u) = sine_1d(chi);
    Ok(ode_1d(n, chi, f, f64::exp)?.with_exact_primal(|p| u(p[0])))
}

/// `J* = ∫₀¹ sin(πx)eˣ dx = π(e + 1)/(π² + 1)`.
pub fn ode_1d_functional_exact() -> f64 {
    PI * (std::f64::consts::E + 1.0) / (PI * PI + 1.0)
}

/// The 2D experiment: `u* = sin(πx)sin(πy)`, `g = e^{x+y}`.
pub fn convdiff_2d_reference(n: usize, kappa: (f64, f64)) -> Result<TestProblem> {
    let (f, u) = sine_2d(kappa);
    Ok(convdiff_2d(n, kappa, f, |x, y| (x + y).exp())?.with_exact_primal(|p| u(p[0], p[1])))
}

/// The polar experiment: `R = 1`, `g = 0`, `f = −3cos θ`, `u* = r(1 − r)cos θ`.
pub fn polar_poisson_reference(n_r: usize, n_theta: usize) -> Result<TestProblem> {
    Ok(polar_poisson(n_r, n_theta, 1.0, |_, t| -3.0 * t.cos(), |_| 0.0)?
        .with_exact_primal(|p| p[0] * (1.0 - p[0]) * p[1].cos()))
}

/// Standard normal entries from a seeded ChaCha stream.
pub fn random_vector(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            // Box–Muller keeps the dependency list to `rand` itself.
            let u1: f64 = 1.0 - rng.gen::<f64>();
            let u2: f64 = rng.gen();
            (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
        })
        .collect()
}

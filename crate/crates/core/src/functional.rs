//! Superconvergent evaluation of `J(u) = ∫₀¹ u g` from discrete primal and
//! adjoint solutions of the 1D problem.
//!
//! Both discrete solutions are lifted to cubic splines `u_h`, `v_h` and
//!
//! ```text
//! naive     = ⟨g, u_h⟩
//! corrected = ⟨g, u_h⟩ − ⟨v_h, f_h − f⟩,   f_h = χ₁u_h″ + χ₂u_h′ + χ₃u_h
//! ```
//!
//! The remaining error `⟨g_h − g, u_h − u⟩` is a product of two `O(h²)` terms.

use crate::dual::bilqr_solve;
use crate::error::{KrylovError, Result};
use crate::linop::{LinearOperator, SparseMatrix};
use crate::problems::{ode_1d_functional_exact, ode_1d_reference, sine_1d, TestProblem};
use crate::record::{SolveOptions, StoppingRule};
use crate::vecops::{axpy, nrm2};

/// End condition `second·s″ + first·s′ = value` at one end of a spline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EndCondition {
    pub second: f64,
    pub first: f64,
    pub value: f64,
}

impl EndCondition {
    pub fn natural() -> Self {
        Self {
            second: 1.0,
            first: 0.0,
            value: 0.0,
        }
    }

    pub fn clamped(slope: f64) -> Self {
        Self {
            second: 0.0,
            first: 1.0,
            value: slope,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum BoundaryTag {
    /// Left and right conditions, as given.
    Mixed(EndCondition, EndCondition),
}

/// Piecewise cubic `C²` interpolant in moment form: `m[i] = s″(x_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SplineInterpolant {
    pub knots: Vec<f64>,
    pub values: Vec<f64>,
    pub moments: Vec<f64>,
    pub boundary: BoundaryTag,
}

/// Value and first two derivatives at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplinePoint {
    pub s: f64,
    pub ds: f64,
    pub d2s: f64,
}

pub fn cubic_spline(
    nodes: &[f64],
    values: &[f64],
    left: EndCondition,
    right: EndCondition,
) -> Result<SplineInterpolant> {
    let n = nodes.len();
    if n < 4 {
        return Err(KrylovError::InvalidInput(format!(
            "a cubic spline needs at least 4 nodes, got {n}"
        )));
    }
    if values.len() != n {
        return Err(KrylovError::DimensionMismatch {
            what: "spline values",
            expected: n,
            got: values.len(),
        });
    }
    if nodes
        .windows(2)
        .any(|w| w[1].partial_cmp(&w[0]) != Some(std::cmp::Ordering::Greater))
    {
        return Err(KrylovError::InvalidInput(
            "spline nodes must be strictly increasing".into(),
        ));
    }
    let h: Vec<f64> = nodes.windows(2).map(|w| w[1] - w[0]).collect();
    let slope: Vec<f64> = values.windows(2).zip(&h).map(|(w, hi)| (w[1] - w[0]) / hi).collect();

    // Tridiagonal system for the moments.
    let mut lo = vec![0.0; n];
    let mut di = vec![0.0; n];
    let mut up = vec![0.0; n];
    let mut rhs = vec![0.0; n];
    // s′(x₀) = slope₀ − h₀(2m₀ + m₁)/6
    di[0] = left.second - left.first * h[0] / 3.0;
    up[0] = -left.first * h[0] / 6.0;
    rhs[0] = left.value - left.first * slope[0];
    for i in 1..n - 1 {
        lo[i] = h[i - 1] / 6.0;
        di[i] = (h[i - 1] + h[i]) / 3.0;
        up[i] = h[i] / 6.0;
        rhs[i] = slope[i] - slope[i - 1];
    }
    // s′(x_n) = slope_{n−1} + h_{n−1}(m_{n−1} + 2m_n)/6
    let hl = h[n - 2];
    lo[n - 1] = right.first * hl / 6.0;
    di[n - 1] = right.second + right.first * hl / 3.0;
    rhs[n - 1] = right.value - right.first * slope[n - 2];
    let moments = thomas(&lo, &di, &up, &rhs)?;
    Ok(SplineInterpolant {
        knots: nodes.to_vec(),
        values: values.to_vec(),
        moments,
        boundary: BoundaryTag::Mixed(left, right),
    })
}

fn thomas(lo: &[f64], di: &[f64], up: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = di.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut piv = di[0];
    for i in 0..n {
        if i > 0 {
            piv = di[i] - lo[i] * c[i - 1];
        }
        if piv == 0.0 || !piv.is_finite() {
            return Err(KrylovError::InvalidInput("spline end conditions are degenerate".into()));
        }
        c[i] = up[i] / piv;
        d[i] = (rhs[i] - if i > 0 { lo[i] * d[i - 1] } else { 0.0 }) / piv;
    }
    for i in (0..n - 1).rev() {
        d[i] -= c[i] * d[i + 1];
    }
    Ok(d)
}

impl SplineInterpolant {
    /// Index of the cell `[x_i, x_{i+1}]` containing `x` (clamped to the ends).
    pub fn cell(&self, x: f64) -> usize {
        let p = self.knots.partition_point(|&k| k <= x);
        p.saturating_sub(1).min(self.knots.len() - 2)
    }

    /// Evaluates on a known cell.
    pub fn eval_in(&self, i: usize, x: f64) -> SplinePoint {
        let (x0, x1) = (self.knots[i], self.knots[i + 1]);
        let h = x1 - x0;
        let (m0, m1) = (self.moments[i], self.moments[i + 1]);
        let (y0, y1) = (self.values[i], self.values[i + 1]);
        let a = x1 - x;
        let b = x - x0;
        let c0 = y0 / h - m0 * h / 6.0;
        let c1 = y1 / h - m1 * h / 6.0;
        SplinePoint {
            s: (m0 * a * a * a + m1 * b * b * b) / (6.0 * h) + c0 * a + c1 * b,
            ds: (m1 * b * b - m0 * a * a) / (2.0 * h) + c1 - c0,
            d2s: (m0 * a + m1 * b) / h,
        }
    }

    pub fn eval(&self, x: f64) -> SplinePoint {
        self.eval_in(self.cell(x), x)
    }
}

const GAUSS3_NODES: [f64; 3] = [-0.774_596_669_241_483_4, 0.0, 0.774_596_669_241_483_4];
const GAUSS3_WEIGHTS: [f64; 3] = [5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0];

/// Composite 3-point Gauss–Legendre rule over a partition. The integrand also
/// receives the cell index.
pub fn gauss3_partition(f: impl Fn(usize, f64) -> f64, partition: &[f64]) -> f64 {
    partition
        .windows(2)
        .enumerate()
        .map(|(i, w)| {
            let mid = 0.5 * (w[0] + w[1]);
            let half = 0.5 * (w[1] - w[0]);
            half * GAUSS3_NODES
                .iter()
                .zip(GAUSS3_WEIGHTS)
                .map(|(t, wt)| wt * f(i, mid + half * t))
                .sum::<f64>()
        })
        .sum()
}

/// Composite 3-point Gauss–Legendre rule on `subintervals` equal cells of `[a, b]`.
pub fn gauss3_integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, subintervals: usize) -> Result<f64> {
    if a.partial_cmp(&b) != Some(std::cmp::Ordering::Less) || subintervals == 0 {
        return Err(KrylovError::InvalidInput(format!(
            "need a < b and at least one subinterval, got [{a}, {b}] with {subintervals}"
        )));
    }
    let step = (b - a) / subintervals as f64;
    let partition: Vec<f64> = (0..=subintervals).map(|i| a + i as f64 * step).collect();
    Ok(gauss3_partition(|_, x| f(x), &partition))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FunctionalEstimate {
    pub naive: f64,
    pub corrected: f64,
    pub h: f64,
}

/// Builds `u_h`, `v_h` from the nodal solutions of the 1D problem and evaluates
/// both estimates of `∫₀¹ u g` with one Gauss rule per grid cell.
///
/// The splines interpolate the Dirichlet zeros at `x = 0, 1`, and their end
/// conditions enforce `L u_h = f` and `L* v_h = g` at both ends.
pub fn estimate_functional(
    problem: &TestProblem,
    u_d: &[f64],
    v_d: &[f64],
    f: impl Fn(f64) -> f64,
    g: impl Fn(f64) -> f64,
    chi: (f64, f64, f64),
) -> Result<FunctionalEstimate> {
    let n = problem.dim();
    if problem.grid.points.first().map(Vec::len) != Some(1) {
        return Err(KrylovError::InvalidInput(
            "functional estimation needs a 1D problem".into(),
        ));
    }
    crate::error::check_len("primal nodal solution", n, u_d.len())?;
    crate::error::check_len("dual nodal solution", n, v_d.len())?;
    let (c1, c2, c3) = chi;
    let knots: Vec<f64> = std::iter::once(0.0)
        .chain(problem.grid.points.iter().map(|p| p[0]))
        .chain(std::iter::once(1.0))
        .collect();
    let lift = |d: &[f64]| -> Vec<f64> {
        std::iter::once(0.0)
            .chain(d.iter().copied())
            .chain(std::iter::once(0.0))
            .collect()
    };
    // The boundary values are zero, so the χ₃ term drops out of the end conditions.
    let end = |first: f64, value: f64| EndCondition {
        second: c1,
        first,
        value,
    };
    let uh = cubic_spline(&knots, &lift(u_d), end(c2, f(0.0)), end(c2, f(1.0)))?;
    let vh = cubic_spline(&knots, &lift(v_d), end(-c2, g(0.0)), end(-c2, g(1.0)))?;
    let naive = gauss3_partition(|i, x| g(x) * uh.eval_in(i, x).s, &knots);
    let correction = gauss3_partition(
        |i, x| {
            let u = uh.eval_in(i, x);
            let fh = c1 * u.d2s + c2 * u.ds + c3 * u.s;
            vh.eval_in(i, x).s * (fh - f(x))
        },
        &knots,
    );
    Ok(FunctionalEstimate {
        naive,
        corrected: naive - correction,
        h: problem.grid.h,
    })
}

/// Least-squares slope of `log e` against `log h`; `None` with fewer than two
/// usable (positive, finite) points.
pub fn loglog_slope(h: &[f64], e: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = h
        .iter()
        .zip(e)
        .filter(|(a, b)| **a > 0.0 && **b > 0.0 && a.is_finite() && b.is_finite())
        .map(|(a, b)| (a.ln(), b.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    Some(pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / sxx)
}

/// One grid of a superconvergence study.
#[derive(Debug, Clone, PartialEq)]
pub struct SuperconvRow {
    pub n: usize,
    pub h: f64,
    pub naive_error: f64,
    pub corrected_error: f64,
    /// Total BiLQR iterations over all cycles.
    pub iterations: usize,
    /// Both discrete systems met the stopping rule.
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuperconvReport {
    pub exact: f64,
    pub rows: Vec<SuperconvRow>,
    /// Fitted over converged rows only; `None` with fewer than two.
    pub naive_slope: Option<f64>,
    pub corrected_slope: Option<f64>,
}

/// Outcome of [`solve_adjoint_pair`].
#[derive(Debug, Clone)]
pub struct PairSolution {
    pub x: Vec<f64>,
    pub t: Vec<f64>,
    pub iterations: usize,
    pub cycles: usize,
    pub primal_converged: bool,
    pub dual_converged: bool,
}

/// BiLQR on `A x = b`, `Aᵀt = c`, restarted on the residual pair when a cycle
/// ends (breakdown or iteration cap) before both systems meet `rule`.
///
/// Later cycles keep the absolute thresholds of the original right-hand sides.
pub fn solve_adjoint_pair(
    a: &SparseMatrix<f64>,
    b: &[f64],
    c: &[f64],
    rule: StoppingRule,
    max_cycles: usize,
) -> Result<PairSolution> {
    let n = a.nrows();
    let tol_b = rule.threshold(nrm2(b));
    let tol_c = rule.threshold(nrm2(c));
    let mut x = vec![0.0; n];
    let mut t = vec![0.0; n];
    let mut rb = b.to_vec();
    let mut rc = c.to_vec();
    let mut iterations = 0;
    let mut cycles = 0;
    let mut ws = vec![0.0; n];
    let residuals = |x: &[f64], t: &[f64], rb: &mut Vec<f64>, rc: &mut Vec<f64>, ws: &mut Vec<f64>| {
        a.apply(x, ws);
        rb.iter_mut()
            .zip(b.iter().zip(ws.iter()))
            .for_each(|(r, (bi, wi))| *r = bi - wi);
        a.apply_adjoint(t, ws);
        rc.iter_mut()
            .zip(c.iter().zip(ws.iter()))
            .for_each(|(r, (ci, wi))| *r = ci - wi);
    };
    while cycles < max_cycles.max(1) {
        let rule_k = if cycles == 0 {
            rule
        } else {
            StoppingRule {
                atol: tol_b.min(tol_c),
                rtol: 0.0,
                ..rule
            }
        };
        let sol = bilqr_solve(a, &rb, &rc, &SolveOptions::with_rule(rule_k))?;
        cycles += 1;
        iterations += sol.iterations;
        axpy(1.0, &sol.x, &mut x);
        axpy(1.0, &sol.t, &mut t);
        residuals(&x, &t, &mut rb, &mut rc, &mut ws);
        if nrm2(&rb) <= tol_b && nrm2(&rc) <= tol_c {
            break;
        }
        log::debug!("cycle {cycles}: residuals {:e} {:e}, restarting", nrm2(&rb), nrm2(&rc));
    }
    Ok(PairSolution {
        primal_converged: nrm2(&rb) <= tol_b,
        dual_converged: nrm2(&rc) <= tol_c,
        x,
        t,
        iterations,
        cycles,
    })
}

/// Functional errors of the 1D experiment (`u* = sin(πx)`, `g = eˣ`) on each
/// grid size, with the discrete systems solved by [`solve_adjoint_pair`].
pub fn superconvergence_study(ns: &[usize], chi: (f64, f64, f64), rule: StoppingRule) -> Result<SuperconvReport> {
    if let Some(&n) = ns.iter().find(|&&n| n < 16) {
        return Err(KrylovError::InvalidInput(format!(
            "grid sizes must be at least 16, got {n}"
        )));
    }
    let exact = ode_1d_functional_exact();
    let (f, _) = sine_1d(chi);
    let mut rows = Vec::with_capacity(ns.len());
    for &n in ns {
        let p = ode_1d_reference(n, chi)?;
        let c = p.rhs_dual.as_deref().unwrap_or(&p.rhs_primal);
        let sol = solve_adjoint_pair(&p.operator, &p.rhs_primal, c, rule, 5)?;
        let est = estimate_functional(&p, &sol.x, &sol.t, f, f64::exp, chi)?;
        rows.push(SuperconvRow {
            n,
            h: est.h,
            naive_error: (est.naive - exact).abs(),
            corrected_error: (est.corrected - exact).abs(),
            iterations: sol.iterations,
            converged: sol.primal_converged && sol.dual_converged,
        });
    }
    let fit = |e: fn(&SuperconvRow) -> f64| {
        let ok: Vec<&SuperconvRow> = rows.iter().filter(|r| r.converged).collect();
        let h: Vec<f64> = ok.iter().map(|r| r.h).collect();
        let err: Vec<f64> = ok.iter().map(|r| e(r)).collect();
        loglog_slope(&h, &err)
    };
    Ok(SuperconvReport {
        exact,
        naive_slope: fit(|r| r.naive_error),
        corrected_slope: fit(|r| r.corrected_error),
        rows,
    })
}

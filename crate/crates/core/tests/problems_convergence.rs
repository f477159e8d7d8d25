//! Discretization order of the model problems, from dense solves of the
//! generated systems against the continuous solutions restricted to the grid.

mod common;

use common::dense_of;
use common::oracle::{loglog_slope, lu_solve};
use krylov_core::problems::{convdiff_2d_reference, ode_1d_reference, polar_poisson_reference, TestProblem};

fn max_error(p: &TestProblem) -> f64 {
    let u = lu_solve(&dense_of(&p.operator), &p.rhs_primal).expect("nonsingular");
    let exact = p.exact_primal.as_ref().expect("exact solution");
    u.iter().zip(exact).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
}

fn order(problems: impl IntoIterator<Item = TestProblem>) -> f64 {
    let (h, e): (Vec<f64>, Vec<f64>) = problems.into_iter().map(|p| (p.grid.h, max_error(&p))).unzip();
    loglog_slope(&h, &e)
}

#[test]
fn ode_1d_is_second_order() {
    let s = order([10, 20, 40].map(|n| ode_1d_reference(n, (1.0, 1.0, 1.0)).unwrap()));
    assert!((s - 2.0).abs() <= 0.3, "slope {s}");
}

#[test]
fn convection_diffusion_2d_is_second_order() {
    let s = order([5, 10, 20].map(|n| convdiff_2d_reference(n, (5.0, 20.0)).unwrap()));
    assert!((s - 2.0).abs() <= 0.3, "slope {s}");
}

#[test]
fn polar_poisson_is_second_order() {
    let s = order([5, 10, 20].map(|n| polar_poisson_reference(n, 4 * n).unwrap()));
    assert!((s - 2.0).abs() <= 0.3, "slope {s}");
}

//! Linear solvers for the implicit stages: `(I − αΔ_h + βI) x = rhs`.

use crate::error::{require, Error, Result};
use crate::grid::{Grid, GridKind};
use crate::model::Field;

/// Tolerance on `‖A x − rhs‖_∞ / ‖rhs‖_∞` that every solve must meet.
pub const RESIDUAL_TOL: f64 = 1e-10;

/// Tridiagonal elimination on interval and radial grids.
pub fn helmholtz_solve_1d(rhs: &Field, alpha: f64, beta: f64, g: &Grid) -> Result<Field> {
    g.check(rhs)?;
    require(g.kind() != GridKind::Rect2D, || "helmholtz_solve_1d needs a 1D or radial grid".into())?;
    require(alpha > 0.0 && alpha.is_finite(), || format!("alpha must be > 0, got {alpha}"))?;
    require(beta >= 0.0 && beta.is_finite(), || format!("beta must be >= 0, got {beta}"))?;
    let x = solve_tridiagonal(rhs.values(), alpha, beta, g);
    check_residual(rhs.values(), &x, alpha, beta, g, 1)?;
    Field::new(g, x)
}

/// Conjugate gradients on rectangles; the Neumann operator is symmetric
/// positive definite for `β ≥ 0` and the uniform cell volume.
pub fn helmholtz_solve_2d(rhs: &Field, alpha: f64, beta: f64, g: &Grid) -> Result<Field> {
    g.check(rhs)?;
    require(g.kind() == GridKind::Rect2D, || "helmholtz_solve_2d needs a rectangular grid".into())?;
    require(alpha >= 0.0 && alpha.is_finite(), || format!("alpha must be >= 0, got {alpha}"))?;
    require(beta >= 0.0 && beta.is_finite(), || format!("beta must be >= 0, got {beta}"))?;
    let (x, iterations) = conjugate_gradient(rhs.values(), alpha, beta, g)?;
    check_residual(rhs.values(), &x, alpha, beta, g, iterations)?;
    Field::new(g, x)
}

/// Dispatches on the grid kind.
pub(crate) fn helmholtz_solve_raw(rhs: &[f64], alpha: f64, beta: f64, g: &Grid) -> Result<Vec<f64>> {
    match g.kind() {
        GridKind::Rect2D => {
            let (mut x, _) = conjugate_gradient(rhs, alpha, beta, g)?;
            // CG round-off may leave −1e-17 where the exact solution is zero
            for xi in &mut x {
                *xi = xi.max(0.0);
            }
            Ok(x)
        }
        _ => Ok(solve_tridiagonal(rhs, alpha, beta, g)),
    }
}

pub(crate) fn apply_helmholtz(x: &[f64], alpha: f64, beta: f64, g: &Grid) -> Vec<f64> {
    let lap = g.laplacian_raw(x);
    x.iter().zip(lap).map(|(xi, li)| (1.0 + beta) * xi - alpha * li).collect()
}

fn solve_tridiagonal(rhs: &[f64], alpha: f64, beta: f64, g: &Grid) -> Vec<f64> {
    let (lower, upper) = g.line_couplings().expect("line grid");
    let n = rhs.len();
    let diag = |i: usize| 1.0 + beta + alpha * (lower[i] + upper[i]);
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let m0 = diag(0);
    c[0] = -alpha * upper[0] / m0;
    d[0] = rhs[0] / m0;
    for i in 1..n {
        let sub = -alpha * lower[i];
        let m = diag(i) - sub * c[i - 1];
        debug_assert!(m > 0.0, "Helmholtz matrix lost diagonal dominance");
        c[i] = -alpha * upper[i] / m;
        d[i] = (rhs[i] - sub * d[i - 1]) / m;
    }
    for i in (0..n - 1).rev() {
        d[i] -= c[i] * d[i + 1];
    }
    d
}

fn conjugate_gradient(b: &[f64], alpha: f64, beta: f64, g: &Grid) -> Result<(Vec<f64>, usize)> {
    let n = b.len();
    let b_inf = b.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    // ‖r‖_∞ ≤ ‖r‖_2, so this stopping rule implies the ∞-norm contract with room to spare
    let stop = 1e-2 * RESIDUAL_TOL * b_inf;
    let max_iter = 4 * n + 100;

    let mut x: Vec<f64> = b.iter().map(|bi| bi / (1.0 + beta)).collect();
    let ax = apply_helmholtz(&x, alpha, beta, g);
    let mut r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
    let mut p = r.clone();
    let mut rr = dot(&r, &r);
    let mut iterations = 0;
    while rr.sqrt() > stop {
        if iterations >= max_iter {
            return Err(Error::Solver { iterations, residual: rr.sqrt() / b_inf.max(f64::MIN_POSITIVE) });
        }
        let ap = apply_helmholtz(&p, alpha, beta, g);
        let step = rr / dot(&p, &ap);
        for i in 0..n {
            x[i] += step * p[i];
            r[i] -= step * ap[i];
        }
        let rr_next = dot(&r, &r);
        let ratio = rr_next / rr;
        for i in 0..n {
            p[i] = r[i] + ratio * p[i];
        }
        rr = rr_next;
        iterations += 1;
    }
    Ok((x, iterations))
}

fn check_residual(rhs: &[f64], x: &[f64], alpha: f64, beta: f64, g: &Grid, iterations: usize) -> Result<()> {
    let ax = apply_helmholtz(x, alpha, beta, g);
    let res = rhs.iter().zip(&ax).fold(0.0f64, |m, (b, a)| m.max((b - a).abs()));
    let scale = rhs.iter().fold(0.0f64, |m, b| m.max(b.abs()));
    if res <= RESIDUAL_TOL * scale || res == 0.0 {
        Ok(())
    } else {
        Err(Error::Solver { iterations, residual: res / scale.max(f64::MIN_POSITIVE) })
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

//! Cumulative quadrature and finite differences on sampled grids.

use crate::error::{Error, Result};
use crate::linalg::C64;

/// Integration rule used for every cumulative integral in the crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Quadrature {
    /// Composite trapezoidal rule, second order.
    Trapezoid,
    /// Each interval integrated exactly against the cubic through the four
    /// nearest samples (clamped at the ends), fourth order.
    #[default]
    Cubic,
}

/// Checks that a grid has at least one point and is strictly increasing.
pub fn validate_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::MalformedGrid("grid is empty".into()));
    }
    if grid.iter().any(|x| !x.is_finite()) {
        return Err(Error::MalformedGrid(
            "grid contains non-finite points".into(),
        ));
    }
    if let Some(w) = grid.windows(2).find(|w| w[1] <= w[0]) {
        return Err(Error::MalformedGrid(format!(
            "grid not strictly increasing at {} -> {}",
            w[0], w[1]
        )));
    }
    Ok(())
}

fn check_lengths(grid: &[f64], values: &[C64]) -> Result<()> {
    validate_grid(grid)?;
    if grid.len() != values.len() {
        return Err(Error::MalformedGrid(format!(
            "{} samples for {} grid points",
            values.len(),
            grid.len()
        )));
    }
    Ok(())
}

fn stencil(n: usize, interval: usize, rule: Quadrature) -> std::ops::Range<usize> {
    match rule {
        Quadrature::Trapezoid => interval..interval + 2,
        Quadrature::Cubic => {
            let width = n.min(4);
            let lo = interval.saturating_sub(1).min(n - width);
            lo..lo + width
        }
    }
}

/// Weights `w_j` such that `sum_j w_j f(x_j)` integrates the interpolating
/// polynomial through `nodes` over `[a, b]`. Nodes are shifted by `a` to
/// avoid cancellation.
fn lagrange_weights(nodes: &[f64], a: f64, b: f64) -> Vec<f64> {
    let t: Vec<f64> = nodes.iter().map(|x| x - a).collect();
    let len = b - a;
    (0..t.len())
        .map(|j| {
            // coefficients of L_j in ascending powers of (x - a)
            let mut poly = vec![1.0];
            for (m, &tm) in t.iter().enumerate() {
                if m == j {
                    continue;
                }
                let denom = t[j] - tm;
                let mut next = vec![0.0; poly.len() + 1];
                for (p, &c) in poly.iter().enumerate() {
                    next[p + 1] += c / denom;
                    next[p] -= c * tm / denom;
                }
                poly = next;
            }
            poly.iter()
                .enumerate()
                .map(|(p, &c)| c * len.powi(p as i32 + 1) / (p as f64 + 1.0))
                .sum()
        })
        .collect()
}

fn interval_integral(grid: &[f64], f: &[C64], i: usize, upper: f64, rule: Quadrature) -> C64 {
    let range = stencil(grid.len(), i, rule);
    let w = lagrange_weights(&grid[range.clone()], grid[i], upper);
    range.zip(w).map(|(j, w)| f[j] * w).sum()
}

/// Running integral `F(x_i) = int_{x_0}^{x_i} f ds`, with `F(x_0) = 0`.
pub fn cumulative(grid: &[f64], f: &[C64], rule: Quadrature) -> Result<Vec<C64>> {
    check_lengths(grid, f)?;
    let mut out = Vec::with_capacity(grid.len());
    let mut acc = C64::new(0.0, 0.0);
    out.push(acc);
    for i in 0..grid.len().saturating_sub(1) {
        acc += interval_integral(grid, f, i, grid[i + 1], rule);
        out.push(acc);
    }
    Ok(out)
}

/// Running integral evaluated at an arbitrary `x` inside the grid span, using
/// the same local rule as [`cumulative`]. `running` must come from
/// `cumulative(grid, f, rule)`.
pub fn cumulative_at(
    grid: &[f64],
    f: &[C64],
    running: &[C64],
    x: f64,
    rule: Quadrature,
) -> Result<C64> {
    check_lengths(grid, f)?;
    let (first, last) = (grid[0], grid[grid.len() - 1]);
    if !(first..=last).contains(&x) {
        return Err(Error::InvalidInput(format!(
            "x = {x} outside grid span [{first}, {last}]"
        )));
    }
    // interval containing x
    let i = match grid.iter().position(|&g| g >= x) {
        Some(0) | None => return Ok(running[0]),
        Some(k) if grid[k] == x => return Ok(running[k]),
        Some(k) => k - 1,
    };
    Ok(running[i] + interval_integral(grid, f, i, x, rule))
}

/// Second-order finite-difference derivative of samples: centred in the
/// interior, one-sided three-point at the ends. Works on non-uniform grids.
pub fn gradient(grid: &[f64], f: &[C64]) -> Result<Vec<C64>> {
    check_lengths(grid, f)?;
    let n = grid.len();
    if n < 3 {
        if n == 2 {
            let d = (f[1] - f[0]) / (grid[1] - grid[0]);
            return Ok(vec![d, d]);
        }
        return Ok(vec![C64::new(0.0, 0.0); n]);
    }
    let three_point = |i0: usize, at: usize| {
        // derivative at grid[at] of the parabola through i0, i0+1, i0+2
        let (x0, x1, x2) = (grid[i0], grid[i0 + 1], grid[i0 + 2]);
        let x = grid[at];
        let w0 = (2.0 * x - x1 - x2) / ((x0 - x1) * (x0 - x2));
        let w1 = (2.0 * x - x0 - x2) / ((x1 - x0) * (x1 - x2));
        let w2 = (2.0 * x - x0 - x1) / ((x2 - x0) * (x2 - x1));
        f[i0] * w0 + f[i0 + 1] * w1 + f[i0 + 2] * w2
    };
    Ok((0..n)
        .map(|i| {
            if i == 0 {
                three_point(0, 0)
            } else if i == n - 1 {
                three_point(n - 3, n - 1)
            } else {
                three_point(i - 1, i)
            }
        })
        .collect())
}

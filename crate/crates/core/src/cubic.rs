//! Cubic-WKB: the three roots of `l^3 + k^2 l + 2 alpha k k' = 0` tracked
//! along a grid, the zeroth-order basis `exp(int l_j)`, the first-order term
//! and the local combination that matches a Schrodinger state.
//!
//! The cubic always receives `(k^2, k k')`, never `(k, k')`, so nothing is
//! singular at a turning point.

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, C64, I};
use crate::quadrature::{cumulative, gradient, validate_grid, Quadrature};
use crate::roots::{canonical_sort, depressed_real, match_branches, min_gap};
use crate::schrodinger::{Alpha, PhysicalSystem, StateVector};
use crate::wkb::Sign;

/// Relative root separation below which two branches count as colliding.
pub const COLLISION_TOL: f64 = 1e-8;

/// Far-field subgrid: `|l^2 + k^2| <= FAR_FIELD_RATIO * |k|^2`.
pub const FAR_FIELD_RATIO: f64 = 0.01;

/// Far-field subgrid: `|l -+ i k| < BRANCH_RATIO * |k|`.
pub const BRANCH_RATIO: f64 = 0.1;

/// Calibrated bound on `|dS1/dx|` relative to `max|k'/k|` in the far field.
pub const FAR_FIELD_TOL: f64 = 0.05;

/// Roots of `l^3 + k2 l + 2 alpha kkp` in canonical order (descending real
/// part, then descending imaginary part).
pub fn cubic_roots(k2: f64, kkp: f64, alpha: f64) -> [C64; 3] {
    let mut r = depressed_real(k2, 2.0 * alpha * kkp);
    canonical_sort(&mut r);
    r
}

fn discriminant(k2: f64, kkp: f64, alpha: f64) -> f64 {
    let q = 2.0 * alpha * kkp;
    (0.5 * q).powi(2) + (k2 / 3.0).powi(3)
}

/// Continuously tracked roots of the cubic along a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct CubicBranches {
    pub grid: Vec<f64>,
    pub alpha: Vec<f64>,
    pub alpha_prime: Vec<f64>,
    pub k2: Vec<f64>,
    pub kkp: Vec<f64>,
    /// `roots[i][j]` is branch `j` at grid point `i`.
    pub roots: Vec<[C64; 3]>,
}

impl CubicBranches {
    pub fn branch(&self, j: usize) -> Vec<C64> {
        self.roots.iter().map(|r| r[j]).collect()
    }

    /// `max |l^3 + k^2 l + 2 alpha k k'| / (1 + |k|^3)` over points and branches.
    pub fn residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, r) in self.roots.iter().enumerate() {
            let k2 = self.k2[i];
            let c0 = 2.0 * self.alpha[i] * self.kkp[i];
            for &l in r {
                let res = (l * l * l + l * k2 + c0).norm() / (1.0 + k2.abs().powf(1.5));
                worst = worst.max(res);
            }
        }
        worst
    }
}

fn local_step(grid: &[f64], i: usize) -> f64 {
    let n = grid.len();
    if n < 2 {
        1e-4 * grid[0].abs().max(1.0)
    } else if i == 0 {
        grid[1] - grid[0]
    } else if i == n - 1 {
        grid[n - 1] - grid[n - 2]
    } else {
        0.5 * (grid[i + 1] - grid[i - 1])
    }
}

/// Solves the cubic at every grid point and links the roots by minimal total
/// displacement.
///
/// Each step is checked: every branch must move less than half the smallest
/// root separation. Near a sign change of the discriminant (a pair merges and
/// splits) the merging pair is exempt on the crossing step and on the steps
/// on either side of it, where its displacement is necessarily comparable to
/// its separation.
pub fn continue_branches(
    sys: &PhysicalSystem,
    grid: &[f64],
    alpha: &Alpha,
) -> Result<CubicBranches> {
    validate_grid(grid)?;
    sys.validate()?;
    let n = grid.len();
    let mut out = CubicBranches {
        grid: grid.to_vec(),
        alpha: Vec::with_capacity(n),
        alpha_prime: Vec::with_capacity(n),
        k2: Vec::with_capacity(n),
        kkp: Vec::with_capacity(n),
        roots: Vec::with_capacity(n),
    };
    let mut raws = Vec::with_capacity(n);
    let mut discs = Vec::with_capacity(n);
    for (i, &x) in grid.iter().enumerate() {
        let a = alpha.value(x);
        if !a.is_finite() {
            return Err(Error::InvalidInput(format!("alpha not finite at x = {x}")));
        }
        let ap = alpha.derivative(x, local_step(grid, i));
        let (k2, kkp) = (sys.k_squared(x), sys.kk_prime(x));
        let raw = cubic_roots(k2, kkp, a);
        let scale = raw.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let gap = min_gap(&raw);
        if gap <= COLLISION_TOL * scale || scale == 0.0 {
            return Err(Error::BranchCollision { x, gap });
        }
        discs.push(discriminant(k2, kkp, a).signum());
        raws.push(raw);
        out.alpha.push(a);
        out.alpha_prime.push(ap);
        out.k2.push(k2);
        out.kkp.push(kkp);
    }
    // steps touching a node next to a merge: the pair separates like a square
    // root there, so its displacement may exceed half its gap
    let flips = |j: usize| j + 1 < n && discs[j] != discs[j + 1];
    for (i, raw) in raws.into_iter().enumerate() {
        let roots = match out.roots.last() {
            None => raw,
            Some(prev) => {
                let perm = match_branches(prev, &raw);
                let cur = [raw[perm[0]], raw[perm[1]], raw[perm[2]]];
                let limit = 0.5 * min_gap(prev).min(min_gap(&raw));
                let merging = flips(i - 1) || (i >= 2 && flips(i - 2)) || flips(i);
                // the pair closest together is the one that merges
                let isolated = (0..3)
                    .max_by(|&p, &q| isolation(&cur, p).total_cmp(&isolation(&cur, q)))
                    .unwrap_or(0);
                for b in 0..3 {
                    if merging && b != isolated {
                        continue;
                    }
                    if (cur[b] - prev[b]).norm() >= limit {
                        return Err(Error::CoarseGrid {
                            x0: grid[i - 1],
                            x1: grid[i],
                        });
                    }
                }
                cur
            }
        };
        out.roots.push(roots);
    }
    Ok(out)
}

fn isolation(r: &[C64; 3], j: usize) -> f64 {
    (0..3)
        .filter(|&m| m != j)
        .map(|m| (r[m] - r[j]).norm())
        .fold(f64::INFINITY, f64::min)
}

fn check_branch(j: usize) -> Result<()> {
    if j >= 3 {
        Err(Error::InvalidBranch {
            branch: j,
            reason: "the cubic has three branches",
        })
    } else {
        Ok(())
    }
}

/// `-[3 l l' + 2(1 - alpha) k k' - (alpha'/alpha)(l^2 + k^2)] / (3 l^2 + k^2)`
/// written in terms of `l^2` and `l l'`.
fn first_order_rate(
    lsq: C64,
    ldl: C64,
    k2: f64,
    kkp: f64,
    alpha: f64,
    alpha_prime: f64,
    x: f64,
) -> Result<C64> {
    let denom = lsq * 3.0 + k2;
    let scale = (3.0 * lsq.norm()).max(k2.abs());
    if denom.norm() <= COLLISION_TOL * scale || scale == 0.0 {
        return Err(Error::DenominatorVanishes { x });
    }
    let gauge = if alpha_prime == 0.0 {
        C64::new(0.0, 0.0)
    } else if alpha == 0.0 {
        return Err(Error::AlphaZero { x });
    } else {
        (lsq + k2) * (alpha_prime / alpha)
    };
    Ok(-(ldl * 3.0 + 2.0 * (1.0 - alpha) * kkp - gauge) / denom)
}

/// `dS1/dx` on branch `j`, with `l'` by finite differences along the tracked
/// branch.
pub fn s1_cubic_integrand(branches: &CubicBranches, j: usize) -> Result<Vec<C64>> {
    check_branch(j)?;
    let lam = branches.branch(j);
    let dlam = gradient(&branches.grid, &lam)?;
    lam.iter()
        .zip(&dlam)
        .enumerate()
        .map(|(i, (&l, &dl))| {
            first_order_rate(
                l * l,
                l * dl,
                branches.k2[i],
                branches.kkp[i],
                branches.alpha[i],
                branches.alpha_prime[i],
                branches.grid[i],
            )
        })
        .collect()
}

/// First-order term `S1` on branch `j`, zero at the first grid point.
pub fn s1_cubic(branches: &CubicBranches, j: usize, rule: Quadrature) -> Result<Vec<C64>> {
    cumulative(&branches.grid, &s1_cubic_integrand(branches, j)?, rule)
}

/// Measured against closed-form `dS1/dx` on the far-field subgrid.
#[derive(Debug, Clone, PartialEq)]
pub struct FarFieldReport {
    pub sign: Sign,
    /// Grid indices of the far-field subgrid.
    pub indices: Vec<usize>,
    /// Tracked branch used at each subgrid point.
    pub branch: Vec<usize>,
    pub x: Vec<f64>,
    pub measured: Vec<C64>,
    /// `-(1 + 2 alpha) k' / (2k)`.
    pub closed_form: Vec<C64>,
    /// The first-order integrand with `l^2 -> -k^2` and `l l' -> -k k'`.
    pub substituted: Vec<C64>,
    pub max_abs_diff: f64,
    pub max_abs_measured: f64,
    pub max_abs_closed: f64,
    /// `max |k'/k|` on the subgrid.
    pub max_log_derivative: f64,
    /// `FAR_FIELD_TOL * max_log_derivative`.
    pub tolerance: f64,
    /// `max |substituted - closed_form|`; zero up to rounding.
    pub substitution_error: f64,
}

/// Compares the first-order integrand on the branch near `sign * i k` with
/// its far-field closed form.
pub fn far_field_check(branches: &CubicBranches, sign: Sign) -> Result<FarFieldReport> {
    let integrands = (0..3)
        .map(|j| s1_cubic_integrand(branches, j))
        .collect::<Vec<_>>();
    let mut rep = FarFieldReport {
        sign,
        indices: Vec::new(),
        branch: Vec::new(),
        x: Vec::new(),
        measured: Vec::new(),
        closed_form: Vec::new(),
        substituted: Vec::new(),
        max_abs_diff: 0.0,
        max_abs_measured: 0.0,
        max_abs_closed: 0.0,
        max_log_derivative: 0.0,
        tolerance: 0.0,
        substitution_error: 0.0,
    };
    for (i, r) in branches.roots.iter().enumerate() {
        let (k2, kkp) = (branches.k2[i], branches.kkp[i]);
        if k2 == 0.0 {
            continue;
        }
        let k = if k2 > 0.0 {
            C64::new(k2.sqrt(), 0.0)
        } else {
            I * (-k2).sqrt()
        };
        let target = I * k * sign.value();
        let j = (0..3)
            .min_by(|&p, &q| (r[p] - target).norm().total_cmp(&(r[q] - target).norm()))
            .unwrap_or(0);
        let l = r[j];
        if (l - target).norm() >= BRANCH_RATIO * k.norm()
            || (l * l + k2).norm() > FAR_FIELD_RATIO * k2.abs()
        {
            continue;
        }
        let measured = match &integrands[j] {
            Ok(v) => v[i],
            Err(e) => return Err(e.clone()),
        };
        let (a, ap) = (branches.alpha[i], branches.alpha_prime[i]);
        let closed = C64::new(-(1.0 + 2.0 * a) * kkp / (2.0 * k2), 0.0);
        let substituted = first_order_rate(
            C64::new(-k2, 0.0),
            C64::new(-kkp, 0.0),
            k2,
            kkp,
            a,
            ap,
            branches.grid[i],
        )?;
        let log_der = (kkp / k2).abs();
        rep.indices.push(i);
        rep.branch.push(j);
        rep.x.push(branches.grid[i]);
        rep.measured.push(measured);
        rep.closed_form.push(closed);
        rep.substituted.push(substituted);
        rep.max_abs_diff = rep.max_abs_diff.max((measured - closed).norm());
        rep.max_abs_measured = rep.max_abs_measured.max(measured.norm());
        rep.max_abs_closed = rep.max_abs_closed.max(closed.norm());
        rep.max_log_derivative = rep.max_log_derivative.max(log_der);
        rep.substitution_error = rep.substitution_error.max((substituted - closed).norm());
    }
    if rep.indices.is_empty() {
        return Err(Error::NoFarField);
    }
    rep.tolerance = FAR_FIELD_TOL * rep.max_log_derivative;
    Ok(rep)
}

/// Truncation order of the cubic-WKB basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum CubicOrder {
    Zeroth,
    First,
}

/// The three basis functions with their log-derivatives.
#[derive(Debug, Clone, PartialEq)]
pub struct CubicBasis {
    pub grid: Vec<f64>,
    pub order: CubicOrder,
    pub branches: CubicBranches,
    /// `psi[j][i] = exp(int_{x_0}^{x_i} mu_j)`.
    pub psi: [Vec<C64>; 3],
    /// `mu_j = l_j` at order 0, `l_j + dS1_j/dx` at order 1.
    pub log_derivative: [Vec<C64>; 3],
}

/// `psi_j = exp(int_{x_0}^x l_j ds)`, times `exp(S1_j)` at first order.
pub fn cubic_wkb_basis(
    sys: &PhysicalSystem,
    grid: &[f64],
    alpha: &Alpha,
    order: CubicOrder,
) -> Result<CubicBasis> {
    cubic_wkb_basis_with(sys, grid, alpha, order, Quadrature::default())
}

pub fn cubic_wkb_basis_with(
    sys: &PhysicalSystem,
    grid: &[f64],
    alpha: &Alpha,
    order: CubicOrder,
    rule: Quadrature,
) -> Result<CubicBasis> {
    let branches = continue_branches(sys, grid, alpha)?;
    let mut psi: [Vec<C64>; 3] = Default::default();
    let mut mu: [Vec<C64>; 3] = Default::default();
    for j in 0..3 {
        let mut m = branches.branch(j);
        if order == CubicOrder::First {
            for (a, b) in m.iter_mut().zip(s1_cubic_integrand(&branches, j)?) {
                *a += b;
            }
        }
        psi[j] = cumulative(grid, &m, rule)?
            .into_iter()
            .map(|e| e.exp())
            .collect();
        mu[j] = m;
    }
    Ok(CubicBasis {
        grid: grid.to_vec(),
        order,
        branches,
        psi,
        log_derivative: mu,
    })
}

/// `sum_j c_j psi_j` matched to a Schrodinger state at the anchor.
#[derive(Debug, Clone, PartialEq)]
pub struct CubicWkbSolution {
    pub grid: Vec<f64>,
    pub order: CubicOrder,
    pub anchor: f64,
    pub coefficients: [C64; 3],
    pub values: Vec<C64>,
    /// 1-norm condition estimate of the column-scaled matching matrix.
    pub condition: f64,
}

impl CubicWkbSolution {
    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

/// Solves for `c_j` from `psi(x_a) = y0`, `psi'(x_a) = y1` and
/// `psi''(x_a) = -k^2(x_a) y0`, with `psi_j' = mu_j psi_j` and
/// `psi_j'' = (mu_j^2 + mu_j') psi_j`. `target.y2` is ignored; the third
/// condition is the Schrodinger constraint. `anchor` must be a grid point.
pub fn combine_basis(
    basis: &CubicBasis,
    sys: &PhysicalSystem,
    anchor: f64,
    target: StateVector,
) -> Result<CubicWkbSolution> {
    let grid = &basis.grid;
    let a = crate::wkb::nearest_index(grid, anchor);
    let spacing = if grid.len() > 1 {
        local_step(grid, a)
    } else {
        1.0
    };
    if (grid[a] - anchor).abs() > 1e-9 * spacing {
        return Err(Error::InvalidInput(format!(
            "anchor {anchor} is not a grid point"
        )));
    }
    let mut cols = [[C64::new(0.0, 0.0); 3]; 3];
    for j in 0..3 {
        let mu = &basis.log_derivative[j];
        let dmu = gradient(grid, mu)?;
        let p = basis.psi[j][a];
        let m = mu[a];
        cols[j] = [p, m * p, (m * m + dmu[a]) * p];
    }
    // column scaling removes the arbitrary basis normalisation
    let scales: Vec<f64> = cols
        .iter()
        .map(|c| c.iter().map(|z| z.norm()).fold(0.0, f64::max))
        .collect();
    if scales.iter().any(|s| *s == 0.0 || !s.is_finite()) {
        return Err(Error::SingularCombination {
            cond: f64::INFINITY,
        });
    }
    let mut mat = CMatrix::zeros(3);
    for r in 0..3 {
        for c in 0..3 {
            mat[(r, c)] = cols[c][r] / scales[c];
        }
    }
    let cond = mat.condition();
    if !(cond <= 1e12) {
        return Err(Error::SingularCombination { cond });
    }
    let rhs = [target.y0, target.y1, -target.y0 * sys.k_squared(grid[a])];
    let z = linalg::solve(&mat, &rhs).ok_or(Error::SingularCombination { cond })?;
    let coefficients = [z[0] / scales[0], z[1] / scales[1], z[2] / scales[2]];
    let values = (0..grid.len())
        .map(|i| (0..3).map(|j| coefficients[j] * basis.psi[j][i]).sum())
        .collect();
    Ok(CubicWkbSolution {
        grid: grid.clone(),
        order: basis.order,
        anchor: grid[a],
        coefficients,
        values,
        condition: cond,
    })
}

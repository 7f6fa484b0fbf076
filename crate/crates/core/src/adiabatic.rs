//! Adiabatic expansion of `dy/dx = M(x) y` around the instantaneous
//! eigenvectors of `M`.
//!
//! The solution is written as `y = sum_n c_n |n(x)>` with a dominant branch
//! `b`:
//!
//! ```text
//! c_b = exp(S0/eps + S1 + eps*S2),   c_l = eps * f1(l) * c_b   (l != b)
//!
//! S0/eps = int lambda_b dx
//! S1     = -int <b|d/dx|b> dx
//! S2     = -(1/eps) int sum_{m != b} <b|d/dx|m><m|d/dx|b> / (lambda_m - lambda_b) dx
//! f1(l)  = (1/eps) <l|d/dx|b> / (lambda_l - lambda_b)
//! ```
//!
//! All integrals start at the first grid point. Right eigenvectors are
//! normalised so that their first non-negligible component equals one and the
//! left (dual) vectors are scaled to be biorthonormal to them; the couplings
//! `<n|d/dx|l>` are taken by central differences in that gauge.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::{dot, vec_norm, CMatrix, C64};
use crate::quadrature::{cumulative, cumulative_at, validate_grid, Quadrature};
use crate::roots;

/// Relative eigenvalue gap below which the spectrum counts as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-8;

/// Components below this fraction of the vector norm are skipped when fixing
/// the eigenvector gauge.
const GAUGE_TOL: f64 = 1e-8;

/// An `N x N` complex matrix-valued function of one real coordinate.
#[derive(Clone)]
pub struct MatrixFunction {
    dim: usize,
    eval: Arc<dyn Fn(f64) -> CMatrix + Send + Sync>,
}

impl fmt::Debug for MatrixFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MatrixFunction")
            .field("dim", &self.dim)
            .finish()
    }
}

impl MatrixFunction {
    pub fn new<F>(dim: usize, eval: F) -> Result<Self>
    where
        F: Fn(f64) -> CMatrix + Send + Sync + 'static,
    {
        if dim < 2 {
            return Err(Error::InvalidInput(format!("matrix dimension {dim} < 2")));
        }
        Ok(MatrixFunction {
            dim,
            eval: Arc::new(eval),
        })
    }

    /// The x-independent function `x -> m`.
    pub fn constant(m: CMatrix) -> Result<Self> {
        Self::new(m.dim(), move |_| m.clone())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Evaluates `M(x)`, checking dimension and finiteness.
    pub fn at(&self, x: f64) -> Result<CMatrix> {
        let m = (self.eval)(x);
        if m.dim() != self.dim {
            return Err(Error::InvalidInput(format!(
                "matrix function returned dimension {} instead of {}",
                m.dim(),
                self.dim
            )));
        }
        if !m.is_finite() {
            return Err(Error::InvalidInput(format!(
                "non-finite matrix entry at x = {x}"
            )));
        }
        Ok(m)
    }

    /// The rescaled function `t -> M(t / scale)`, used to express a problem in
    /// the slow variable `t = scale * x`.
    pub fn rescaled(&self, scale: f64) -> Self {
        let inner = self.eval.clone();
        MatrixFunction {
            dim: self.dim,
            eval: Arc::new(move |t| inner(t / scale)),
        }
    }
}

/// Eigenvalues with matching right vectors `|n>` and dual left vectors `<n|`
/// of `M(x)`, biorthonormal: `<m|n> = delta_mn`.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenSystem {
    pub x: f64,
    pub eigenvalues: Vec<C64>,
    pub right: Vec<Vec<C64>>,
    pub left: Vec<Vec<C64>>,
}

impl EigenSystem {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `max_n |M|n> - lambda_n |n>| / (1 + |M|)`.
    pub fn residual(&self, m: &CMatrix) -> f64 {
        let scale = 1.0 + m.norm();
        (0..self.dim())
            .map(|n| {
                let mv = m.mul_vec(&self.right[n]);
                let r: Vec<C64> = mv
                    .iter()
                    .zip(&self.right[n])
                    .map(|(a, v)| a - v * self.eigenvalues[n])
                    .collect();
                vec_norm(&r) / scale
            })
            .fold(0.0, f64::max)
    }

    /// Left-eigenvector residual `max_n |<n|M - lambda_n <n|| / (1 + |M|)`.
    pub fn left_residual(&self, m: &CMatrix) -> f64 {
        let scale = 1.0 + m.norm();
        (0..self.dim())
            .map(|n| {
                let wm = m.vec_mul(&self.left[n]);
                let r: Vec<C64> = wm
                    .iter()
                    .zip(&self.left[n])
                    .map(|(a, w)| a - w * self.eigenvalues[n])
                    .collect();
                vec_norm(&r) / scale
            })
            .fold(0.0, f64::max)
    }

    /// `max_{m,n} |<m|n> - delta_mn|`.
    pub fn biorthonormality_error(&self) -> f64 {
        let n = self.dim();
        let mut worst: f64 = 0.0;
        for a in 0..n {
            for b in 0..n {
                let want = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((dot(&self.left[a], &self.right[b]) - want).norm());
            }
        }
        worst
    }
}

/// Eigen-decomposition of `M(x)`; see [`eigensystem_of`].
pub fn eigensystem_at(
    m: &MatrixFunction,
    x: f64,
    prev: Option<&EigenSystem>,
) -> Result<EigenSystem> {
    eigensystem_of(&m.at(x)?, x, prev)
}

/// Closed-form eigen-decomposition of a 2x2 or 3x3 matrix.
///
/// Without `prev` the branches are in canonical order (descending real part,
/// then descending imaginary part). With `prev` they are permuted to minimise
/// the total eigenvalue displacement from `prev`.
pub fn eigensystem_of(mat: &CMatrix, x: f64, prev: Option<&EigenSystem>) -> Result<EigenSystem> {
    let dim = mat.dim();
    let coeffs = mat.char_poly()?;
    let mut values: Vec<C64> = match dim {
        2 => roots::quadratic(coeffs[1], coeffs[0]).to_vec(),
        3 => roots::cubic(coeffs[2], coeffs[1], coeffs[0]).to_vec(),
        n => return Err(Error::UnsupportedDimension(n)),
    };
    let scale = values.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let gap = roots::min_gap(&values);
    if gap <= DEGENERACY_TOL * scale || !gap.is_finite() {
        return Err(Error::DegenerateSpectrum { x, gap });
    }
    match prev {
        Some(p) if p.dim() == dim => {
            let perm = roots::match_branches(&p.eigenvalues, &values);
            values = perm.iter().map(|&j| values[j]).collect();
        }
        _ => roots::canonical_sort(&mut values),
    }

    let mut right = Vec::with_capacity(dim);
    let mut left = Vec::with_capacity(dim);
    for &lambda in &values {
        let adj = mat.shifted(lambda).adjugate()?;
        let col = (0..dim)
            .max_by(|&a, &b| column_norm(&adj, a).total_cmp(&column_norm(&adj, b)))
            .unwrap_or(0);
        let row = (0..dim)
            .max_by(|&a, &b| row_norm(&adj, a).total_cmp(&row_norm(&adj, b)))
            .unwrap_or(0);
        let mut v: Vec<C64> = (0..dim).map(|r| adj[(r, col)]).collect();
        let w: Vec<C64> = (0..dim).map(|c| adj[(row, c)]).collect();

        let norm = vec_norm(&v);
        let pivot = v
            .iter()
            .position(|z| z.norm() > GAUGE_TOL * norm)
            .ok_or(Error::DegenerateSpectrum { x, gap })?;
        let p = v[pivot];
        v.iter_mut().for_each(|z| *z /= p);

        let overlap = dot(&w, &v);
        if overlap.norm() == 0.0 || !overlap.norm().is_finite() {
            return Err(Error::DegenerateSpectrum { x, gap });
        }
        right.push(v);
        left.push(w.into_iter().map(|z| z / overlap).collect());
    }
    Ok(EigenSystem {
        x,
        eigenvalues: values,
        right,
        left,
    })
}

fn column_norm(m: &CMatrix, c: usize) -> f64 {
    (0..m.dim()).map(|r| m[(r, c)].norm_sqr()).sum()
}

fn row_norm(m: &CMatrix, r: usize) -> f64 {
    (0..m.dim()).map(|c| m[(r, c)].norm_sqr()).sum()
}

/// Derivative couplings `tau[(n, l)] = <n(x)| d/dx |l(x)>`.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingMatrix {
    pub x: f64,
    pub entries: CMatrix,
}

impl CouplingMatrix {
    pub fn get(&self, n: usize, l: usize) -> C64 {
        self.entries[(n, l)]
    }
}

/// How derivative couplings are differenced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CouplingScheme {
    /// Plain central difference with step `h`, second order.
    Central,
    /// Richardson combination of steps `h` and `h/2`, fourth order.
    #[default]
    Richardson,
}

/// Central-difference couplings
/// `<n(x)| (|l(x+h)> - |l(x-h)>) / 2h`, neighbours branch-matched to `eig`.
pub fn coupling(m: &MatrixFunction, eig: &EigenSystem, step: f64) -> Result<CouplingMatrix> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "coupling step {step} must be positive"
        )));
    }
    let x = eig.x;
    let plus = eigensystem_at(m, x + step, Some(eig))?;
    let minus = eigensystem_at(m, x - step, Some(eig))?;
    let n = eig.dim();
    let mut entries = CMatrix::zeros(n);
    for a in 0..n {
        for l in 0..n {
            let diff: Vec<C64> = plus.right[l]
                .iter()
                .zip(&minus.right[l])
                .map(|(p, q)| (p - q) / (2.0 * step))
                .collect();
            entries[(a, l)] = dot(&eig.left[a], &diff);
        }
    }
    Ok(CouplingMatrix { x, entries })
}

/// Couplings with the requested differencing scheme.
pub fn coupling_with(
    m: &MatrixFunction,
    eig: &EigenSystem,
    step: f64,
    scheme: CouplingScheme,
) -> Result<CouplingMatrix> {
    match scheme {
        CouplingScheme::Central => coupling(m, eig, step),
        CouplingScheme::Richardson => {
            let coarse = coupling(m, eig, step)?;
            let fine = coupling(m, eig, 0.5 * step)?;
            let n = eig.dim();
            let mut entries = CMatrix::zeros(n);
            for a in 0..n {
                for b in 0..n {
                    entries[(a, b)] = (fine.get(a, b) * 4.0 - coarse.get(a, b)) / 3.0;
                }
            }
            Ok(CouplingMatrix { x: eig.x, entries })
        }
    }
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if epsilon > 0.0 && epsilon.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!(
            "epsilon {epsilon} must be positive"
        )))
    }
}

/// `S0` per grid point: `S0(x_i) = eps * int_{x_0}^{x_i} lambda_b ds`.
pub fn s0(lambda: &[C64], grid: &[f64], epsilon: f64, rule: Quadrature) -> Result<Vec<C64>> {
    check_epsilon(epsilon)?;
    Ok(cumulative(grid, lambda, rule)?
        .into_iter()
        .map(|v| v * epsilon)
        .collect())
}

/// `S1` per grid point from the diagonal couplings `tau_bb`:
/// `S1(x_i) = -int_{x_0}^{x_i} tau_bb ds`.
pub fn s1(tau_diag: &[C64], grid: &[f64], rule: Quadrature) -> Result<Vec<C64>> {
    Ok(cumulative(grid, tau_diag, rule)?
        .into_iter()
        .map(|v| -v)
        .collect())
}

fn check_gap(values: &[C64], branch: usize, other: usize, x: f64) -> Result<C64> {
    let d = values[other] - values[branch];
    let scale = values.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if d.norm() <= DEGENERACY_TOL * scale {
        return Err(Error::DegenerateSpectrum { x, gap: d.norm() });
    }
    Ok(d)
}

/// Integrand of `S2` at one point (without the `1/eps` factor).
fn s2_integrand(c: &CouplingMatrix, values: &[C64], branch: usize) -> Result<C64> {
    let mut acc = C64::new(0.0, 0.0);
    for m in 0..values.len() {
        if m == branch {
            continue;
        }
        let d = check_gap(values, branch, m, c.x)?;
        acc += c.get(branch, m) * c.get(m, branch) / d;
    }
    Ok(-acc)
}

fn check_branch(branch: usize, dim: usize) -> Result<()> {
    if branch >= dim {
        return Err(Error::InvalidBranch {
            branch,
            reason: "index exceeds the matrix dimension",
        });
    }
    Ok(())
}

/// `S2` per grid point:
/// `-(1/eps) int sum_{m != b} tau_bm tau_mb / (lambda_m - lambda_b) ds`.
pub fn s2(
    couplings: &[CouplingMatrix],
    eigenvalues: &[Vec<C64>],
    grid: &[f64],
    epsilon: f64,
    branch: usize,
    rule: Quadrature,
) -> Result<Vec<C64>> {
    check_epsilon(epsilon)?;
    if couplings.len() != grid.len() || eigenvalues.len() != grid.len() {
        return Err(Error::MalformedGrid(
            "couplings/eigenvalues do not match grid".into(),
        ));
    }
    let integrand = couplings
        .iter()
        .zip(eigenvalues)
        .map(|(c, v)| {
            check_branch(branch, v.len())?;
            s2_integrand(c, v, branch)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(cumulative(grid, &integrand, rule)?
        .into_iter()
        .map(|v| v / epsilon)
        .collect())
}

/// `f1(l) = (1/eps) tau_lb / (lambda_l - lambda_b)` in x-units.
pub fn f1(
    coupling: &CouplingMatrix,
    eigenvalues: &[C64],
    branch: usize,
    ell: usize,
    epsilon: f64,
) -> Result<C64> {
    check_epsilon(epsilon)?;
    check_branch(branch, eigenvalues.len())?;
    check_branch(ell, eigenvalues.len())?;
    if ell == branch {
        return Err(Error::InvalidBranch {
            branch: ell,
            reason: "f1 is defined only for l != dominant branch",
        });
    }
    let d = check_gap(eigenvalues, branch, ell, coupling.x)?;
    Ok(coupling.get(ell, branch) / d / epsilon)
}

/// Truncation order of the assembled wave function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Order {
    /// `c_b = exp(S0/eps)`.
    Zeroth,
    /// adds `S1`.
    First,
    /// adds `eps*S2` and the admixtures `c_l = eps f1(l) c_b`.
    Second,
}

impl TryFrom<u8> for Order {
    type Error = Error;
    fn try_from(v: u8) -> Result<Self> {
        match v {
            0 => Ok(Order::Zeroth),
            1 => Ok(Order::First),
            2 => Ok(Order::Second),
            _ => Err(Error::InvalidInput(format!("order {v} not in 0..=2"))),
        }
    }
}

/// Discretisation knobs for [`AdiabaticExpansion::compute`].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ExpansionOptions {
    pub quadrature: Quadrature,
    pub coupling: CouplingScheme,
    /// Coupling step; `None` uses the local grid spacing.
    pub step: Option<f64>,
}

impl ExpansionOptions {
    /// Trapezoidal integrals with plain central-difference couplings.
    pub fn second_order() -> Self {
        ExpansionOptions {
            quadrature: Quadrature::Trapezoid,
            coupling: CouplingScheme::Central,
            step: None,
        }
    }
}

/// Sampled expansion terms along a grid for one dominant branch.
#[derive(Debug, Clone)]
pub struct AdiabaticExpansion {
    pub grid: Vec<f64>,
    pub epsilon: f64,
    pub branch: usize,
    pub options: ExpansionOptions,
    pub eigensystems: Vec<EigenSystem>,
    pub couplings: Vec<CouplingMatrix>,
    pub s0: Vec<C64>,
    pub s1: Vec<C64>,
    pub s2: Vec<C64>,
    /// `f1[i][l]`; the dominant-branch entry is zero.
    pub f1: Vec<Vec<C64>>,
}

fn local_step(grid: &[f64], i: usize) -> f64 {
    let n = grid.len();
    match n {
        1 => 1e-4 * grid[0].abs().max(1.0),
        _ if i == 0 => grid[1] - grid[0],
        _ if i == n - 1 => grid[n - 1] - grid[n - 2],
        _ => 0.5 * (grid[i + 1] - grid[i - 1]),
    }
}

impl AdiabaticExpansion {
    /// Tracks the eigensystem along `grid` (canonical order at the first point,
    /// continuity afterwards) and evaluates every expansion term.
    pub fn compute(
        m: &MatrixFunction,
        grid: &[f64],
        epsilon: f64,
        branch: usize,
        options: ExpansionOptions,
    ) -> Result<Self> {
        validate_grid(grid)?;
        check_epsilon(epsilon)?;
        check_branch(branch, m.dim())?;

        let mut eigensystems: Vec<EigenSystem> = Vec::with_capacity(grid.len());
        for &x in grid {
            let e = eigensystem_at(m, x, eigensystems.last())?;
            eigensystems.push(e);
        }
        let couplings = eigensystems
            .iter()
            .enumerate()
            .map(|(i, e)| {
                let h = options.step.unwrap_or_else(|| local_step(grid, i));
                coupling_with(m, e, h, options.coupling)
            })
            .collect::<Result<Vec<_>>>()?;

        let lambda: Vec<C64> = eigensystems.iter().map(|e| e.eigenvalues[branch]).collect();
        let tau_diag: Vec<C64> = couplings.iter().map(|c| c.get(branch, branch)).collect();
        let values: Vec<Vec<C64>> = eigensystems.iter().map(|e| e.eigenvalues.clone()).collect();

        let s0 = s0(&lambda, grid, epsilon, options.quadrature)?;
        let s1 = s1(&tau_diag, grid, options.quadrature)?;
        let s2 = s2(
            &couplings,
            &values,
            grid,
            epsilon,
            branch,
            options.quadrature,
        )?;
        let f1 = couplings
            .iter()
            .zip(&values)
            .map(|(c, v)| {
                (0..v.len())
                    .map(|l| {
                        if l == branch {
                            Ok(C64::new(0.0, 0.0))
                        } else {
                            f1(c, v, branch, l, epsilon)
                        }
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;

        Ok(AdiabaticExpansion {
            grid: grid.to_vec(),
            epsilon,
            branch,
            options,
            eigensystems,
            couplings,
            s0,
            s1,
            s2,
            f1,
        })
    }

    /// Exponent `S0/eps + S1 + eps*S2` of the dominant coefficient at grid
    /// index `i`, truncated at `order`.
    pub fn exponent(&self, i: usize, order: Order) -> C64 {
        let mut e = self.s0[i] / self.epsilon;
        if order >= Order::First {
            e += self.s1[i];
        }
        if order >= Order::Second {
            e += self.s2[i] * self.epsilon;
        }
        e
    }

    /// Exponent `S0/eps + S1 + eps*S2` (truncated at `order`) at an arbitrary
    /// `x` in the grid span, integrated with the same local rule.
    pub fn exponent_at(&self, x: f64, order: Order) -> Result<C64> {
        let rule = self.options.quadrature;
        let lambda: Vec<C64> = self
            .eigensystems
            .iter()
            .map(|e| e.eigenvalues[self.branch])
            .collect();
        let running: Vec<C64> = self.s0.iter().map(|v| v / self.epsilon).collect();
        let mut e = cumulative_at(&self.grid, &lambda, &running, x, rule)?;
        if order >= Order::First {
            let tau: Vec<C64> = self
                .couplings
                .iter()
                .map(|c| -c.get(self.branch, self.branch))
                .collect();
            e += cumulative_at(&self.grid, &tau, &self.s1, x, rule)?;
        }
        if order >= Order::Second {
            let integrand = self
                .couplings
                .iter()
                .zip(&self.eigensystems)
                .map(|(c, es)| s2_integrand(c, &es.eigenvalues, self.branch))
                .collect::<Result<Vec<_>>>()?;
            let running: Vec<C64> = self.s2.iter().map(|v| v * self.epsilon).collect();
            e += cumulative_at(&self.grid, &integrand, &running, x, rule)?;
        }
        Ok(e)
    }

    /// Coefficients `c_n` at every grid point.
    pub fn coefficients(&self, order: Order) -> Vec<Vec<C64>> {
        (0..self.grid.len())
            .map(|i| {
                let cb = self.exponent(i, order).exp();
                (0..self.eigensystems[i].dim())
                    .map(|l| {
                        if l == self.branch {
                            cb
                        } else if order >= Order::Second {
                            self.f1[i][l] * self.epsilon * cb
                        } else {
                            C64::new(0.0, 0.0)
                        }
                    })
                    .collect()
            })
            .collect()
    }

    /// `y(x_i) = sum_n c_n(x_i) |n(x_i)>`.
    pub fn wavefunction(&self, order: Order) -> Vec<Vec<C64>> {
        self.coefficients(order)
            .iter()
            .zip(&self.eigensystems)
            .map(|(c, e)| {
                let dim = e.dim();
                (0..dim)
                    .map(|k| (0..dim).map(|n| c[n] * e.right[n][k]).sum())
                    .collect()
            })
            .collect()
    }
}

/// Adiabatic approximation of `dy/dx = M y` along `grid` for the dominant
/// `branch` (index in the canonical order at the first grid point).
pub fn assemble_wavefunction(
    m: &MatrixFunction,
    grid: &[f64],
    epsilon: f64,
    branch: usize,
    order: Order,
    options: ExpansionOptions,
) -> Result<Vec<Vec<C64>>> {
    Ok(AdiabaticExpansion::compute(m, grid, epsilon, branch, options)?.wavefunction(order))
}

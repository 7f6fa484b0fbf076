//! The one-dimensional stationary Schrodinger problem `psi'' = -k^2(x) psi`,
//! its first-order matrix reductions and the reference integrator.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::adiabatic::MatrixFunction;
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, C64, I};
use crate::ode::{self, Tolerance};
use crate::quadrature::validate_grid;

/// External potential `V(x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Potential {
    Constant {
        value: f64,
    },
    /// `a + b x`
    Linear {
        a: f64,
        b: f64,
    },
    /// `m omega^2 x^2 / 2`
    Harmonic {
        omega: f64,
    },
    /// `g x^4`
    Quartic {
        g: f64,
    },
    /// Natural cubic spline through the samples.
    Tabulated {
        x: Vec<f64>,
        v: Vec<f64>,
    },
}

impl Potential {
    pub fn validate(&self) -> Result<()> {
        let finite = |v: f64, what: &str| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidInput(format!(
                    "potential parameter {what} is not finite"
                )))
            }
        };
        match self {
            Potential::Constant { value } => finite(*value, "value"),
            Potential::Linear { a, b } => finite(*a, "a").and(finite(*b, "b")),
            Potential::Harmonic { omega } => finite(*omega, "omega"),
            Potential::Quartic { g } => finite(*g, "g"),
            Potential::Tabulated { x, v } => {
                if x.len() != v.len() || x.len() < 2 {
                    return Err(Error::InvalidInput(
                        "tabulated potential needs matching x/v arrays with at least 2 samples"
                            .into(),
                    ));
                }
                validate_grid(x).map_err(|_| {
                    Error::InvalidInput("tabulated x-values must be strictly increasing".into())
                })?;
                if v.iter().any(|s| !s.is_finite()) {
                    return Err(Error::InvalidInput(
                        "tabulated potential has non-finite values".into(),
                    ));
                }
                Ok(())
            }
        }
    }

    /// `V(x)`; `mass` enters only the harmonic form.
    pub fn value(&self, x: f64, mass: f64) -> f64 {
        match self {
            Potential::Constant { value } => *value,
            Potential::Linear { a, b } => a + b * x,
            Potential::Harmonic { omega } => 0.5 * mass * omega * omega * x * x,
            Potential::Quartic { g } => g * x.powi(4),
            Potential::Tabulated { x: xs, v } => Spline::new(xs, v).value(x),
        }
    }

    /// `V'(x)`, analytic for the built-in forms and the interpolant
    /// derivative for tabulated data.
    pub fn derivative(&self, x: f64, mass: f64) -> f64 {
        match self {
            Potential::Constant { .. } => 0.0,
            Potential::Linear { b, .. } => *b,
            Potential::Harmonic { omega } => mass * omega * omega * x,
            Potential::Quartic { g } => 4.0 * g * x.powi(3),
            Potential::Tabulated { x: xs, v } => Spline::new(xs, v).derivative(x),
        }
    }
}

/// Natural cubic spline; evaluated outside the table by extending the end
/// polynomials.
#[derive(Debug, Clone)]
struct Spline<'a> {
    x: &'a [f64],
    y: &'a [f64],
    m: Vec<f64>,
}

impl<'a> Spline<'a> {
    fn new(x: &'a [f64], y: &'a [f64]) -> Self {
        let n = x.len();
        let mut m = vec![0.0; n];
        if n > 2 {
            // tridiagonal system for interior second derivatives
            let mut diag = vec![0.0; n];
            let mut rhs = vec![0.0; n];
            let mut upper = vec![0.0; n];
            for i in 1..n - 1 {
                let h0 = x[i] - x[i - 1];
                let h1 = x[i + 1] - x[i];
                diag[i] = 2.0 * (h0 + h1);
                upper[i] = h1;
                rhs[i] = 6.0 * ((y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0);
                if i > 1 {
                    let w = h0 / diag[i - 1];
                    diag[i] -= w * upper[i - 1];
                    rhs[i] -= w * rhs[i - 1];
                }
            }
            for i in (1..n - 1).rev() {
                m[i] = (rhs[i] - upper[i] * m[i + 1]) / diag[i];
            }
        }
        Spline { x, y, m }
    }

    fn interval(&self, x: f64) -> usize {
        let n = self.x.len();
        self.x.partition_point(|&g| g <= x).clamp(1, n - 1) - 1
    }

    fn value(&self, x: f64) -> f64 {
        let i = self.interval(x);
        let (x0, x1) = (self.x[i], self.x[i + 1]);
        let h = x1 - x0;
        let a = (x1 - x) / h;
        let b = (x - x0) / h;
        a * self.y[i]
            + b * self.y[i + 1]
            + ((a.powi(3) - a) * self.m[i] + (b.powi(3) - b) * self.m[i + 1]) * h * h / 6.0
    }

    fn derivative(&self, x: f64) -> f64 {
        let i = self.interval(x);
        let (x0, x1) = (self.x[i], self.x[i + 1]);
        let h = x1 - x0;
        let a = (x1 - x) / h;
        let b = (x - x0) / h;
        (self.y[i + 1] - self.y[i]) / h
            + ((1.0 - 3.0 * a * a) * self.m[i] + (3.0 * b * b - 1.0) * self.m[i + 1]) * h / 6.0
    }
}

/// A particle of mass `m` and energy `E` in a potential `V`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicalSystem {
    #[serde(default = "one")]
    pub mass: f64,
    #[serde(default = "one")]
    pub hbar: f64,
    pub energy: f64,
    pub potential: Potential,
}

impl PhysicalSystem {
    pub fn new(mass: f64, hbar: f64, energy: f64, potential: Potential) -> Result<Self> {
        let sys = PhysicalSystem {
            mass,
            hbar,
            energy,
            potential,
        };
        sys.validate()?;
        Ok(sys)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mass > 0.0 && self.mass.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "mass {} must be positive",
                self.mass
            )));
        }
        if !(self.hbar > 0.0 && self.hbar.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "hbar {} must be positive",
                self.hbar
            )));
        }
        if !self.energy.is_finite() {
            return Err(Error::InvalidInput("energy must be finite".into()));
        }
        self.potential.validate()
    }

    pub fn potential_at(&self, x: f64) -> f64 {
        self.potential.value(x, self.mass)
    }

    /// `k^2 = 2m (E - V) / hbar^2`, negative under a barrier.
    pub fn k_squared(&self, x: f64) -> f64 {
        2.0 * self.mass * (self.energy - self.potential_at(x)) / (self.hbar * self.hbar)
    }

    /// Local wavenumber: real and non-negative where `E >= V`, otherwise
    /// `i * kappa` with `kappa > 0`.
    pub fn wavenumber(&self, x: f64) -> C64 {
        let k2 = self.k_squared(x);
        if k2 >= 0.0 {
            C64::new(k2.sqrt(), 0.0)
        } else {
            I * (-k2).sqrt()
        }
    }

    /// `k k' = d(k^2)/dx / 2 = -(m/hbar^2) V'(x)`, finite at turning points.
    pub fn kk_prime(&self, x: f64) -> f64 {
        -self.mass / (self.hbar * self.hbar) * self.potential.derivative(x, self.mass)
    }
}

fn one() -> f64 {
    1.0
}

/// Uniformly spaced coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub x_start: f64,
    pub x_end: f64,
    pub count: usize,
}

impl Grid {
    pub fn new(x_start: f64, x_end: f64, count: usize) -> Result<Self> {
        let g = Grid {
            x_start,
            x_end,
            count,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.x_start.is_finite() && self.x_end.is_finite()) || self.x_start >= self.x_end {
            return Err(Error::MalformedGrid(format!(
                "need finite x_start < x_end, got [{}, {}]",
                self.x_start, self.x_end
            )));
        }
        if self.count < 2 {
            return Err(Error::MalformedGrid(format!("count {} < 2", self.count)));
        }
        Ok(())
    }

    pub fn spacing(&self) -> f64 {
        (self.x_end - self.x_start) / (self.count - 1) as f64
    }

    /// Sample points; the last one is exactly `x_end`.
    pub fn points(&self) -> Vec<f64> {
        let h = self.spacing();
        (0..self.count)
            .map(|i| {
                if i + 1 == self.count {
                    self.x_end
                } else {
                    self.x_start + h * i as f64
                }
            })
            .collect()
    }
}

/// `(psi, psi', psi'')` at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateVector {
    pub y0: C64,
    pub y1: C64,
    pub y2: C64,
}

impl StateVector {
    pub fn new(y0: C64, y1: C64, y2: C64) -> Self {
        StateVector { y0, y1, y2 }
    }

    /// Value and slope; `psi''` set from the Schrodinger equation at `x`.
    pub fn from_schrodinger(sys: &PhysicalSystem, x: f64, psi: C64, dpsi: C64) -> Self {
        StateVector {
            y0: psi,
            y1: dpsi,
            y2: -psi * sys.k_squared(x),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.y0.norm().max(self.y1.norm()).max(self.y2.norm())
    }
}

/// `W = a.psi b.psi' - a.psi' b.psi`.
pub fn wronskian(a: &StateVector, b: &StateVector) -> C64 {
    a.y0 * b.y1 - a.y1 * b.y0
}

/// Gauge parameter of the 3x3 reduction, constant or position dependent.
#[derive(Clone)]
pub enum Alpha {
    Constant(f64),
    /// `alpha(x)` with an optional analytic derivative; without one the
    /// derivative is taken by central differences.
    Function {
        value: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
        derivative: Option<Arc<dyn Fn(f64) -> f64 + Send + Sync>>,
    },
}

impl fmt::Debug for Alpha {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Alpha::Constant(a) => write!(f, "Alpha::Constant({a})"),
            Alpha::Function { derivative, .. } => write!(
                f,
                "Alpha::Function {{ analytic_derivative: {} }}",
                derivative.is_some()
            ),
        }
    }
}

impl Default for Alpha {
    fn default() -> Self {
        Alpha::Constant(-0.5)
    }
}

impl Alpha {
    pub fn function<F: Fn(f64) -> f64 + Send + Sync + 'static>(f: F) -> Self {
        Alpha::Function {
            value: Arc::new(f),
            derivative: None,
        }
    }

    pub fn with_derivative<F, D>(f: F, d: D) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
        D: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Alpha::Function {
            value: Arc::new(f),
            derivative: Some(Arc::new(d)),
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        match self {
            Alpha::Constant(a) => *a,
            Alpha::Function { value, .. } => value(x),
        }
    }

    /// `alpha'(x)`; `step` is used only when no analytic derivative exists.
    pub fn derivative(&self, x: f64, step: f64) -> f64 {
        match self {
            Alpha::Constant(_) => 0.0,
            Alpha::Function {
                derivative: Some(d),
                ..
            } => d(x),
            Alpha::Function { value, .. } => (value(x + step) - value(x - step)) / (2.0 * step),
        }
    }

    pub fn nonzero_at(&self, x: f64) -> Result<f64> {
        let a = self.value(x);
        if a == 0.0 || !a.is_finite() {
            Err(Error::AlphaZero { x })
        } else {
            Ok(a)
        }
    }
}

/// `[[0, 1], [-k^2, 0]]` acting on `(psi, psi')`.
pub fn matrix2(sys: &PhysicalSystem) -> MatrixFunction {
    let sys = sys.clone();
    MatrixFunction::new(2, move |x| {
        CMatrix::from_real_rows(&[[0.0, 1.0], [-sys.k_squared(x), 0.0]])
    })
    .expect("dimension 2 is valid")
}

/// `[[0, 1, 0], [(alpha-1) k^2, 0, alpha], [-2kk', -k^2, 0]]` acting on
/// `(psi, psi', psi'')`. The `2kk'` entry uses [`PhysicalSystem::kk_prime`].
pub fn matrix3(sys: &PhysicalSystem, alpha: &Alpha) -> Result<MatrixFunction> {
    if let Alpha::Constant(a) = alpha {
        if *a == 0.0 {
            return Err(Error::AlphaZero { x: f64::NAN });
        }
    }
    let sys = sys.clone();
    let alpha = alpha.clone();
    MatrixFunction::new(3, move |x| {
        let k2 = sys.k_squared(x);
        let a = alpha.value(x);
        CMatrix::from_real_rows(&[
            [0.0, 1.0, 0.0],
            [(a - 1.0) * k2, 0.0, a],
            [-2.0 * sys.kk_prime(x), -k2, 0.0],
        ])
    })
}

/// Reference solution of `psi'' = -k^2 psi` sampled on `points` (monotone,
/// either direction), started from `init` at `points[0]`. The `y2` slot of the
/// result is filled as `-k^2 y0`; `init.y2` is ignored.
pub fn integrate_schrodinger(
    sys: &PhysicalSystem,
    points: &[f64],
    init: StateVector,
    tol: Tolerance,
) -> Result<Vec<StateVector>> {
    sys.validate()?;
    let f = |x: f64, y: &ode::State<2>| [y[1], -y[0] * sys.k_squared(x)];
    let sol = ode::integrate(f, points, [init.y0, init.y1], tol)?;
    Ok(points
        .iter()
        .zip(sol)
        .map(|(&x, y)| StateVector::from_schrodinger(sys, x, y[0], y[1]))
        .collect())
}

/// Oracle solution on an increasing grid from `init` at `grid[0]`.
pub fn exact_solve(
    sys: &PhysicalSystem,
    grid: &[f64],
    init: StateVector,
) -> Result<Vec<StateVector>> {
    validate_grid(grid)?;
    integrate_schrodinger(sys, grid, init, Tolerance::default())
}

/// Integrates the full 3x3 system `y' = M3(x) y` without imposing the
/// Schrodinger constraint on `init`.
pub fn solve_matrix3(
    sys: &PhysicalSystem,
    alpha: &Alpha,
    points: &[f64],
    init: StateVector,
    tol: Tolerance,
) -> Result<Vec<StateVector>> {
    sys.validate()?;
    for &x in points {
        alpha.nonzero_at(x)?;
    }
    let f = |x: f64, y: &ode::State<3>| {
        let k2 = sys.k_squared(x);
        let a = alpha.value(x);
        [
            y[1],
            y[0] * ((a - 1.0) * k2) + y[2] * a,
            y[0] * (-2.0 * sys.kk_prime(x)) - y[1] * k2,
        ]
    };
    let sol = ode::integrate(f, points, [init.y0, init.y1, init.y2], tol)?;
    Ok(sol
        .into_iter()
        .map(|y| StateVector::new(y[0], y[1], y[2]))
        .collect())
}

/// `y2 + k^2(x) y0`; zero exactly for genuine Schrodinger states.
pub fn constraint_residual(s: &StateVector, sys: &PhysicalSystem, x: f64) -> C64 {
    s.y2 + s.y0 * sys.k_squared(x)
}

/// The invariant of the 3x3 system, `Q = (y0'' + k^2 y0) / alpha`, where
/// `y0''` is the second row of the system, `alpha y2 - (1 - alpha) k^2 y0`.
pub fn conserved_quantity(
    s: &StateVector,
    sys: &PhysicalSystem,
    alpha: &Alpha,
    x: f64,
) -> Result<C64> {
    let a = alpha.nonzero_at(x)?;
    let k2 = sys.k_squared(x);
    let y0pp = s.y2 * a - s.y0 * ((1.0 - a) * k2);
    Ok((y0pp + s.y0 * k2) / a)
}

/// `max_i |Q(x_i) - Q(x_0)|` along a trajectory of the 3x3 system.
pub fn conserved_quantity_check(
    trajectory: &[StateVector],
    grid: &[f64],
    sys: &PhysicalSystem,
    alpha: &Alpha,
) -> Result<f64> {
    if trajectory.len() != grid.len() || grid.is_empty() {
        return Err(Error::MalformedGrid(
            "trajectory does not match grid".into(),
        ));
    }
    let q0 = conserved_quantity(&trajectory[0], sys, alpha, grid[0])?;
    let mut worst: f64 = 0.0;
    for (s, &x) in trajectory.iter().zip(grid) {
        worst = worst.max((conserved_quantity(s, sys, alpha, x)? - q0).norm());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn free(k: f64) -> PhysicalSystem {
        PhysicalSystem::new(1.0, 1.0, 0.5 * k * k, Potential::Constant { value: 0.0 }).unwrap()
    }

    #[test]
    fn wavenumber_branches() {
        assert_eq!(free(2.0).wavenumber(0.3), C64::new(2.0, 0.0));
        let tp = PhysicalSystem::new(1.0, 1.0, 1.0, Potential::Linear { a: 0.0, b: 1.0 }).unwrap();
        assert_eq!(tp.wavenumber(1.0), C64::new(0.0, 0.0));
        let barrier =
            PhysicalSystem::new(1.0, 1.0, 0.0, Potential::Constant { value: 4.5 }).unwrap();
        assert!((barrier.wavenumber(0.0) - C64::new(0.0, 3.0)).norm() < 1e-15);
    }

    #[test]
    fn kk_prime_values() {
        assert_eq!(free(1.0).kk_prime(3.0), 0.0);
        let lin = PhysicalSystem::new(1.0, 1.0, 0.0, Potential::Linear { a: 0.0, b: 1.0 }).unwrap();
        assert_eq!(lin.kk_prime(-2.0), -1.0);
        let ho = PhysicalSystem::new(1.0, 1.0, 0.5, Potential::Harmonic { omega: 1.0 }).unwrap();
        assert_eq!(ho.kk_prime(1.0), -1.0);
    }

    #[test]
    fn kk_prime_matches_derivative_of_k_squared() {
        let sys = PhysicalSystem::new(1.3, 0.7, 2.0, Potential::Quartic { g: 0.2 }).unwrap();
        for &x in &[-1.5, -0.2, 0.0, 0.9, 2.1] {
            let h = 1e-5;
            let fd = 0.5 * (sys.k_squared(x + h) - sys.k_squared(x - h)) / (2.0 * h);
            assert!((fd - sys.kk_prime(x)).abs() < 1e-6 * (1.0 + fd.abs()));
        }
    }

    #[test]
    fn matrix_entries_by_substitution() {
        let sys = free(2.0);
        let m2 = matrix2(&sys).at(0.0).unwrap();
        assert_eq!(m2, CMatrix::from_real_rows(&[[0.0, 1.0], [-4.0, 0.0]]));
        let m3 = matrix3(&free(1.0), &Alpha::Constant(-0.5))
            .unwrap()
            .at(0.0)
            .unwrap();
        assert_eq!(
            m3,
            CMatrix::from_real_rows(&[[0.0, 1.0, 0.0], [-1.5, 0.0, -0.5], [0.0, -1.0, 0.0]])
        );
        // alpha = 1: row 2 becomes (0, 0, 1)
        let m3 = matrix3(&free(1.0), &Alpha::Constant(1.0))
            .unwrap()
            .at(0.0)
            .unwrap();
        assert_eq!(m3[(1, 0)], C64::new(0.0, 0.0));
        assert_eq!(m3[(1, 2)], C64::new(1.0, 0.0));
        assert!(matches!(
            matrix3(&sys, &Alpha::Constant(0.0)),
            Err(Error::AlphaZero { .. })
        ));
    }

    #[test]
    fn matrix3_char_poly_is_the_cubic() {
        let sys = PhysicalSystem::new(1.0, 1.0, 3.0, Potential::Harmonic { omega: 1.0 }).unwrap();
        for alpha in [-1.0, -0.5, 0.5] {
            let m = matrix3(&sys, &Alpha::Constant(alpha)).unwrap();
            for &x in &[-1.2, 0.4, 2.9] {
                let p = m.at(x).unwrap().char_poly().unwrap();
                assert!((p[0].re - 2.0 * alpha * sys.kk_prime(x)).abs() < 1e-13);
                assert!((p[1].re - sys.k_squared(x)).abs() < 1e-13);
                assert!(p[2].norm() < 1e-15);
            }
        }
    }

    #[test]
    fn spline_reproduces_cubic_data_interior() {
        // natural spline is exact on straight lines
        let xs: Vec<f64> = (0..11).map(|i| i as f64 * 0.5).collect();
        let vs: Vec<f64> = xs.iter().map(|x| 2.0 - 0.5 * x).collect();
        let p = Potential::Tabulated { x: xs, v: vs };
        p.validate().unwrap();
        assert!((p.value(1.3, 1.0) - (2.0 - 0.65)).abs() < 1e-14);
        assert!((p.derivative(3.7, 1.0) + 0.5).abs() < 1e-14);
    }

    #[test]
    fn spline_derivative_consistent_with_value() {
        let xs: Vec<f64> = (0..21).map(|i| -2.0 + i as f64 * 0.2).collect();
        let vs: Vec<f64> = xs.iter().map(|x| x * x).collect();
        let p = Potential::Tabulated { x: xs, v: vs };
        for &x in &[-1.55, -0.3, 0.05, 1.71] {
            let h = 1e-6;
            let fd = (p.value(x + h, 1.0) - p.value(x - h, 1.0)) / (2.0 * h);
            assert!((fd - p.derivative(x, 1.0)).abs() < 1e-6);
            assert!((p.value(x, 1.0) - x * x).abs() < 5e-3);
        }
    }

    #[test]
    fn tabulated_requires_increasing_x() {
        let p = Potential::Tabulated {
            x: vec![0.0, 1.0, 0.5],
            v: vec![0.0, 1.0, 2.0],
        };
        assert!(p.validate().is_err());
    }

    #[test]
    fn invalid_system_parameters() {
        assert!(PhysicalSystem::new(0.0, 1.0, 1.0, Potential::Constant { value: 0.0 }).is_err());
        assert!(PhysicalSystem::new(1.0, -1.0, 1.0, Potential::Constant { value: 0.0 }).is_err());
        assert!(Grid::new(1.0, 0.0, 10).is_err());
        assert!(Grid::new(0.0, 1.0, 1).is_err());
    }

    #[test]
    fn grid_points_hit_both_ends() {
        let g = Grid::new(-4.0, 4.0, 4001).unwrap().points();
        assert_eq!(g[0], -4.0);
        assert_eq!(g[4000], 4.0);
        assert!((g[2000]).abs() < 1e-15);
    }

    #[test]
    fn constraint_residual_arithmetic() {
        let s = StateVector::new(C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0));
        assert_eq!(constraint_residual(&s, &free(2.0), 0.0), C64::new(4.0, 0.0));
    }
}

//! Ordinary WKB wave functions `k^{-1/2} exp(+-i int k)`, their
//! reconstruction from the adiabatic expansion of the 2x2 system, and error
//! reports against the reference solver.

use crate::adiabatic::{AdiabaticExpansion, ExpansionOptions, Order};
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, C64, I};
use crate::quadrature::{cumulative, cumulative_at, validate_grid, Quadrature};
use crate::schrodinger::{matrix2, PhysicalSystem, StateVector};

/// Points with `|k| < K_FLOOR * max|k|` are treated as turning points.
pub const K_FLOOR: f64 = 1e-6;

const SCAN_INTERVALS: usize = 1000;
const BISECT_TOL: f64 = 1e-12;

/// Direction of the phase, `exp(+i int k)` or `exp(-i int k)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

/// Sampled WKB wave function.
#[derive(Debug, Clone, PartialEq)]
pub struct WkbSolution {
    pub grid: Vec<f64>,
    pub sign: Sign,
    pub x_ref: f64,
    /// `psi` per point; singular points hold a non-finite marker.
    pub values: Vec<C64>,
    pub singular_mask: Vec<bool>,
}

impl WkbSolution {
    pub fn singular_count(&self) -> usize {
        self.singular_mask.iter().filter(|&&s| s).count()
    }

    /// Largest `|psi|`, infinite if any point is singular.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

/// Roots of `E - V(x)` in `[a, b]`, sorted.
pub fn turning_points(sys: &PhysicalSystem, a: f64, b: f64) -> Vec<f64> {
    if !(a < b) {
        return Vec::new();
    }
    let f = |x: f64| sys.energy - sys.potential_at(x);
    let h = (b - a) / SCAN_INTERVALS as f64;
    let mut found: Vec<f64> = Vec::new();
    let push = |x: f64, found: &mut Vec<f64>| {
        if found
            .last()
            .map_or(true, |&l| (x - l).abs() > 10.0 * BISECT_TOL)
        {
            found.push(x);
        }
    };
    let mut x0 = a;
    let mut f0 = f(x0);
    for i in 1..=SCAN_INTERVALS {
        let x1 = if i == SCAN_INTERVALS {
            b
        } else {
            a + h * i as f64
        };
        let f1 = f(x1);
        if f0 == 0.0 {
            push(x0, &mut found);
        } else if f1 != 0.0 && f0.signum() != f1.signum() {
            let (mut lo, mut hi, mut flo) = (x0, x1, f0);
            while hi - lo > BISECT_TOL {
                let mid = 0.5 * (lo + hi);
                let fm = f(mid);
                if fm == 0.0 {
                    lo = mid;
                    hi = mid;
                    break;
                }
                if fm.signum() == flo.signum() {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
            }
            push(0.5 * (lo + hi), &mut found);
        }
        x0 = x1;
        f0 = f1;
    }
    if f0 == 0.0 {
        push(x0, &mut found);
    }
    found
}

fn k_floor(ks: &[C64]) -> f64 {
    K_FLOOR * ks.iter().map(|k| k.norm()).fold(0.0, f64::max)
}

fn check_x_ref(grid: &[f64], x_ref: f64) -> Result<()> {
    let (a, b) = (grid[0], grid[grid.len() - 1]);
    if !(a..=b).contains(&x_ref) {
        return Err(Error::InvalidInput(format!(
            "x_ref = {x_ref} outside grid span [{a}, {b}]"
        )));
    }
    Ok(())
}

/// Closed-form `k^{-1/2} exp(s i int_{x_ref}^x k ds)` using the default
/// quadrature for the phase.
pub fn wkb_wavefunction(
    sys: &PhysicalSystem,
    grid: &[f64],
    sign: Sign,
    x_ref: f64,
) -> Result<WkbSolution> {
    wkb_wavefunction_with(sys, grid, sign, x_ref, Quadrature::default())
}

pub fn wkb_wavefunction_with(
    sys: &PhysicalSystem,
    grid: &[f64],
    sign: Sign,
    x_ref: f64,
    rule: Quadrature,
) -> Result<WkbSolution> {
    validate_grid(grid)?;
    sys.validate()?;
    check_x_ref(grid, x_ref)?;
    let ks: Vec<C64> = grid.iter().map(|&x| sys.wavenumber(x)).collect();
    let floor = k_floor(&ks);
    let singular_mask: Vec<bool> = ks
        .iter()
        .map(|k| k.norm() < floor || k.norm() == 0.0)
        .collect();
    if singular_mask.iter().all(|&s| s) {
        return Err(Error::AllSingular);
    }
    let phase = cumulative(grid, &ks, rule)?;
    let phase_ref = cumulative_at(grid, &ks, &phase, x_ref, rule)?;
    let s = sign.value();
    let values = ks
        .iter()
        .zip(&phase)
        .zip(&singular_mask)
        .map(|((k, p), &sing)| {
            if sing {
                C64::new(f64::INFINITY, 0.0)
            } else {
                (I * s * (p - phase_ref)).exp() / k.sqrt()
            }
        })
        .collect();
    Ok(WkbSolution {
        grid: grid.to_vec(),
        sign,
        x_ref,
        values,
        singular_mask,
    })
}

/// WKB wave function rebuilt from the first-order adiabatic expansion of
/// `[[0, 1], [-k^2, 0]]` on the branch `lambda = s i k`, scaled so that
/// `psi(x_ref) = k(x_ref)^{-1/2}`.
pub fn wkb_via_adiabatic(
    sys: &PhysicalSystem,
    grid: &[f64],
    sign: Sign,
    x_ref: f64,
) -> Result<WkbSolution> {
    wkb_via_adiabatic_with(sys, grid, sign, x_ref, ExpansionOptions::default())
}

pub fn wkb_via_adiabatic_with(
    sys: &PhysicalSystem,
    grid: &[f64],
    sign: Sign,
    x_ref: f64,
    options: ExpansionOptions,
) -> Result<WkbSolution> {
    adiabatic_wavefunction(sys, grid, sign, x_ref, 1.0, Order::First, options)
}

/// First component of the adiabatic expansion of the 2x2 system on the
/// branch `s i k`, truncated at `order`. The dominant coefficient is scaled
/// to `k(x_ref)^{-1/2}` at `x_ref`; at second order the admixture of the
/// other branch is added on top.
pub fn adiabatic_wavefunction(
    sys: &PhysicalSystem,
    grid: &[f64],
    sign: Sign,
    x_ref: f64,
    epsilon: f64,
    order: Order,
    options: ExpansionOptions,
) -> Result<WkbSolution> {
    validate_grid(grid)?;
    sys.validate()?;
    check_x_ref(grid, x_ref)?;
    let m = matrix2(sys);
    let target = I * sys.wavenumber(grid[0]) * sign.value();
    let first = crate::adiabatic::eigensystem_at(&m, grid[0], None)?;
    let branch = (0..2)
        .min_by(|&a, &b| {
            (first.eigenvalues[a] - target)
                .norm()
                .total_cmp(&(first.eigenvalues[b] - target).norm())
        })
        .unwrap_or(0);
    let exp = AdiabaticExpansion::compute(&m, grid, epsilon, branch, options)?;
    let e_ref = exp.exponent_at(x_ref, order)?;
    let amp_ref = C64::new(1.0, 0.0) / sys.wavenumber(x_ref).sqrt();
    let values = (0..grid.len())
        .map(|i| {
            let es = &exp.eigensystems[i];
            let mut comp = es.right[branch][0];
            if order >= Order::Second {
                for l in (0..es.dim()).filter(|&l| l != branch) {
                    comp += exp.f1[i][l] * epsilon * es.right[l][0];
                }
            }
            (exp.exponent(i, order) - e_ref).exp() * comp * amp_ref
        })
        .collect();
    Ok(WkbSolution {
        grid: grid.to_vec(),
        sign,
        x_ref,
        values,
        singular_mask: vec![false; grid.len()],
    })
}

/// `max_i |a_i - b_i| / |b_i|` over points where both are finite.
pub fn max_relative_deviation(a: &[C64], b: &[C64]) -> f64 {
    a.iter()
        .zip(b)
        .filter(|(x, y)| x.is_finite() && y.is_finite() && y.norm() > 0.0)
        .map(|(x, y)| (x - y).norm() / y.norm())
        .fold(0.0, f64::max)
}

/// `c_+ psi_+ + c_- psi_-` matched to a value and slope at `x_ref`.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchedWkb {
    pub x_ref: f64,
    pub coefficients: [C64; 2],
    pub values: Vec<C64>,
    pub singular_mask: Vec<bool>,
}

/// Fits both WKB branches to `(psi, psi')` at `x_ref` using
/// `psi_s' = (s i k - k k' / (2 k^2)) psi_s`.
pub fn match_two_branch(
    sys: &PhysicalSystem,
    grid: &[f64],
    x_ref: f64,
    psi: C64,
    dpsi: C64,
) -> Result<MatchedWkb> {
    let plus = wkb_wavefunction(sys, grid, Sign::Plus, x_ref)?;
    let minus = wkb_wavefunction(sys, grid, Sign::Minus, x_ref)?;
    let k = sys.wavenumber(x_ref);
    if k.norm() < k_floor(&grid.iter().map(|&x| sys.wavenumber(x)).collect::<Vec<_>>()) {
        return Err(Error::InvalidInput(format!(
            "x_ref = {x_ref} is a turning point"
        )));
    }
    let amp = C64::new(1.0, 0.0) / k.sqrt();
    let drift = -sys.kk_prime(x_ref) / (k * k * 2.0);
    let a = CMatrix::from_rows(&[[amp, amp], [(I * k + drift) * amp, (-I * k + drift) * amp]]);
    let cond = a.condition();
    let c = crate::linalg::solve(&a, &[psi, dpsi])
        .filter(|_| cond.is_finite() && cond <= 1e12)
        .ok_or(Error::SingularCombination { cond })?;
    let values = plus
        .values
        .iter()
        .zip(&minus.values)
        .zip(&plus.singular_mask)
        .map(|((p, m), &sing)| {
            if sing {
                C64::new(f64::INFINITY, 0.0)
            } else {
                c[0] * p + c[1] * m
            }
        })
        .collect();
    Ok(MatchedWkb {
        x_ref,
        coefficients: [c[0], c[1]],
        values,
        singular_mask: plus.singular_mask,
    })
}

/// Comparison of matched two-branch WKB against the reference solution.
#[derive(Debug, Clone, PartialEq)]
pub struct WkbErrorReport {
    pub turning_points: Vec<f64>,
    /// `max|psi_wkb - psi_ref| / max|psi_ref|` over points farther than the
    /// exclusion radius from every turning point.
    pub linf_relative: f64,
    /// `sqrt(sum|psi_wkb - psi_ref|^2 / sum|psi_ref|^2)` over the same points.
    pub l2_relative: f64,
    pub compared_points: usize,
    /// Largest `|psi_wkb|` inside the excluded zone, which also holds every
    /// singular point (NaN if the zone is empty).
    pub excluded_max_abs: f64,
    /// Largest `|psi_wkb|` over the whole grid, infinite at singular points.
    pub wkb_max_abs: f64,
    /// Same as `wkb_max_abs` but ignoring singular points.
    pub wkb_max_abs_finite: f64,
    pub singular_points: usize,
    pub oracle_max_abs: f64,
    pub matched: MatchedWkb,
}

/// Matches two-branch WKB to `oracle` at `x_ref` and measures the error away
/// from turning points. `oracle` must be sampled on `grid`.
pub fn wkb_error_report(
    sys: &PhysicalSystem,
    grid: &[f64],
    oracle: &[StateVector],
    x_ref: f64,
    exclusion_radius: f64,
) -> Result<WkbErrorReport> {
    validate_grid(grid)?;
    if oracle.len() != grid.len() {
        return Err(Error::MalformedGrid("oracle does not match grid".into()));
    }
    if !(exclusion_radius >= 0.0) {
        return Err(Error::InvalidInput(
            "exclusion radius must be non-negative".into(),
        ));
    }
    // oracle value and slope at x_ref, by re-integrating from the nearest node
    let j = nearest_index(grid, x_ref);
    let at_ref = crate::schrodinger::integrate_schrodinger(
        sys,
        &if grid[j] == x_ref {
            vec![x_ref]
        } else {
            vec![grid[j], x_ref]
        },
        oracle[j],
        Default::default(),
    )?;
    let r = at_ref[at_ref.len() - 1];
    let matched = match_two_branch(sys, grid, x_ref, r.y0, r.y1)?;

    let tps = turning_points(sys, grid[0], grid[grid.len() - 1]);
    let near = |x: f64| tps.iter().any(|t| (x - t).abs() <= exclusion_radius);
    let mut diff_max: f64 = 0.0;
    let mut ref_max: f64 = 0.0;
    let mut diff_sq = 0.0;
    let mut ref_sq = 0.0;
    let mut compared = 0;
    let mut excluded_max = f64::NAN;
    for (((&x, w), o), &sing) in grid
        .iter()
        .zip(&matched.values)
        .zip(oracle)
        .zip(&matched.singular_mask)
    {
        if near(x) || sing {
            excluded_max = if excluded_max.is_nan() {
                w.norm()
            } else {
                excluded_max.max(w.norm())
            };
            continue;
        }
        if !w.is_finite() {
            continue;
        }
        let d = (w - o.y0).norm();
        diff_max = diff_max.max(d);
        ref_max = ref_max.max(o.y0.norm());
        diff_sq += d * d;
        ref_sq += o.y0.norm_sqr();
        compared += 1;
    }
    let wkb_max_abs = matched.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let wkb_max_abs_finite = matched
        .values
        .iter()
        .filter(|v| v.is_finite())
        .map(|v| v.norm())
        .fold(0.0, f64::max);
    Ok(WkbErrorReport {
        turning_points: tps,
        linf_relative: if compared > 0 {
            diff_max / ref_max
        } else {
            f64::NAN
        },
        l2_relative: if compared > 0 {
            (diff_sq / ref_sq).sqrt()
        } else {
            f64::NAN
        },
        compared_points: compared,
        excluded_max_abs: excluded_max,
        wkb_max_abs,
        wkb_max_abs_finite,
        singular_points: matched.singular_mask.iter().filter(|&&s| s).count(),
        oracle_max_abs: oracle.iter().map(|s| s.y0.norm()).fold(0.0, f64::max),
        matched,
    })
}

pub(crate) fn nearest_index(grid: &[f64], x: f64) -> usize {
    (0..grid.len())
        .min_by(|&a, &b| (grid[a] - x).abs().total_cmp(&(grid[b] - x).abs()))
        .unwrap_or(0)
}

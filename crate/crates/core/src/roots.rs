//! Closed-form roots of monic quadratics and cubics.
//!
//! Both general complex-coefficient Cardano and a real-coefficient fast path
//! for the depressed cubic `l^3 + p l + q` are provided. Roots are polished
//! with Newton steps that are kept only when they reduce the residual.

use std::cmp::Ordering;
use std::f64::consts::PI;

use crate::linalg::C64;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Evaluates the monic polynomial `z^n + a_{n-1} z^{n-1} + ... + a_0`.
pub fn eval_monic(coeffs: &[C64], z: C64) -> C64 {
    coeffs
        .iter()
        .rev()
        .fold(C64::new(1.0, 0.0), |acc, &a| acc * z + a)
}

fn eval_monic_derivative(coeffs: &[C64], z: C64) -> C64 {
    let n = coeffs.len();
    let mut acc = C64::new(n as f64, 0.0);
    for k in (1..n).rev() {
        acc = acc * z + coeffs[k] * k as f64;
    }
    acc
}

fn polish(coeffs: &[C64], mut z: C64) -> C64 {
    let mut res = eval_monic(coeffs, z).norm();
    for _ in 0..3 {
        if res == 0.0 {
            break;
        }
        let d = eval_monic_derivative(coeffs, z);
        if d.norm() == 0.0 {
            break;
        }
        let cand = z - eval_monic(coeffs, z) / d;
        let cres = eval_monic(coeffs, cand).norm();
        if cres.is_finite() && cres < res {
            z = cand;
            res = cres;
        } else {
            break;
        }
    }
    z
}

/// Roots of `z^2 + b z + c`.
pub fn quadratic(b: C64, c: C64) -> [C64; 2] {
    let disc = (b * b - c * 4.0).sqrt();
    // pick the sign that avoids cancellation
    let q1 = -(b + disc) * 0.5;
    let q2 = -(b - disc) * 0.5;
    let q = if q1.norm() >= q2.norm() { q1 } else { q2 };
    if q.norm() == 0.0 {
        return [ZERO, ZERO];
    }
    [q, c / q]
}

fn principal_cbrt(z: C64) -> C64 {
    if z.norm() == 0.0 {
        return ZERO;
    }
    C64::from_polar(z.norm().cbrt(), z.arg() / 3.0)
}

/// Roots of `z^3 + a2 z^2 + a1 z + a0` with complex coefficients.
pub fn cubic(a2: C64, a1: C64, a0: C64) -> [C64; 3] {
    let shift = a2 / 3.0;
    let p = a1 - a2 * a2 / 3.0;
    let q = a2 * a2 * a2 * (2.0 / 27.0) - a2 * a1 / 3.0 + a0;
    let t = depressed_complex(p, q);
    let coeffs = [a0, a1, a2];
    [
        polish(&coeffs, t[0] - shift),
        polish(&coeffs, t[1] - shift),
        polish(&coeffs, t[2] - shift),
    ]
}

fn depressed_complex(p: C64, q: C64) -> [C64; 3] {
    let half_q = q * 0.5;
    let disc = (half_q * half_q + p * p * p / 27.0).sqrt();
    let w1 = -half_q + disc;
    let w2 = -half_q - disc;
    let w = if w1.norm() >= w2.norm() { w1 } else { w2 };
    let u = principal_cbrt(w);
    if u.norm() == 0.0 {
        return [ZERO, ZERO, ZERO];
    }
    let omega = C64::new(-0.5, 3f64.sqrt() / 2.0);
    let omega2 = omega.conj();
    let v = |u: C64| -p / (u * 3.0);
    let u1 = u * omega;
    let u2 = u * omega2;
    [u + v(u), u1 + v(u1), u2 + v(u2)]
}

/// Roots of the real depressed cubic `z^3 + p z + q`.
///
/// One real root plus a conjugate pair when the discriminant is negative,
/// three real roots (trigonometric form) otherwise.
pub fn depressed_real(p: f64, q: f64) -> [C64; 3] {
    let coeffs = [C64::new(q, 0.0), C64::new(p, 0.0), ZERO];
    if p == 0.0 && q == 0.0 {
        return [ZERO; 3];
    }
    let d = (q * 0.5).powi(2) + (p / 3.0).powi(3);
    let raw = if d > 0.0 {
        let s = d.sqrt();
        // same-sign combination avoids cancellation
        let w = -0.5 * q - s.copysign(q);
        let u = w.cbrt();
        let v = if u != 0.0 { -p / (3.0 * u) } else { 0.0 };
        let real = u + v;
        let re = -0.5 * real;
        let im = 0.5 * 3f64.sqrt() * (u - v);
        [C64::new(real, 0.0), C64::new(re, im), C64::new(re, -im)]
    } else {
        // p < 0 here
        let m = 2.0 * (-p / 3.0).sqrt();
        let arg = (3.0 * q / (p * m)).clamp(-1.0, 1.0);
        let theta = arg.acos() / 3.0;
        [
            C64::new(m * theta.cos(), 0.0),
            C64::new(m * (theta - 2.0 * PI / 3.0).cos(), 0.0),
            C64::new(m * (theta - 4.0 * PI / 3.0).cos(), 0.0),
        ]
    };
    raw.map(|z| {
        let z = polish(&coeffs, z);
        // real-coefficient roots that started real stay real
        if d <= 0.0 {
            C64::new(z.re, 0.0)
        } else {
            z
        }
    })
}

/// Lexicographic order: descending real part, then descending imaginary part.
///
/// Real parts within `1e-9` of the set's scale are treated as tied so that
/// rounding noise cannot reorder a conjugate pair.
pub fn canonical_sort(roots: &mut [C64]) {
    let scale = roots
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
        .max(1e-300);
    let tol = 1e-9 * scale;
    roots.sort_by(|a, b| {
        if (a.re - b.re).abs() > tol {
            b.re.partial_cmp(&a.re).unwrap_or(Ordering::Equal)
        } else {
            b.im.partial_cmp(&a.im).unwrap_or(Ordering::Equal)
        }
    });
}

/// Smallest pairwise distance within a root set.
pub fn min_gap(roots: &[C64]) -> f64 {
    let mut gap = f64::INFINITY;
    for i in 0..roots.len() {
        for j in i + 1..roots.len() {
            gap = gap.min((roots[i] - roots[j]).norm());
        }
    }
    gap
}

/// All permutations of `0..n` for n <= 3, in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, n: usize, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == n {
            out.push(prefix.clone());
            return;
        }
        for i in 0..n {
            if !prefix.contains(&i) {
                prefix.push(i);
                rec(prefix, n, out);
                prefix.pop();
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::with_capacity(n), n, &mut out);
    out
}

/// Assignment of `current` onto `previous` minimising total displacement.
///
/// Returns `perm` such that `current[perm[n]]` continues branch `n`.
pub fn match_branches(previous: &[C64], current: &[C64]) -> Vec<usize> {
    let n = previous.len();
    let mut best = (f64::INFINITY, (0..n).collect::<Vec<_>>());
    for perm in permutations(n) {
        let cost: f64 = (0..n)
            .map(|j| (current[perm[j]] - previous[j]).norm())
            .sum();
        if cost < best.0 {
            best = (cost, perm);
        }
    }
    best.1
}

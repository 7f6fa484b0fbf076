//! Adaptive Dormand-Prince 5(4) integrator with continuous (dense) output,
//! specialised to small complex linear systems.

use crate::error::{Error, Result};
use crate::linalg::C64;

/// Complex state of fixed dimension.
pub type State<const N: usize> = [C64; N];

#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub rtol: f64,
    pub atol: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            rtol: 1e-10,
            atol: 1e-12,
        }
    }
}

// Butcher tableau
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
// error estimate (5th minus embedded 4th order)
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
// dense output
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

fn axpy<const N: usize>(y: &State<N>, terms: &[(f64, &State<N>)], h: f64) -> State<N> {
    let mut out = *y;
    for (c, k) in terms {
        if *c == 0.0 {
            continue;
        }
        for i in 0..N {
            out[i] += k[i] * (h * c);
        }
    }
    out
}

/// Integrates `y' = f(x, y)` from `points[0]` with `y(points[0]) = y0` and
/// returns the solution sampled at every entry of `points`.
///
/// `points` must be strictly monotone; decreasing sequences integrate
/// backwards. Step sizes are chosen independently of the sample spacing and
/// samples between steps come from the fourth-order continuous extension.
pub fn integrate<const N: usize, F>(
    f: F,
    points: &[f64],
    y0: State<N>,
    tol: Tolerance,
) -> Result<Vec<State<N>>>
where
    F: Fn(f64, &State<N>) -> State<N>,
{
    if points.is_empty() {
        return Ok(Vec::new());
    }
    let dir = if points.len() > 1 && points[1] < points[0] {
        -1.0
    } else {
        1.0
    };
    if points
        .windows(2)
        .any(|w| (w[1] - w[0]) * dir <= 0.0 || !w[1].is_finite())
    {
        return Err(Error::MalformedGrid(
            "sample points must be strictly monotone".into(),
        ));
    }
    let x_end = points[points.len() - 1];
    let mut out = Vec::with_capacity(points.len());
    out.push(y0);
    let mut next = 1;

    let mut x = points[0];
    let mut y = y0;
    let mut k1 = f(x, &y);
    let span = (x_end - x).abs();
    if span == 0.0 {
        return Ok(out);
    }
    let mut h = initial_step(&f, x, &y, &k1, dir, span, tol);
    let mut last_err: f64 = 1e-4;

    while next < points.len() {
        let remaining = (x_end - x) * dir;
        if h.abs() > remaining {
            h = remaining * dir;
        }
        if h.abs() < 1e-14 * x.abs().max(1.0) {
            return Err(Error::ToleranceNotMet { x });
        }
        let k2 = f(x + C2 * h, &axpy(&y, &[(A21, &k1)], h));
        let k3 = f(x + C3 * h, &axpy(&y, &[(A31, &k1), (A32, &k2)], h));
        let k4 = f(
            x + C4 * h,
            &axpy(&y, &[(A41, &k1), (A42, &k2), (A43, &k3)], h),
        );
        let k5 = f(
            x + C5 * h,
            &axpy(&y, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)], h),
        );
        let k6 = f(
            x + h,
            &axpy(
                &y,
                &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
                h,
            ),
        );
        let y_new = axpy(
            &y,
            &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)],
            h,
        );
        let k7 = f(x + h, &y_new);

        let mut err_sq = 0.0;
        for i in 0..N {
            let e =
                (k1[i] * E1 + k3[i] * E3 + k4[i] * E4 + k5[i] * E5 + k6[i] * E6 + k7[i] * E7) * h;
            let sc = tol.atol + tol.rtol * y[i].norm().max(y_new[i].norm());
            err_sq += (e.norm() / sc).powi(2);
        }
        let err = (err_sq / N as f64).sqrt();
        if !err.is_finite() {
            h *= 0.1;
            continue;
        }

        if err <= 1.0 {
            let x_new = x + h;
            // continuous extension coefficients
            let mut r2 = [C64::new(0.0, 0.0); N];
            let mut r3 = r2;
            let mut r4 = r2;
            let mut r5 = r2;
            for i in 0..N {
                let dy = y_new[i] - y[i];
                let bspl = k1[i] * h - dy;
                r2[i] = dy;
                r3[i] = bspl;
                r4[i] = dy - k7[i] * h - bspl;
                r5[i] =
                    (k1[i] * D1 + k3[i] * D3 + k4[i] * D4 + k5[i] * D5 + k6[i] * D6 + k7[i] * D7)
                        * h;
            }
            while next < points.len() && (points[next] - x_new) * dir <= 0.0 {
                let xs = points[next];
                let sample = if xs == x_new {
                    y_new
                } else {
                    let theta = (xs - x) / h;
                    let theta1 = 1.0 - theta;
                    let mut s = [C64::new(0.0, 0.0); N];
                    for i in 0..N {
                        s[i] = y[i]
                            + (r2[i] + (r3[i] + (r4[i] + r5[i] * theta1) * theta) * theta1) * theta;
                    }
                    s
                };
                out.push(sample);
                next += 1;
            }
            x = x_new;
            y = y_new;
            k1 = k7;
            // PI step-size controller
            let fac = 0.9 * err.max(1e-10).powf(-0.17) * last_err.powf(0.04);
            h *= fac.clamp(0.2, 10.0);
            last_err = err.max(1e-4);
            if next < points.len() && (x_end - x) * dir <= 0.0 {
                // floating point left the final sample just ahead of x
                while next < points.len() {
                    out.push(y);
                    next += 1;
                }
            }
        } else {
            let fac = 0.9 * err.powf(-0.2);
            h *= fac.clamp(0.2, 1.0);
        }
    }
    Ok(out)
}

fn initial_step<const N: usize, F>(
    f: &F,
    x: f64,
    y: &State<N>,
    k1: &State<N>,
    dir: f64,
    span: f64,
    tol: Tolerance,
) -> f64
where
    F: Fn(f64, &State<N>) -> State<N>,
{
    let scale = |i: usize| tol.atol + tol.rtol * y[i].norm();
    let norm = |v: &State<N>| {
        ((0..N)
            .map(|i| (v[i].norm() / scale(i)).powi(2))
            .sum::<f64>()
            / N as f64)
            .sqrt()
    };
    let d0 = norm(y);
    let d1 = norm(k1);
    let mut h0 = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    h0 = h0.min(span);
    let y1 = axpy(y, &[(1.0, k1)], h0 * dir);
    let k2 = f(x + h0 * dir, &y1);
    let mut diff = [C64::new(0.0, 0.0); N];
    for i in 0..N {
        diff[i] = k2[i] - k1[i];
    }
    let d2 = norm(&diff) / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    (100.0 * h0).min(h1).min(span) * dir
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_growth_with_dense_samples() {
        let pts: Vec<f64> = (0..=50).map(|i| i as f64 * 0.04).collect();
        let sol = integrate(
            |_, y: &State<1>| [y[0]],
            &pts,
            [C64::new(1.0, 0.0)],
            Tolerance::default(),
        )
        .unwrap();
        for (x, y) in pts.iter().zip(&sol) {
            assert!((y[0].re - x.exp()).abs() < 1e-9 * x.exp());
        }
    }

    #[test]
    fn backward_integration() {
        let pts = [1.0, 0.5, 0.0];
        let sol = integrate(
            |_, y: &State<1>| [y[0] * -2.0],
            &pts,
            [C64::new(1.0, 0.0)],
            Tolerance::default(),
        )
        .unwrap();
        assert!((sol[2][0].re - 2f64.exp()).abs() < 1e-9);
    }

    #[test]
    fn rejects_non_monotone_samples() {
        let r = integrate(
            |_, y: &State<1>| *y,
            &[0.0, 1.0, 0.5],
            [C64::new(1.0, 0.0)],
            Tolerance::default(),
        );
        assert!(matches!(r, Err(Error::MalformedGrid(_))));
    }

    #[test]
    fn reports_step_underflow() {
        // finite-time blow-up of y' = y^2 at x = 1
        let r = integrate(
            |_, y: &State<1>| [y[0] * y[0]],
            &[0.0, 2.0],
            [C64::new(1.0, 0.0)],
            Tolerance::default(),
        );
        assert!(matches!(r, Err(Error::ToleranceNotMet { .. })));
    }
}

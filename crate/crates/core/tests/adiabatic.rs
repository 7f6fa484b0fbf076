use adiabatic_wkb::adiabatic::{eigensystem_of, s1};
use adiabatic_wkb::schrodinger::{exact_solve, matrix2};
use adiabatic_wkb::{
    AdiabaticExpansion, CMatrix, ExpansionOptions, Grid, MatrixFunction, Order, PhysicalSystem,
    Potential, Quadrature, StateVector, C64,
};
use proptest::prelude::*;

fn harmonic(hbar: f64, energy: f64) -> PhysicalSystem {
    PhysicalSystem::new(1.0, hbar, energy, Potential::Harmonic { omega: 1.0 }).unwrap()
}

fn a_rows(t: f64, scale: f64) -> CMatrix {
    let rows = [
        [1.0 + 0.3 * t.sin(), 0.4, 0.1 * t],
        [0.2, -0.5 + 0.2 * t.cos(), 0.3],
        [0.1 * t.cos(), 0.2, -2.0 + 0.1 * t],
    ];
    CMatrix::from_real_rows(&rows.map(|r| r.map(|v| v * scale)))
}

// M(x) = A(delta x): distinct eigenvalues that move slowly in x
fn slow_matrix(delta: f64) -> MatrixFunction {
    MatrixFunction::new(3, move |x| a_rows(delta * x, 1.0)).unwrap()
}

// In t = delta x the same system reads dy/dt = A(t) y / delta; the exponent
// must not depend on the variable or on the bookkeeping epsilon.
#[test]
fn exponent_is_invariant_under_slow_variable() {
    let delta = 0.05;
    let m = slow_matrix(delta);
    let slow = m.rescaled(delta);
    for t in [0.0, 0.3, 1.7] {
        assert!(
            (slow.at(t).unwrap().mul_vec(&[C64::new(1.0, 0.0); 3])[0]
                - a_rows(t, 1.0).mul_vec(&[C64::new(1.0, 0.0); 3])[0])
                .norm()
                < 1e-14
        );
    }
    let in_t = MatrixFunction::new(3, move |t| a_rows(t, 1.0 / delta)).unwrap();
    let x: Vec<f64> = Grid::new(0.0, 40.0, 801).unwrap().points();
    let t: Vec<f64> = x.iter().map(|v| delta * v).collect();
    for branch in 0..3 {
        let fast =
            AdiabaticExpansion::compute(&m, &x, 1.0, branch, ExpansionOptions::default()).unwrap();
        let scaled =
            AdiabaticExpansion::compute(&in_t, &t, delta, branch, ExpansionOptions::default())
                .unwrap();
        for i in 0..x.len() {
            let a = fast.exponent(i, Order::Second);
            let b = scaled.exponent(i, Order::Second);
            assert!(
                (a - b).norm() <= 1e-8 * (1.0 + a.norm()),
                "i={i}: {a} vs {b}"
            );
        }
    }
}

#[test]
fn gauge_first_significant_component_is_one() {
    let m = slow_matrix(1.0);
    for x in [0.0, 0.7, 2.3] {
        let e = eigensystem_of(&m.at(x).unwrap(), x, None).unwrap();
        for v in &e.right {
            let first = v.iter().find(|c| c.norm() > 1e-12).unwrap();
            assert!((first - C64::new(1.0, 0.0)).norm() < 1e-14);
        }
        assert!(e.biorthonormality_error() < 1e-12);
    }
}

#[test]
fn degenerate_matrix_is_rejected() {
    let m = CMatrix::identity(2);
    let err = eigensystem_of(&m, 0.0, None).unwrap_err();
    assert_eq!(err.name(), "DegenerateSpectrum");
}

#[test]
fn unsupported_dimension_is_rejected() {
    let m = CMatrix::identity(4);
    assert_eq!(
        eigensystem_of(&m, 0.0, None).unwrap_err().name(),
        "UnsupportedDimension"
    );
}

#[test]
fn constant_diagonal_system_is_exact() {
    let m = MatrixFunction::constant(CMatrix::from_real_rows(&[[2.0, 0.0], [0.0, -1.0]])).unwrap();
    let g = Grid::new(0.0, 1.0, 11).unwrap().points();
    let y = adiabatic_wkb::assemble_wavefunction(
        &m,
        &g,
        1.0,
        0,
        Order::Second,
        ExpansionOptions::default(),
    )
    .unwrap();
    for (x, v) in g.iter().zip(&y) {
        assert!((v[0] - C64::new((2.0 * x).exp(), 0.0)).norm() < 1e-12);
        assert!(v[1].norm() < 1e-12);
    }
}

#[test]
fn s1_of_constant_rate_is_linear() {
    let g = Grid::new(0.0, 2.0, 21).unwrap().points();
    let tau = vec![C64::new(0.5, -1.0); g.len()];
    for rule in [Quadrature::Trapezoid, Quadrature::Cubic] {
        let s = s1(&tau, &g, rule).unwrap();
        for (x, v) in g.iter().zip(&s) {
            assert!((v + tau[0] * x).norm() < 1e-13);
        }
    }
}

// Truncation error against the reference solution, started from the
// second-order adiabatic state at the left end.
fn truncation_error(hbar: f64, order: Order) -> f64 {
    let sys = harmonic(hbar, 8.0);
    let g = Grid::new(0.0, 3.0, 3001).unwrap().points();
    let exp = AdiabaticExpansion::compute(&matrix2(&sys), &g, 1.0, 0, ExpansionOptions::default())
        .unwrap();
    let approx = exp.wavefunction(order);
    let start = exp.wavefunction(Order::Second)[0].clone();
    let oracle = exact_solve(
        &sys,
        &g,
        StateVector::from_schrodinger(&sys, g[0], start[0], start[1]),
    )
    .unwrap();
    approx
        .iter()
        .zip(&oracle)
        .map(|(a, o)| (a[0] - o.y0).norm() / o.y0.norm())
        .fold(0.0, f64::max)
}

#[test]
fn truncation_error_scales_with_order() {
    let e1 = [
        truncation_error(0.2, Order::First),
        truncation_error(0.1, Order::First),
    ];
    let e2 = [
        truncation_error(0.2, Order::Second),
        truncation_error(0.1, Order::Second),
    ];
    // halving hbar halves the first-order error and quarters the second-order one
    let r1 = e1[0] / e1[1];
    let r2 = e2[0] / e2[1];
    assert!((1.6..2.4).contains(&r1), "first-order ratio {r1} ({e1:?})");
    assert!((3.5..4.5).contains(&r2), "second-order ratio {r2} ({e2:?})");
    assert!(e2[1] < e1[1]);
}

fn matrix_strategy(n: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(-2.0..2.0f64, 2 * n * n)
}

fn build(n: usize, v: &[f64]) -> CMatrix {
    let rows: Vec<Vec<C64>> = (0..n)
        .map(|r| {
            (0..n)
                .map(|c| C64::new(v[2 * (r * n + c)], v[2 * (r * n + c) + 1]))
                .collect()
        })
        .collect();
    CMatrix::from_rows(&rows)
}

proptest! {
    #[test]
    fn eigensystems_are_biorthonormal(v in matrix_strategy(3), n in 2usize..=3) {
        let m = build(n, &v[..2 * n * n]);
        match eigensystem_of(&m, 0.0, None) {
            Ok(e) => {
                let gap = adiabatic_wkb::roots::min_gap(&e.eigenvalues);
                // well-separated spectra only; near-defective matrices lose accuracy
                prop_assume!(gap > 0.05);
                prop_assert!(e.biorthonormality_error() < 1e-9, "{}", e.biorthonormality_error());
                prop_assert!(e.residual(&m) < 1e-9);
                prop_assert!(e.left_residual(&m) < 1e-9);
                let trace: C64 = e.eigenvalues.iter().sum();
                prop_assert!((trace - m.trace()).norm() < 1e-10);
            }
            Err(err) => prop_assert_eq!(err.name(), "DegenerateSpectrum"),
        }
    }

    #[test]
    fn continuation_follows_previous_order(v in matrix_strategy(3), shift in -0.001..0.001f64) {
        let m = build(3, &v);
        let e0 = match eigensystem_of(&m, 0.0, None) {
            Ok(e) => e,
            Err(_) => return Ok(()),
        };
        prop_assume!(adiabatic_wkb::roots::min_gap(&e0.eigenvalues) > 0.1);
        let moved = m.shifted(C64::new(-shift, 0.0));
        let e1 = eigensystem_of(&moved, 1.0, Some(&e0)).unwrap();
        for (a, b) in e0.eigenvalues.iter().zip(&e1.eigenvalues) {
            prop_assert!((b - a - shift).norm() < 1e-9);
        }
    }
}

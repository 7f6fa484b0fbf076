use adiabatic_wkb::schrodinger::exact_solve;
use adiabatic_wkb::wkb::{
    match_two_branch, turning_points, wkb_error_report, wkb_wavefunction, Sign,
};
use adiabatic_wkb::{Grid, PhysicalSystem, Potential, StateVector, C64};

fn harmonic(hbar: f64, energy: f64) -> PhysicalSystem {
    PhysicalSystem::new(1.0, hbar, energy, Potential::Harmonic { omega: 1.0 }).unwrap()
}

fn linear() -> PhysicalSystem {
    PhysicalSystem::new(1.0, 1.0, 0.0, Potential::Linear { a: 0.0, b: 1.0 }).unwrap()
}

#[test]
fn harmonic_turning_points_sit_at_sqrt_2e() {
    let tp = turning_points(&harmonic(1.0, 8.0), -5.0, 5.0);
    assert_eq!(tp.len(), 2);
    assert!((tp[0] + 4.0).abs() < 1e-10 && (tp[1] - 4.0).abs() < 1e-10);
    let tp = turning_points(&linear(), -4.0, 4.0);
    assert_eq!(tp.len(), 1);
    assert!(tp[0].abs() < 1e-10);
    assert!(turning_points(&harmonic(1.0, 8.0), -3.0, 3.0).is_empty());
}

#[test]
fn free_particle_wkb_is_a_plane_wave() {
    let sys = PhysicalSystem::new(1.0, 1.0, 2.0, Potential::Constant { value: 0.0 }).unwrap();
    let g = Grid::new(0.0, 5.0, 101).unwrap().points();
    for sign in [Sign::Plus, Sign::Minus] {
        let w = wkb_wavefunction(&sys, &g, sign, 1.0).unwrap();
        for (&x, v) in g.iter().zip(&w.values) {
            let want = (C64::new(0.0, 2.0 * sign.value() * (x - 1.0))).exp() / 2f64.sqrt();
            assert!((v - want).norm() < 1e-12);
        }
    }
}

#[test]
fn linear_potential_phase_matches_closed_form() {
    // k = sqrt(-2x) for x < 0, so int_{-4}^x k = (2 sqrt 2 / 3) (8 - (-x)^{3/2})
    let sys = linear();
    let g = Grid::new(-4.0, -0.5, 2001).unwrap().points();
    let w = wkb_wavefunction(&sys, &g, Sign::Plus, -4.0).unwrap();
    let phi = |x: f64| 2.0 * 2f64.sqrt() / 3.0 * (8.0 - (-x).powf(1.5));
    for (&x, v) in g.iter().zip(&w.values) {
        let k = (-2.0 * x).sqrt();
        let want = C64::new(0.0, phi(x)).exp() / k.sqrt();
        assert!((v - want).norm() < 1e-8 * want.norm(), "x = {x}");
    }
}

#[test]
fn turning_point_on_the_grid_is_marked() {
    let sys = linear();
    let g = Grid::new(-1.0, 1.0, 21).unwrap().points();
    let w = wkb_wavefunction(&sys, &g, Sign::Plus, -1.0).unwrap();
    assert_eq!(w.singular_count(), 1);
    assert!(w.singular_mask[10]);
    assert!(!w.values[10].is_finite());
    assert!(w
        .values
        .iter()
        .enumerate()
        .all(|(i, v)| i == 10 || v.is_finite()));
}

#[test]
fn all_singular_grid_is_an_error() {
    let sys = PhysicalSystem::new(1.0, 1.0, 1.0, Potential::Constant { value: 1.0 }).unwrap();
    let g = Grid::new(0.0, 1.0, 5).unwrap().points();
    assert_eq!(
        wkb_wavefunction(&sys, &g, Sign::Plus, 0.0)
            .unwrap_err()
            .name(),
        "AllSingular"
    );
}

#[test]
fn reference_point_outside_grid_is_rejected() {
    let g = Grid::new(0.0, 1.0, 5).unwrap().points();
    let err = wkb_wavefunction(&harmonic(1.0, 8.0), &g, Sign::Plus, 2.0).unwrap_err();
    assert_eq!(err.name(), "InvalidInput");
}

#[test]
fn matched_wkb_reproduces_value_and_slope() {
    let sys = harmonic(0.1, 8.0);
    let g = Grid::new(-2.0, 2.0, 4001).unwrap().points();
    let (psi, dpsi) = (C64::new(0.4, -0.2), C64::new(3.0, 1.0));
    let m = match_two_branch(&sys, &g, -1.0, psi, dpsi).unwrap();
    let i = 1000;
    assert!((g[i] + 1.0).abs() < 1e-12);
    assert!((m.values[i] - psi).norm() < 1e-12);
    // slope from the fitted branches, psi_s' = (s i k - k'/2k) psi_s
    let k = sys.wavenumber(-1.0);
    let drift = -sys.kk_prime(-1.0) / (k * k * 2.0);
    let amp = C64::new(1.0, 0.0) / k.sqrt();
    let slope = m.coefficients[0] * amp * (C64::i() * k + drift)
        + m.coefficients[1] * amp * (-C64::i() * k + drift);
    assert!((slope - dpsi).norm() < 1e-10);
}

#[test]
fn matching_at_a_turning_point_fails() {
    let g = Grid::new(-1.0, 1.0, 21).unwrap().points();
    let err =
        match_two_branch(&linear(), &g, 0.0, C64::new(1.0, 0.0), C64::new(0.0, 0.0)).unwrap_err();
    assert_eq!(err.name(), "InvalidInput");
}

#[test]
fn wkb_is_accurate_far_from_turning_points() {
    let sys = harmonic(0.05, 8.0);
    let g = Grid::new(-2.0, 2.0, 4001).unwrap().points();
    let oracle = exact_solve(
        &sys,
        &g,
        StateVector::from_schrodinger(&sys, g[0], C64::new(1.0, 0.0), C64::new(0.0, 0.0)),
    )
    .unwrap();
    let rep = wkb_error_report(&sys, &g, &oracle, 0.0, 0.0).unwrap();
    assert!(rep.turning_points.is_empty());
    assert_eq!(rep.singular_points, 0);
    assert_eq!(rep.compared_points, g.len());
    assert!(rep.linf_relative < 1e-3, "{}", rep.linf_relative);
}

#[test]
fn error_report_excludes_turning_point_zone() {
    let sys = harmonic(1.0, 8.0);
    let g = Grid::new(-4.0, 4.0, 801).unwrap().points();
    let oracle = exact_solve(
        &sys,
        &g,
        StateVector::from_schrodinger(&sys, g[0], C64::new(1.0, 0.0), C64::new(0.0, 0.0)),
    )
    .unwrap();
    // radius off the node lattice: |x| < 3.195 survives, 639 points
    let rep = wkb_error_report(&sys, &g, &oracle, 0.0, 0.805).unwrap();
    assert_eq!(rep.turning_points.len(), 2);
    assert_eq!(rep.compared_points, 639);
    assert_eq!(rep.singular_points, 2);
    assert!(rep.wkb_max_abs.is_infinite());
    assert!(rep.linf_relative.is_finite());
}

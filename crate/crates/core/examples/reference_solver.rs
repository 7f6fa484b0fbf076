//! Adaptive Runge-Kutta reference solution and its Wronskian.

use adiabatic_wkb::schrodinger::{exact_solve, wronskian};
use adiabatic_wkb::{Grid, PhysicalSystem, Potential, StateVector, C64};

fn main() -> adiabatic_wkb::Result<()> {
    let sys = PhysicalSystem::new(1.0, 1.0, 0.5, Potential::Harmonic { omega: 1.0 })?;
    let grid = Grid::new(0.0, 3.0, 301)?.points();
    let one = C64::new(1.0, 0.0);
    let zero = C64::new(0.0, 0.0);
    let even = exact_solve(
        &sys,
        &grid,
        StateVector::from_schrodinger(&sys, 0.0, one, zero),
    )?;
    let odd = exact_solve(
        &sys,
        &grid,
        StateVector::from_schrodinger(&sys, 0.0, zero, one),
    )?;

    // the ground state is exp(-x^2/2)
    let err = grid
        .iter()
        .zip(&even)
        .map(|(x, s)| (s.y0.re - (-0.5 * x * x).exp()).abs())
        .fold(0.0, f64::max);
    let w0 = wronskian(&even[0], &odd[0]);
    let drift = even
        .iter()
        .zip(&odd)
        .map(|(a, b)| (wronskian(a, b) - w0).norm())
        .fold(0.0, f64::max);
    println!("ground state error {err:.2e}, Wronskian drift {drift:.2e}");
    Ok(())
}

//! WKB near turning points: singular markers and the error away from them.

use adiabatic_wkb::schrodinger::exact_solve;
use adiabatic_wkb::wkb::{turning_points, wkb_error_report};
use adiabatic_wkb::{Grid, PhysicalSystem, Potential, StateVector, C64};

fn main() -> adiabatic_wkb::Result<()> {
    let grid = Grid::new(-4.0, 4.0, 4001)?.points();
    for hbar in [1.0, 0.5, 0.25] {
        let sys = PhysicalSystem::new(1.0, hbar, 8.0, Potential::Harmonic { omega: 1.0 })?;
        let start =
            StateVector::from_schrodinger(&sys, -4.0, C64::new(1.0, 0.0), C64::new(0.0, 0.0));
        let oracle = exact_solve(&sys, &grid, start)?;
        let rep = wkb_error_report(&sys, &grid, &oracle, 0.0, 0.8)?;
        println!(
            "hbar {hbar:<5} turning points {:?}  singular {}  linf {:.3e}  l2 {:.3e}",
            turning_points(&sys, -4.0, 4.0),
            rep.singular_points,
            rep.linf_relative,
            rep.l2_relative
        );
    }
    Ok(())
}

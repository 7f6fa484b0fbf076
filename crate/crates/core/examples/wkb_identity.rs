//! Ordinary WKB rebuilt from the adiabatic expansion, and the second-order
//! correction on top of it.

use adiabatic_wkb::wkb::{
    adiabatic_wavefunction, max_relative_deviation, wkb_via_adiabatic, wkb_wavefunction, Sign,
};
use adiabatic_wkb::{ExpansionOptions, Grid, Order, PhysicalSystem, Potential};

fn main() -> adiabatic_wkb::Result<()> {
    let sys = PhysicalSystem::new(1.0, 1.0, 8.0, Potential::Harmonic { omega: 1.0 })?;
    let grid = Grid::new(0.0, 3.2, 2000)?.points();
    let closed = wkb_wavefunction(&sys, &grid, Sign::Plus, 0.0)?;
    let first = wkb_via_adiabatic(&sys, &grid, Sign::Plus, 0.0)?;
    let second = adiabatic_wavefunction(
        &sys,
        &grid,
        Sign::Plus,
        0.0,
        1.0,
        Order::Second,
        ExpansionOptions::default(),
    )?;
    println!(
        "first order vs closed form: {:.2e}",
        max_relative_deviation(&first.values, &closed.values)
    );
    println!(
        "second order vs closed form: {:.2e}",
        max_relative_deviation(&second.values, &closed.values)
    );
    Ok(())
}

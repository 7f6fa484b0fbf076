//! Eigensystem, derivative couplings and expansion terms for a 2x2 system.

use adiabatic_wkb::schrodinger::matrix2;
use adiabatic_wkb::{AdiabaticExpansion, ExpansionOptions, Grid, PhysicalSystem, Potential};

fn main() -> adiabatic_wkb::Result<()> {
    let sys = PhysicalSystem::new(1.0, 1.0, 8.0, Potential::Harmonic { omega: 1.0 })?;
    let grid = Grid::new(0.0, 3.0, 7)?.points();
    let exp =
        AdiabaticExpansion::compute(&matrix2(&sys), &grid, 1.0, 0, ExpansionOptions::default())?;

    println!(
        "{:>6} {:>24} {:>12} {:>12} {:>12}",
        "x", "lambda_b", "tau_bb", "S1", "|S2|"
    );
    for i in 0..grid.len() {
        let e = &exp.eigensystems[i];
        println!(
            "{:>6.2} {:>24.6} {:>12.6} {:>12.6} {:>12.3e}",
            grid[i],
            e.eigenvalues[0],
            exp.couplings[i].get(0, 0).re,
            exp.s1[i].re,
            exp.s2[i].norm()
        );
    }
    let worst = exp
        .eigensystems
        .iter()
        .map(|e| e.biorthonormality_error())
        .fold(0.0, f64::max);
    println!("max biorthonormality error {worst:.2e}");
    Ok(())
}

//! Cubic-WKB stays finite through a turning point where ordinary WKB blows up.

use adiabatic_wkb::cubic::{combine_basis, cubic_wkb_basis, CubicOrder};
use adiabatic_wkb::schrodinger::exact_solve;
use adiabatic_wkb::wkb::wkb_error_report;
use adiabatic_wkb::{Alpha, Grid, PhysicalSystem, Potential, StateVector, C64};

fn main() -> adiabatic_wkb::Result<()> {
    let sys = PhysicalSystem::new(1.0, 1.0, 0.0, Potential::Linear { a: 0.0, b: 1.0 })?;
    let grid = Grid::new(-4.0, 4.0, 4001)?.points();
    let start = StateVector::from_schrodinger(&sys, -4.0, C64::new(1.0, 0.0), C64::new(0.0, 0.0));
    let oracle = exact_solve(&sys, &grid, start)?;

    let basis = cubic_wkb_basis(&sys, &grid, &Alpha::Constant(-0.5), CubicOrder::Zeroth)?;
    let anchor = 1000;
    let cubic = combine_basis(&basis, &sys, grid[anchor], oracle[anchor])?;
    let wkb = wkb_error_report(&sys, &grid, &oracle, grid[anchor], 0.0)?;

    println!(
        "{:>6} {:>12} {:>12} {:>12}",
        "x", "|oracle|", "|cubic|", "|wkb|"
    );
    for i in (1900..=2100).step_by(20) {
        println!(
            "{:>6.2} {:>12.5} {:>12.5} {:>12.5}",
            grid[i],
            oracle[i].y0.norm(),
            cubic.values[i].norm(),
            wkb.matched.values[i].norm()
        );
    }
    println!("cubic condition {:.2}", cubic.condition);
    Ok(())
}

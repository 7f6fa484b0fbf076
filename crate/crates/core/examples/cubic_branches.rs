//! Root branches of the cubic through a linear turning point.

use adiabatic_wkb::cubic::continue_branches;
use adiabatic_wkb::{Alpha, Grid, PhysicalSystem, Potential};

fn main() -> adiabatic_wkb::Result<()> {
    let sys = PhysicalSystem::new(1.0, 1.0, 0.0, Potential::Linear { a: 0.0, b: 1.0 })?;
    let grid = Grid::new(-2.0, 2.0, 401)?.points();
    let b = continue_branches(&sys, &grid, &Alpha::Constant(-0.5))?;
    for i in (0..grid.len()).step_by(50) {
        let r = b.roots[i];
        println!(
            "{:>6.2}  {:>22.5}  {:>22.5}  {:>22.5}",
            grid[i], r[0], r[1], r[2]
        );
    }
    println!("max residual {:.2e}", b.residual());
    Ok(())
}

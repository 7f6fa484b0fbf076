//! The 3x3 system conserves Q = y2 + k^2 y0 along its trajectories.

use adiabatic_wkb::ode::Tolerance;
use adiabatic_wkb::schrodinger::{conserved_quantity, solve_matrix3};
use adiabatic_wkb::{Alpha, Grid, PhysicalSystem, Potential, StateVector, C64};

fn main() -> adiabatic_wkb::Result<()> {
    let sys = PhysicalSystem::new(1.0, 1.0, 2.5, Potential::Harmonic { omega: 1.0 })?;
    let grid = Grid::new(-3.0, 3.0, 601)?.points();
    let alpha = Alpha::Constant(-0.5);
    let k2 = sys.k_squared(-3.0);
    let start = StateVector::new(
        C64::new(1.0, 0.0),
        C64::new(0.0, 0.0),
        C64::new(1.0 - k2, 0.0),
    );
    let traj = solve_matrix3(&sys, &alpha, &grid, start, Tolerance::default())?;
    for i in (0..grid.len()).step_by(100) {
        let q = conserved_quantity(&traj[i], &sys, &alpha, grid[i])?;
        println!("x {:>5.2}  Q {:.12}", grid[i], q.re);
    }
    Ok(())
}

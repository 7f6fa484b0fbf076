//! First-order rate in the far field for several gauges.

use adiabatic_wkb::cubic::{continue_branches, far_field_check};
use adiabatic_wkb::wkb::Sign;
use adiabatic_wkb::{Alpha, Grid, PhysicalSystem, Potential};

fn main() -> adiabatic_wkb::Result<()> {
    let sys = PhysicalSystem::new(1.0, 0.05, 8.0, Potential::Harmonic { omega: 1.0 })?;
    let grid = Grid::new(-2.0, 2.0, 2001)?.points();
    for alpha in [-1.0, -0.5, 0.5] {
        let b = continue_branches(&sys, &grid, &Alpha::Constant(alpha))?;
        let rep = far_field_check(&b, Sign::Plus)?;
        println!(
            "alpha {alpha:>5}: max|dS1/dx| {:.4e}, closed form {:.4e}, diff {:.2e} (tol {:.2e})",
            rep.max_abs_measured, rep.max_abs_closed, rep.max_abs_diff, rep.tolerance
        );
    }
    Ok(())
}

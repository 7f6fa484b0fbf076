//! WKB and cubic-WKB wave functions obtained as adiabatic expansions of
//! first-order linear systems `dy/dx = M(x) y`.
//!
//! * [`adiabatic`] is the generic engine: eigensystems, derivative couplings
//!   and the expansion terms `S0`, `S1`, `S2`, `f1` for N = 2 or 3.
//! * [`schrodinger`] defines the physical problem, the 2x2 and 3x3 reductions
//!   and an adaptive Runge-Kutta reference solver.
//! * [`wkb`] evaluates ordinary WKB wave functions and rebuilds them through
//!   the engine.
//! * [`cubic`] tracks the roots of `l^3 + k^2 l + 2 alpha k k' = 0` and builds
//!   wave functions that stay finite through turning points.
//! * [`harness`] drives everything from a JSON config and writes CSV/JSON.

pub mod adiabatic;
pub mod cubic;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod ode;
pub mod quadrature;
pub mod roots;
pub mod schrodinger;
pub mod wkb;

pub use adiabatic::{
    assemble_wavefunction, coupling, coupling_with, eigensystem_at, AdiabaticExpansion,
    CouplingMatrix, CouplingScheme, EigenSystem, ExpansionOptions, MatrixFunction, Order,
};
pub use error::{Error, Result};
pub use linalg::{CMatrix, C64};
pub use quadrature::Quadrature;
pub use schrodinger::{Alpha, Grid, PhysicalSystem, Potential, StateVector};

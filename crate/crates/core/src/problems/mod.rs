//! Concrete semidiscrete systems: a four-species plankton model, the heat
//! equation with manufactured solutions, and Cahn–Hilliard with a
//! logarithmic potential.

pub mod cahn_hilliard;
pub mod heat;
pub mod phyto;

pub use cahn_hilliard::{
    binodal, cahn_hilliard_problem, free_energy, ln_reg, BoundaryCondition, CahnHilliardParams,
    CahnHilliardProblem, InitialCondition,
};
pub use heat::{heat_mms_problem, HeatProblem, HeatVariant};
pub use phyto::{linear_invariants, phyto_problem, PhytoParams, PhytoProblem};

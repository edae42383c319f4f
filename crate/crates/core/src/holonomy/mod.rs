//! Lifting of parameter cycles to eigenprojector frames, monodromy
//! permutations, and the homotopy invariants that predict them.

mod invariants;
mod lift;
mod nonadiabatic;
mod permutation;

pub use invariants::{
    director_loop, rp2_class, winding_number, HomotopyInvariant, InvariantKind, DIRECTOR_DENSITY, ORIGIN_CLEARANCE,
};
pub use lift::{
    lift_cycle, lift_from_start, min_gap, monodromy, Generator, LiftOptions, LiftedPath, ParameterCycle,
    ParameterPoint, CLOSURE_TOL, FRAME_MATCH_TOL,
};
pub use nonadiabatic::{nonadiabatic_propagator, nonadiabatic_trajectory, NonadiabaticTrajectory};
pub use permutation::{compose, Permutation};

//! Numerical laboratory for deterministic optimal control in a periodic
//! environment made of two alternating domains separated by an interface.
//!
//! The environment on the fast axis is a period of alternating regions
//! `Omega1` and `Omega2`, each with its own controlled dynamics and running
//! cost. Trajectories may also slide along the interface by blending the two
//! sides with a mixing weight. Two strategy classes are studied: all blended
//! controls (`Variant::Minus`) and only the regular ones that approach the
//! interface from both sides (`Variant::Plus`). For each class the crate
//! computes the effective Hamiltonian of the averaged problem, correctors,
//! finite-horizon cross-checks, explicit trajectories, and the homogenized
//! limit of the rescaled value functions.
//!
//! Module map:
//! * [`control_model`]: partitions, control sets, blended interface controls,
//!   Hamiltonians, regularization of interface controls.
//! * [`cell_solver`]: discounted cell problems on the fast period and the
//!   vanishing-discount limit.
//! * [`ergodic_oracle`]: finite-horizon dynamic programming used as an
//!   independent estimate of the same limits.
//! * [`effective_hamiltonian`]: tables of the effective Hamiltonian and
//!   structural checks (coercivity, Lipschitz bounds, variant ordering).
//! * [`trajectory`]: explicit integration of controlled trajectories in the
//!   rescaled problem, costs, and regularity classification.
//! * [`homogenized_solver`]: rescaled value functions at fixed epsilon and
//!   the effective limit equation, with convergence studies.

// Validation guards spell ordering checks as negated strict comparisons so
// that NaN inputs fail them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cell_solver;
pub mod control_model;
pub mod effective_hamiltonian;
pub mod ergodic_oracle;
mod error;
pub mod homogenized_solver;
pub mod trajectory;

pub use error::{Error, Result};

pub use cell_solver::{CellSolution, PeriodicGrid, SolverParams, ValueField};
pub use control_model::{
    ControlProblem, ControlSample, DomainPartition, MixedControl, PresetParams, ProblemBounds,
    Region, Side, Variant,
};
pub use effective_hamiltonian::{HBarTable, Method};
pub use ergodic_oracle::{CrossingEstimate, HorizonField, LongTimeAverage};
pub use homogenized_solver::{ConvergenceReport, EpsSolution};
pub use trajectory::{ControlSignal, Trajectory};

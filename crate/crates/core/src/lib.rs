//! Large-N ground-state energy of 2D quantum dots.
//!
//! The pipeline: a self-consistent Thomas-Fermi mean field ([`tf2d`]),
//! smooth semiclassical Hartree-Fock energy coefficients ([`smooth`]),
//! periodic-orbit search in the self-consistent potential ([`dynamics`]),
//! the trace-formula shell correction ([`gutzwiller`]), closed-form
//! correlation terms ([`correlation`]), and an independent quantum
//! grid-diagonalization check ([`oracle`]).

pub mod correlation;
pub mod dynamics;
pub mod grid;
pub mod gutzwiller;
pub mod interp;
pub mod model;
pub mod oracle;
pub mod smooth;
pub mod tf2d;

pub use grid::Grid2D;
pub use model::{ConfinementPotential, ProblemConfig, Tolerances};
pub use tf2d::TfSolution;

//! Classical dynamics in the self-consistent potential: symplectic flow,
//! periodic-orbit search, stability and Maslov indices.

mod flow;
mod maslov;
mod search;

pub use flow::{flow, variational_flow, FlowError, Hamiltonian, PhaseState, Potential};
pub use maslov::{maslov_index, MaslovError};
pub use search::{
    action_and_period, continue_in_energy, find_orbits, OrbitError, PeriodicOrbit,
    SearchBudget, SearchReport,
};

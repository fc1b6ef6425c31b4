//! Two-dimensional particle world: agent kinematics, a pursuing adversary,
//! a range-limited communication graph and padded local observations.

mod config;
pub mod log;
mod state;
mod teammates;
mod world;

pub use config::{FormationPattern, WorldConfig};
pub use state::{
    observation_width, AdversaryState, AgentState, GlobalState, Observation, OWN_WIDTH,
    SLOT_WIDTH,
};
pub use teammates::{Group, Grouping, TeammateMatrix};
pub use world::{adversary_policy, comm_neighbors, observe, reset, reset_seeded, step};


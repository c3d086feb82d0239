//! Particle dynamics: discrete PSO, the stochastic differential schemes with
//! and without memory, and their first-order consensus limits.

mod params;
mod run;
mod state;
mod step;

pub use params::{Boundary, Mode, SolverParams};
pub use run::{run, run_from, RunReport, StopReason};
pub use state::{InitSpec, Particle, PositionInit, SwarmState, VelocityInit};
pub use step::{
    apply_boundary, step, step_cbo, step_cbo_local_best, step_discrete_pso, step_sdpso_memory,
    step_sdpso_no_memory,
};

#[cfg(test)]
mod tests;

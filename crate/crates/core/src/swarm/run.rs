use serde::{Deserialize, Serialize};

use super::params::SolverParams;
use super::state::{InitSpec, SwarmState};
use super::step::step;
use crate::bench::StopRule;
use crate::noise::{NoiseSource, SeededNoise};
use crate::objectives::Objective;
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    /// The consensus moved less than the stall threshold for long enough.
    Stalled,
    MaxIter,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    /// Consensus point after each step, starting with the initial one.
    pub trajectory: Vec<Vec<f64>>,
    pub final_consensus: Vec<f64>,
    pub iterations: u64,
    pub stop_reason: StopReason,
}

/// Samples an ensemble from `init` and steps it until `stop` fires.
///
/// Initial conditions and noise both derive from `(seed, run_index)`.
pub fn run(
    params: &SolverParams,
    objective: &dyn Objective,
    init: &InitSpec,
    stop: &StopRule,
    seed: u64,
    run_index: u64,
) -> Result<RunReport> {
    params.validate()?;
    stop.validate()?;
    let noise = SeededNoise::new(seed, run_index);
    let mut rng = noise.init_rng();
    let mut state = SwarmState::sample(init, params, objective, &mut rng)?;
    run_from(&mut state, params, objective, &noise, stop)
}

/// Steps an existing state until `stop` fires.
pub fn run_from(
    state: &mut SwarmState,
    params: &SolverParams,
    objective: &dyn Objective,
    noise: &dyn NoiseSource,
    stop: &StopRule,
) -> Result<RunReport> {
    let mut trajectory = vec![state.consensus.clone()];
    let mut quiet = 0u64;
    let mut iterations = 0u64;
    let mut stop_reason = StopReason::MaxIter;
    while iterations < stop.max_iter {
        step(state, params, objective, noise)?;
        iterations += 1;
        let prev = trajectory.last().expect("trajectory starts non-empty");
        let moved = prev
            .iter()
            .zip(&state.consensus)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        trajectory.push(state.consensus.clone());
        if moved < stop.delta_stall {
            quiet += 1;
            if quiet >= stop.n_stall {
                stop_reason = StopReason::Stalled;
                break;
            }
        } else {
            quiet = 0;
        }
    }
    Ok(RunReport {
        final_consensus: state.consensus.clone(),
        trajectory,
        iterations,
        stop_reason,
    })
}

use rand::Rng;
use rand_distr::{Distribution, Normal, Uniform};
use serde::{Deserialize, Serialize};

use super::params::{Mode, SolverParams};
use crate::consensus::{argmin_index, consensus_with};
use crate::objectives::Objective;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Particle {
    pub position: Vec<f64>,
    /// Empty in first-order modes.
    pub velocity: Vec<f64>,
    /// Empty in modes without memory.
    pub local_best: Vec<f64>,
    /// Cost at `position`.
    pub cost: f64,
    /// Cost at `local_best`; equals `cost` in modes without memory.
    pub local_best_cost: f64,
}

impl Particle {
    /// Point the consensus is built from: the local best if there is one.
    pub fn anchor(&self) -> &[f64] {
        if self.local_best.is_empty() {
            &self.position
        } else {
            &self.local_best
        }
    }

    pub fn anchor_cost(&self) -> f64 {
        if self.local_best.is_empty() {
            self.cost
        } else {
            self.local_best_cost
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SwarmState {
    pub mode: Mode,
    pub dim: usize,
    pub particles: Vec<Particle>,
    pub step: u64,
    /// Consensus point of the current state: the weighted mean for the SDE
    /// and first-order modes, the global best for discrete PSO.
    pub consensus: Vec<f64>,
    /// Cost of the discrete global best; NaN in the other modes.
    pub best_cost: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "law")]
pub enum PositionInit {
    Uniform { lower: f64, upper: f64 },
    Gaussian { mean: f64, std: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "law")]
pub enum VelocityInit {
    #[default]
    Zero,
    Gaussian {
        std: f64,
    },
}

/// How the ensemble is drawn at time zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InitSpec {
    pub particles: usize,
    pub positions: PositionInit,
    #[serde(default)]
    pub velocities: VelocityInit,
}

impl InitSpec {
    pub fn uniform(particles: usize, lower: f64, upper: f64) -> Self {
        Self {
            particles,
            positions: PositionInit::Uniform { lower, upper },
            velocities: VelocityInit::Zero,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.particles == 0 {
            return Err(Error::invalid("particles", "must be at least 1"));
        }
        match self.positions {
            PositionInit::Uniform { lower, upper } if !(lower < upper) => {
                Err(Error::invalid("init.positions", "need lower < upper"))
            }
            PositionInit::Gaussian { std, .. } if !(std > 0.0) => {
                Err(Error::invalid("init.positions.std", "must be positive"))
            }
            _ => match self.velocities {
                VelocityInit::Gaussian { std } if !(std >= 0.0) => {
                    Err(Error::invalid("init.velocities.std", "must be nonnegative"))
                }
                _ => Ok(()),
            },
        }
    }
}

impl SwarmState {
    /// Builds a state from explicit positions. Velocities default to zero and
    /// local bests start at the positions.
    pub fn from_positions(
        positions: Vec<Vec<f64>>,
        velocities: Option<Vec<Vec<f64>>>,
        params: &SolverParams,
        objective: &dyn Objective,
    ) -> Result<Self> {
        let dim = objective.dim();
        if positions.is_empty() {
            return Err(Error::EmptyEnsemble);
        }
        if let Some(v) = &velocities {
            if v.len() != positions.len() {
                return Err(Error::DimensionMismatch {
                    expected: positions.len(),
                    got: v.len(),
                });
            }
        }
        let mode = params.mode;
        let mut vel_iter = velocities.map(Vec::into_iter);
        let mut particles = Vec::with_capacity(positions.len());
        for x in positions {
            if x.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: x.len(),
                });
            }
            let v = vel_iter.as_mut().and_then(Iterator::next);
            let velocity = if mode.has_velocity() {
                let v = v.unwrap_or_else(|| vec![0.0; dim]);
                if v.len() != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        got: v.len(),
                    });
                }
                v
            } else {
                Vec::new()
            };
            let cost = objective.cost(&x);
            let local_best = if mode.has_memory() {
                x.clone()
            } else {
                Vec::new()
            };
            particles.push(Particle {
                position: x,
                velocity,
                local_best,
                cost,
                local_best_cost: cost,
            });
        }
        let mut state = Self {
            mode,
            dim,
            particles,
            step: 0,
            consensus: Vec::new(),
            best_cost: f64::NAN,
        };
        state.refresh_consensus(params)?;
        Ok(state)
    }

    /// Draws an initial ensemble from `init`.
    pub fn sample<R: Rng + ?Sized>(
        init: &InitSpec,
        params: &SolverParams,
        objective: &dyn Objective,
        rng: &mut R,
    ) -> Result<Self> {
        init.validate()?;
        let dim = objective.dim();
        let n = init.particles;
        let positions: Vec<Vec<f64>> = match init.positions {
            PositionInit::Uniform { lower, upper } => {
                let law = Uniform::new(lower, upper)
                    .map_err(|e| Error::invalid("init.positions", e.to_string()))?;
                (0..n)
                    .map(|_| (0..dim).map(|_| law.sample(rng)).collect())
                    .collect()
            }
            PositionInit::Gaussian { mean, std } => {
                let law = Normal::new(mean, std)
                    .map_err(|e| Error::invalid("init.positions", e.to_string()))?;
                (0..n)
                    .map(|_| (0..dim).map(|_| law.sample(rng)).collect())
                    .collect()
            }
        };
        let velocities = match init.velocities {
            VelocityInit::Zero => None,
            VelocityInit::Gaussian { std } => {
                let law = Normal::new(0.0, std)
                    .map_err(|e| Error::invalid("init.velocities", e.to_string()))?;
                Some(
                    (0..n)
                        .map(|_| (0..dim).map(|_| law.sample(rng)).collect())
                        .collect(),
                )
            }
        };
        Self::from_positions(positions, velocities, params, objective)
    }

    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
    }

    pub fn positions(&self) -> Vec<Vec<f64>> {
        self.particles.iter().map(|p| p.position.clone()).collect()
    }

    /// Recomputes the cached consensus from the current particles.
    pub fn refresh_consensus(&mut self, params: &SolverParams) -> Result<()> {
        let costs: Vec<f64> = self.particles.iter().map(Particle::anchor_cost).collect();
        if self.mode == Mode::DiscretePso {
            let best = argmin_index(&costs)?;
            // Keep the previous global best unless a local best beats it.
            if self.consensus.is_empty() || costs[best] < self.best_cost {
                self.consensus = self.particles[best].local_best.clone();
                self.best_cost = costs[best];
            }
            return Ok(());
        }
        let particles = &self.particles;
        self.consensus = consensus_with(
            particles.len(),
            self.dim,
            |i| particles[i].anchor(),
            &costs,
            &params.consensus(),
        )?;
        Ok(())
    }

    /// Largest coordinate-wise spread of the positions.
    pub fn diameter(&self) -> f64 {
        (0..self.dim)
            .map(|k| {
                let (lo, hi) = self
                    .particles
                    .iter()
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
                        (lo.min(p.position[k]), hi.max(p.position[k]))
                    });
                hi - lo
            })
            .fold(0.0, f64::max)
    }
}

use crate::objectives::Objective;
use crate::swarm::{Mode, SolverParams};
use crate::{Error, Result};

use super::grid::{AxisName, DensityField, PhaseGrid, Splitting};
use super::ops::{
    cbo_diffusion_step, cbo_drift_step, consensus_from_density, fokker_planck_v_step,
    memory_advection_y_step, transport_x_step, GridCosts,
};

/// A mean-field equation ready to be stepped: grid, coefficients and the
/// objective sampled on the grid.
///
/// The mode picks the equation: `SdpsoNoMemory` on (x, v), `SdpsoMemory` on
/// (x, y, v), `Cbo` on x and `CboLocalBest` on (x, y). The time step is the
/// grid's, not `params.dt`.
#[derive(Debug, Clone)]
pub struct MeanFieldProblem {
    pub grid: PhaseGrid,
    pub params: SolverParams,
    pub costs: GridCosts,
}

impl MeanFieldProblem {
    pub fn new(grid: PhaseGrid, params: SolverParams, objective: &dyn Objective) -> Result<Self> {
        grid.validate()?;
        let axes = grid.axes;
        let (want_y, want_v) = match params.mode {
            Mode::SdpsoNoMemory => (false, true),
            Mode::SdpsoMemory => (true, true),
            Mode::Cbo => (false, false),
            Mode::CboLocalBest => (true, false),
            Mode::DiscretePso => {
                return Err(Error::WrongMode {
                    expected: "a continuous mode",
                    got: params.mode.name(),
                })
            }
        };
        if axes.y.is_some() != want_y {
            return Err(Error::invalid(
                "grid.y",
                format!(
                    "mode {} {} a y axis",
                    params.mode.name(),
                    if want_y { "needs" } else { "has no" }
                ),
            ));
        }
        if axes.v.is_some() != want_v {
            return Err(Error::invalid(
                "grid.v",
                format!(
                    "mode {} {} a v axis",
                    params.mode.name(),
                    if want_v { "needs" } else { "has no" }
                ),
            ));
        }
        let mut checked = params;
        checked.dt = grid.dt;
        checked.validate()?;
        if want_v && !(params.m > 0.0) {
            return Err(Error::invalid(
                "m",
                "the kinetic mean-field equation needs m > 0",
            ));
        }
        Ok(Self {
            grid,
            params,
            costs: GridCosts::evaluate(&axes, objective)?,
        })
    }

    fn check(&self, field: &DensityField) -> Result<()> {
        if field.axes != self.grid.axes {
            return Err(Error::invalid("field", "axes differ from the problem grid"));
        }
        Ok(())
    }

    /// Consensus of the current field: over x without memory, over the
    /// memory marginal otherwise.
    pub fn consensus(&self, field: &DensityField) -> Result<f64> {
        if self.params.mode.has_memory() {
            consensus_from_density(field, AxisName::Y, &self.costs.y, self.params.alpha)
        } else {
            consensus_from_density(field, AxisName::X, &self.costs.x, self.params.alpha)
        }
    }

    /// One step of whichever equation the mode selects. Returns the
    /// consensus point used.
    pub fn step(&self, field: &mut DensityField) -> Result<f64> {
        match self.params.mode {
            Mode::SdpsoNoMemory | Mode::SdpsoMemory => mf_pso_step(field, self),
            _ => mf_cbo_step(field, self),
        }
    }

    /// Steps until `time`, with the last step shortened to land on it.
    pub fn advance_to(&self, field: &mut DensityField, time: f64) -> Result<()> {
        let dt = self.grid.dt;
        while field.time < time - 1e-9 * dt {
            let h = dt.min(time - field.time);
            if h < dt {
                let mut short = self.clone();
                short.grid.dt = h;
                short.step(field)?;
                field.time = time;
            } else {
                self.step(field)?;
            }
        }
        Ok(())
    }
}

/// One split step of the kinetic equation (with or without memory).
/// The consensus point is computed once, right before the velocity
/// relaxation, which for Strang splitting is the midpoint of the step.
pub fn mf_pso_step(field: &mut DensityField, problem: &MeanFieldProblem) -> Result<f64> {
    problem.check(field)?;
    let p = &problem.params;
    if !matches!(p.mode, Mode::SdpsoNoMemory | Mode::SdpsoMemory) {
        return Err(Error::WrongMode {
            expected: "sdpso_no_memory or sdpso_memory",
            got: p.mode.name(),
        });
    }
    let dt = problem.grid.dt;
    let memory = p.mode.has_memory();
    let transport = |field: &mut DensityField, h: f64| -> Result<()> {
        transport_x_step(field, h)?;
        if memory {
            memory_advection_y_step(field, p, &problem.costs, h)?;
        }
        Ok(())
    };
    let consensus = match problem.grid.splitting {
        Splitting::Lie => {
            transport(field, dt)?;
            let c = problem.consensus(field)?;
            fokker_planck_v_step(
                field,
                c,
                p,
                problem.grid.time_scheme,
                problem.grid.velocity_flux,
                dt,
            )?;
            c
        }
        Splitting::Strang => {
            transport(field, 0.5 * dt)?;
            let c = problem.consensus(field)?;
            fokker_planck_v_step(
                field,
                c,
                p,
                problem.grid.time_scheme,
                problem.grid.velocity_flux,
                dt,
            )?;
            if memory {
                memory_advection_y_step(field, p, &problem.costs, 0.5 * dt)?;
            }
            transport_x_step(field, 0.5 * dt)?;
            c
        }
    };
    field.time += dt;
    Ok(consensus)
}

/// One split step of the first-order equation (with or without memory).
/// The consensus point is taken at the start of the step.
pub fn mf_cbo_step(field: &mut DensityField, problem: &MeanFieldProblem) -> Result<f64> {
    problem.check(field)?;
    let p = &problem.params;
    if !matches!(p.mode, Mode::Cbo | Mode::CboLocalBest) {
        return Err(Error::WrongMode {
            expected: "cbo or cbo_local_best",
            got: p.mode.name(),
        });
    }
    let dt = problem.grid.dt;
    let scheme = problem.grid.time_scheme;
    let memory = p.mode.has_memory();
    let c = problem.consensus(field)?;
    match problem.grid.splitting {
        Splitting::Lie => {
            cbo_drift_step(field, p, c, dt)?;
            cbo_diffusion_step(field, p, c, scheme, dt)?;
            if memory {
                memory_advection_y_step(field, p, &problem.costs, dt)?;
            }
        }
        Splitting::Strang => {
            if memory {
                memory_advection_y_step(field, p, &problem.costs, 0.5 * dt)?;
            }
            cbo_drift_step(field, p, c, 0.5 * dt)?;
            cbo_diffusion_step(field, p, c, scheme, dt)?;
            cbo_drift_step(field, p, c, 0.5 * dt)?;
            if memory {
                memory_advection_y_step(field, p, &problem.costs, 0.5 * dt)?;
            }
        }
    }
    field.time += dt;
    Ok(c)
}

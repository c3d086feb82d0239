//! Deterministic solvers for the one-dimensional mean-field equations.
//!
//! Grids are uniform and cell-centered, with zero density outside the box.
//! Free transport in x uses the backward characteristic foot with quadratic
//! interpolation; the memory relaxation in y and the first-order drift use
//! Lax-Wendroff. Both keep the density nonnegative through a flux-corrected
//! limiter that only acts where a cell would otherwise go negative.
//! Diffusion in v and in x is implicit and central, one tridiagonal solve per
//! line. The velocity drift is advected by the same limited scheme in two
//! half steps around it, unless [`VelocityFlux::Central`] asks for a single
//! implicit central solve of drift and diffusion together.

mod grid;
pub mod io;
mod kernels;
mod ops;
mod solver;

pub use grid::{
    histogram, marginal, marginal_y, Axes, Axis, AxisName, DensityField, PhaseGrid, Splitting,
    TimeScheme, VelocityFlux, MIN_CELLS,
};
pub use ops::{
    consensus_from_density, fokker_planck_v_step, maxwellian_profile, memory_advection_y_step,
    transport_x_step, GridCosts,
};
pub use solver::{mf_cbo_step, mf_pso_step, MeanFieldProblem};

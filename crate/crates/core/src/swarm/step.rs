//! One time step of each particle scheme.
//!
//! Every step reads the consensus cached in the state, moves all particles
//! independently (possibly in parallel), then recomputes the consensus.

use super::params::{Boundary, Mode, SolverParams};
use super::state::{Particle, SwarmState};
use crate::consensus::memory_switch;
use crate::noise::{Channel, NoiseSource};
use crate::objectives::{Bounds, Objective};
use crate::par;
use crate::{Error, Result};

fn expect_mode(state: &SwarmState, params: &SolverParams, want: Mode) -> Result<()> {
    for got in [params.mode, state.mode] {
        if got != want {
            return Err(Error::WrongMode {
                expected: want.name(),
                got: got.name(),
            });
        }
    }
    Ok(())
}

/// Per-step scalar factors, precomputed once.
#[derive(Clone, Copy)]
struct Factors {
    m: f64,
    denom: f64,
    /// `Δt / (m + γΔt)`; exactly 1 when `m = 0`.
    move_scale: f64,
    local_drift: f64,
    global_drift: f64,
    local_noise: f64,
    global_noise: f64,
    relax: f64,
    clamp: Option<Bounds>,
}

impl Factors {
    fn new(params: &SolverParams) -> Result<Self> {
        params.validate()?;
        let dt = params.dt;
        let sq = dt.sqrt();
        let denom = if params.mode.has_velocity() {
            params.velocity_denominator()
        } else {
            dt
        };
        if !(denom > 0.0) || !denom.is_finite() {
            return Err(Error::DegenerateInertia);
        }
        let m = if params.mode.has_velocity() {
            params.m
        } else {
            0.0
        };
        Ok(Self {
            m,
            denom,
            move_scale: dt / denom,
            local_drift: params.lambda1 * dt,
            global_drift: params.lambda2 * dt,
            local_noise: params.sigma1 * sq,
            global_noise: params.sigma2 * sq,
            relax: params.nu * dt,
            clamp: match params.boundary {
                Boundary::None => None,
                Boundary::ClampToBox { lower, upper } => Some(Bounds::new(lower, upper)),
            },
        })
    }
}

fn clamp_position(x: &mut [f64], clamp: Option<Bounds>) {
    if let Some(b) = clamp {
        for v in x.iter_mut() {
            *v = b.clamp(*v);
        }
    }
}

fn draw(
    noise: &dyn NoiseSource,
    params: &SolverParams,
    step: u64,
    i: usize,
    channel: Channel,
    scale: f64,
    out: &mut [f64],
) {
    // A zero coefficient multiplies the draws away; skip generating them.
    if scale == 0.0 {
        out.fill(0.0);
    } else {
        noise.standardized(params.noise, step, i, channel, out);
    }
}

/// Moves `x` (and `v` when present) under global drift/noise only.
fn global_move(p: &mut Particle, target: &[f64], theta: &[f64], f: &Factors) {
    let has_v = !p.velocity.is_empty();
    for k in 0..p.position.len() {
        let x = p.position[k];
        let dg = target[k] - x;
        let inertia = if has_v { f.m * p.velocity[k] } else { 0.0 };
        let impulse = inertia + f.global_drift * dg + f.global_noise * dg * theta[k];
        if has_v {
            p.velocity[k] = impulse / f.denom;
        }
        p.position[k] = x + f.move_scale * impulse;
    }
}

/// Moves `x` (and `v`) under local and global terms, then relaxes the memory.
fn memory_move(
    p: &mut Particle,
    target: &[f64],
    theta_local: &[f64],
    theta_global: &[f64],
    f: &Factors,
    params: &SolverParams,
    objective: &dyn Objective,
) {
    let has_v = !p.velocity.is_empty();
    for k in 0..p.position.len() {
        let x = p.position[k];
        let dl = p.local_best[k] - x;
        let dg = target[k] - x;
        let inertia = if has_v { f.m * p.velocity[k] } else { 0.0 };
        let impulse = inertia
            + f.local_drift * dl
            + f.global_drift * dg
            + f.local_noise * dl * theta_local[k]
            + f.global_noise * dg * theta_global[k];
        if has_v {
            p.velocity[k] = impulse / f.denom;
        }
        p.position[k] = x + f.move_scale * impulse;
    }
    clamp_position(&mut p.position, f.clamp);
    p.cost = objective.cost(&p.position);
    let w = f.relax * memory_switch(p.cost, p.local_best_cost, &params.switch());
    if w == 1.0 {
        p.local_best.copy_from_slice(&p.position);
        p.local_best_cost = p.cost;
    } else if w != 0.0 {
        // Y ← (1 − w) Y + w X; exact at both ends of the segment.
        for (y, x) in p.local_best.iter_mut().zip(&p.position) {
            *y = (1.0 - w) * *y + w * x;
        }
        p.local_best_cost = objective.cost(&p.local_best);
    }
}

/// Canonical discrete PSO: `v ← m v + c1 R1 (y − x) + c2 R2 (ȳ − x)`,
/// `x ← x + v`, with hard local and global best updates.
pub fn step_discrete_pso(
    state: &mut SwarmState,
    params: &SolverParams,
    objective: &dyn Objective,
    noise: &dyn NoiseSource,
) -> Result<()> {
    expect_mode(state, params, Mode::DiscretePso)?;
    let f = Factors::new(params)?;
    let (c1, c2) = params.acceleration();
    let target = state.consensus.clone();
    let step = state.step;
    let dim = state.dim;
    par::for_each_mut(&mut state.particles, |i, p| {
        let mut r1 = vec![0.0; dim];
        let mut r2 = vec![0.0; dim];
        noise.uniform(step, i, Channel::Local, &mut r1);
        noise.uniform(step, i, Channel::Global, &mut r2);
        for k in 0..dim {
            let x = p.position[k];
            let v = params.m * p.velocity[k]
                + c1 * r1[k] * (p.local_best[k] - x)
                + c2 * r2[k] * (target[k] - x);
            p.velocity[k] = v;
            p.position[k] = x + v;
        }
        clamp_position(&mut p.position, f.clamp);
        let new_cost = objective.cost(&p.position);
        if new_cost < p.cost {
            p.local_best.copy_from_slice(&p.position);
            p.local_best_cost = new_cost;
        }
        p.cost = new_cost;
    });
    state.step += 1;
    state.refresh_consensus(params)
}

/// Semi-implicit second-order scheme without memory.
pub fn step_sdpso_no_memory(
    state: &mut SwarmState,
    params: &SolverParams,
    objective: &dyn Objective,
    noise: &dyn NoiseSource,
) -> Result<()> {
    expect_mode(state, params, Mode::SdpsoNoMemory)?;
    global_step(state, params, objective, noise)
}

/// Euler–Maruyama step of the first-order consensus dynamics.
pub fn step_cbo(
    state: &mut SwarmState,
    params: &SolverParams,
    objective: &dyn Objective,
    noise: &dyn NoiseSource,
) -> Result<()> {
    expect_mode(state, params, Mode::Cbo)?;
    global_step(state, params, objective, noise)
}

fn global_step(
    state: &mut SwarmState,
    params: &SolverParams,
    objective: &dyn Objective,
    noise: &dyn NoiseSource,
) -> Result<()> {
    let f = Factors::new(params)?;
    let target = state.consensus.clone();
    let step = state.step;
    let dim = state.dim;
    par::for_each_mut(&mut state.particles, |i, p| {
        let mut theta = vec![0.0; dim];
        draw(
            noise,
            params,
            step,
            i,
            Channel::Global,
            f.global_noise,
            &mut theta,
        );
        global_move(p, &target, &theta, &f);
        clamp_position(&mut p.position, f.clamp);
        p.cost = objective.cost(&p.position);
        p.local_best_cost = p.cost;
    });
    state.step += 1;
    state.refresh_consensus(params)
}

/// Semi-implicit second-order scheme with a relaxed local-best memory.
pub fn step_sdpso_memory(
    state: &mut SwarmState,
    params: &SolverParams,
    objective: &dyn Objective,
    noise: &dyn NoiseSource,
) -> Result<()> {
    expect_mode(state, params, Mode::SdpsoMemory)?;
    memory_step(state, params, objective, noise)
}

/// First-order consensus dynamics with a relaxed local-best memory.
pub fn step_cbo_local_best(
    state: &mut SwarmState,
    params: &SolverParams,
    objective: &dyn Objective,
    noise: &dyn NoiseSource,
) -> Result<()> {
    expect_mode(state, params, Mode::CboLocalBest)?;
    memory_step(state, params, objective, noise)
}

fn memory_step(
    state: &mut SwarmState,
    params: &SolverParams,
    objective: &dyn Objective,
    noise: &dyn NoiseSource,
) -> Result<()> {
    let f = Factors::new(params)?;
    let target = state.consensus.clone();
    let step = state.step;
    let dim = state.dim;
    par::for_each_mut(&mut state.particles, |i, p| {
        let mut theta_local = vec![0.0; dim];
        let mut theta_global = vec![0.0; dim];
        draw(
            noise,
            params,
            step,
            i,
            Channel::Local,
            f.local_noise,
            &mut theta_local,
        );
        draw(
            noise,
            params,
            step,
            i,
            Channel::Global,
            f.global_noise,
            &mut theta_global,
        );
        memory_move(
            p,
            &target,
            &theta_local,
            &theta_global,
            &f,
            params,
            objective,
        );
    });
    state.step += 1;
    state.refresh_consensus(params)
}

/// Runs the step matching `params.mode`.
pub fn step(
    state: &mut SwarmState,
    params: &SolverParams,
    objective: &dyn Objective,
    noise: &dyn NoiseSource,
) -> Result<()> {
    match params.mode {
        Mode::DiscretePso => step_discrete_pso(state, params, objective, noise),
        Mode::SdpsoNoMemory => step_sdpso_no_memory(state, params, objective, noise),
        Mode::SdpsoMemory => step_sdpso_memory(state, params, objective, noise),
        Mode::Cbo => step_cbo(state, params, objective, noise),
        Mode::CboLocalBest => step_cbo_local_best(state, params, objective, noise),
    }
}

/// Projects every position coordinate onto `bounds`. Velocities and cached
/// costs are left untouched.
pub fn apply_boundary(state: &mut SwarmState, bounds: &Bounds) {
    for p in &mut state.particles {
        clamp_position(&mut p.position, Some(*bounds));
    }
}

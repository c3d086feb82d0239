//! Runs a parsed experiment and writes its artifacts.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use serde_json::{json, Value};

use swarmkit::bench::{evaluate_run, run_ensemble, BenchTable, EnsembleConfig, SuccessRule};
use swarmkit::meanfield::{
    self, histogram, marginal, Axes, AxisName, DensityField, MeanFieldProblem, PhaseGrid,
};
use swarmkit::noise::SeededNoise;
use swarmkit::objectives::ObjectiveSpec;
use swarmkit::swarm::{run, step, InitSpec, Mode, SolverParams, SwarmState};

use crate::config::{ExperimentConfig, ExperimentKind, GridBlock};
use crate::error::CliError;
use crate::plot::{emit_plot_columns, PlotSource};

/// Everything needed to repeat a run: the fully resolved config (with
/// command-line overrides folded in) plus what was produced.
#[derive(Debug, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub kind: ExperimentKind,
    pub master_seed: u64,
    pub workers: usize,
    pub wall_seconds: f64,
    pub config: ExperimentConfig,
    pub artifacts: Vec<String>,
    pub summary: Value,
}

pub const MANIFEST: &str = "manifest.json";

struct Output {
    dir: PathBuf,
    written: Vec<String>,
}

impl Output {
    fn create(dir: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            written: Vec::new(),
        })
    }

    fn path(&mut self, name: &str) -> PathBuf {
        self.written.push(name.to_string());
        self.dir.join(name)
    }

    fn columns(&mut self, name: &str, source: PlotSource<'_>) -> Result<(), CliError> {
        let path = self.path(name);
        let file = fs::File::create(&path).map_err(|e| CliError::io(&path, e))?;
        let mut out = std::io::BufWriter::new(file);
        emit_plot_columns(source, &mut out).map_err(|e| CliError::io(&path, e))?;
        std::io::Write::flush(&mut out).map_err(|e| CliError::io(&path, e))
    }

    fn snapshot(&mut self, name: &str, field: &DensityField) -> Result<(), CliError> {
        let path = self.path(name);
        meanfield::io::save(field, &path)?;
        Ok(())
    }
}

/// Time label used in file names, e.g. `0.5` -> `t0.5`.
fn stamp(t: f64) -> String {
    format!("t{t}")
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<Manifest, CliError> {
    let start = Instant::now();
    let mut out = Output::create(Path::new(&config.output.dir))?;
    let summary = match config.kind {
        ExperimentKind::ParticleRun => particle_run(config, &mut out)?,
        ExperimentKind::ParticleSweep => particle_sweep(config, &mut out)?,
        ExperimentKind::MeanfieldRun => meanfield_run(config, &mut out)?,
        ExperimentKind::InertiaComparison => inertia_comparison(config, &mut out)?,
        ExperimentKind::MeanfieldVsParticle => meanfield_vs_particle(config, &mut out)?,
    };
    let mut manifest = Manifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        kind: config.kind,
        master_seed: config.seeds.master,
        workers: current_workers(),
        wall_seconds: 0.0,
        config: config.clone(),
        artifacts: out.written.clone(),
        summary,
    };
    manifest.wall_seconds = start.elapsed().as_secs_f64();
    let path = out.dir.join(MANIFEST);
    let text = serde_json::to_string_pretty(&manifest)?;
    fs::write(&path, text + "\n").map_err(|e| CliError::io(&path, e))?;
    Ok(manifest)
}

fn current_workers() -> usize {
    #[cfg(feature = "parallel")]
    {
        rayon::current_num_threads()
    }
    #[cfg(not(feature = "parallel"))]
    {
        1
    }
}

fn particle_run(config: &ExperimentConfig, out: &mut Output) -> Result<Value, CliError> {
    let objective = config.objective.spec();
    let params = config.solver.params(objective.bounds)?;
    let init = config.init.spec(objective.bounds, config.init.particles);
    let objective = objective.with_xsy_seed(config.seeds.master);
    let report = run(
        &params,
        &objective,
        &init,
        &config.stop.rule(),
        config.seeds.master,
        0,
    )?;
    let outcome = evaluate_run(
        &report,
        &SuccessRule::new(config.success.delta_err, objective.minimizer()),
    );
    if report.iterations > 0 {
        let path = out.path("trajectory.dat");
        let mut text = String::from("# iteration consensus coordinates\n");
        for (n, point) in report.trajectory.iter().enumerate() {
            text.push_str(&n.to_string());
            for c in point {
                text.push(' ');
                text.push_str(&c.to_string());
            }
            text.push('\n');
        }
        fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
    }
    Ok(json!({
        "iterations": report.iterations,
        "stop_reason": report.stop_reason,
        "final_consensus": report.final_consensus,
        "success": outcome.success,
        "error": outcome.error,
    }))
}

fn or_default<T: Copy>(values: &[T], fallback: T) -> Vec<T> {
    if values.is_empty() {
        vec![fallback]
    } else {
        values.to_vec()
    }
}

fn particle_sweep(config: &ExperimentConfig, out: &mut Output) -> Result<Value, CliError> {
    let sweep = config.sweep.clone().unwrap_or_default();
    let objective = config.objective.spec();
    let s = config.solver;
    let mut table = BenchTable::default();
    for &m in &or_default(&sweep.m, s.m) {
        for &sigma2 in &or_default(&sweep.sigma2, s.sigma2) {
            for &alpha in &or_default(&sweep.alpha, s.alpha) {
                for &xi in &or_default(&sweep.xi, s.xi.unwrap_or(f64::NAN)) {
                    for &particles in &or_default(&sweep.particles, config.init.particles) {
                        for &dt in &or_default(&sweep.dt, s.dt) {
                            let mut block = s;
                            block.m = m;
                            block.sigma2 = sigma2;
                            block.alpha = alpha;
                            block.dt = dt;
                            block.xi = (!xi.is_nan()).then_some(xi);
                            let params = block.params(objective.bounds)?;
                            let cell = EnsembleConfig {
                                objective: objective.clone(),
                                params,
                                init: config.init.spec(objective.bounds, particles),
                                stop: config.stop.rule(),
                                delta_err: config.success.delta_err,
                                xi: if xi.is_nan() { 0.0 } else { xi },
                            };
                            let row = run_ensemble(&cell, config.seeds.runs, config.seeds.master)?;
                            eprintln!(
                                "cell m={m} sigma2={sigma2} alpha={alpha} N={particles} dt={dt}: rate {:.3}",
                                row.rate
                            );
                            table.rows.push(row);
                        }
                    }
                }
            }
        }
    }
    let path = out.path("table.csv");
    table.save_csv(&path)?;
    out.columns("table.dat", PlotSource::Table(&table))?;
    Ok(json!({ "cells": table.rows.len(), "runs_per_cell": config.seeds.runs }))
}

/// Grid, parameters and initial density of a mean-field run. Positions start
/// uniform on the x axis; velocities start Gaussian; memory starts at y = x.
fn meanfield_setup(
    grid_block: &GridBlock,
    params: SolverParams,
    objective: &ObjectiveSpec,
) -> Result<(MeanFieldProblem, DensityField), CliError> {
    let x = grid_block.x.axis();
    let memory = params.mode.has_memory();
    let kinetic = params.mode.has_velocity();
    let grid = PhaseGrid {
        axes: Axes {
            x,
            y: memory.then_some(x),
            v: kinetic.then(|| grid_block.v.axis()),
        },
        dt: grid_block.dt,
        splitting: grid_block.splitting,
        time_scheme: grid_block.time_scheme,
        velocity_flux: grid_block.velocity_flux,
    };
    let problem = MeanFieldProblem::new(grid, params, objective)?;
    let s2 = 2.0 * grid_block.velocity_std.powi(2);
    let profile = |v: f64| if kinetic { (-v * v / s2).exp() } else { 1.0 };
    let mut f = if memory {
        DensityField::on_diagonal(grid.axes, |_| 1.0, profile)?
    } else {
        DensityField::from_fn(grid.axes, |_, _, v| profile(v))
    };
    f.normalize()?;
    Ok((problem, f))
}

fn meanfield_run(config: &ExperimentConfig, out: &mut Output) -> Result<Value, CliError> {
    let grid = config.grid.clone().unwrap_or_default();
    let objective = config.objective.spec();
    let params = config.solver.params(objective.bounds)?;
    let (problem, mut f) = meanfield_setup(&grid, params, &objective)?;
    let ext = grid.format.extension();
    let mut snapshots = Vec::new();
    for &t in &grid.times {
        problem.advance_to(&mut f, t)?;
        let tag = stamp(t);
        out.snapshot(&format!("density_{tag}.{ext}"), &f)?;
        out.columns(
            &format!("marginal_{tag}.dat"),
            PlotSource::Density(&marginal(&f, &[AxisName::X])),
        )?;
        if f.axes.y.is_some() || f.axes.v.is_some() {
            out.columns(&format!("phase_{tag}.dat"), PlotSource::Density(&f))?;
        }
        snapshots.push(json!({
            "time": f.time,
            "mass": f.mass(),
            "consensus": problem.consensus(&f).ok(),
            "min_over_max": f.min_value() / f.max_value(),
        }));
    }
    Ok(json!({ "snapshots": snapshots }))
}

/// Steps a swarm forward to each requested time and histograms its first
/// coordinate on the mean-field x cells.
fn particle_histograms(
    params: &SolverParams,
    objective: &ObjectiveSpec,
    init: &InitSpec,
    times: &[f64],
    axis: meanfield::Axis,
    seed: u64,
    run_index: u64,
) -> Result<Vec<DensityField>, CliError> {
    let noise = SeededNoise::new(seed, run_index);
    let mut state = SwarmState::sample(init, params, objective, &mut noise.init_rng())?;
    let mut steps = 0usize;
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        let target = (t / params.dt).round() as usize;
        while steps < target {
            step(&mut state, params, objective, &noise)?;
            steps += 1;
        }
        let mut h = histogram(state.particles.iter().map(|p| p.position[0]), axis);
        h.time = steps as f64 * params.dt;
        out.push(h);
    }
    Ok(out)
}

fn inertia_comparison(config: &ExperimentConfig, out: &mut Output) -> Result<Value, CliError> {
    let grid = config.grid.clone().unwrap_or_default();
    let comparison = config.comparison.clone().unwrap_or_default();
    let objective = config.objective.spec();
    let base = config.solver.params(objective.bounds)?;
    let first_order = SolverParams {
        mode: Mode::Cbo,
        m: 0.0,
        ..base
    };
    let (problem, mut rho) = meanfield_setup(&grid, first_order, &objective)?;
    let mut limits = Vec::new();
    for &t in &grid.times {
        problem.advance_to(&mut rho, t)?;
        out.columns(&format!("cbo_{}.dat", stamp(t)), PlotSource::Density(&rho))?;
        limits.push(rho.clone());
    }
    let init = config.init.spec(objective.bounds, comparison.particles);
    let mut distances = Vec::new();
    for (i, &m) in comparison.inertias.iter().enumerate() {
        let params = SolverParams {
            mode: Mode::SdpsoNoMemory,
            m,
            ..base
        };
        let hists = particle_histograms(
            &params,
            &objective,
            &init,
            &grid.times,
            grid.x.axis(),
            config.seeds.master,
            i as u64,
        )?;
        for ((h, limit), &t) in hists.iter().zip(&limits).zip(&grid.times) {
            out.columns(
                &format!("particles_m{m}_{}.dat", stamp(t)),
                PlotSource::Density(h),
            )?;
            distances.push(json!({ "m": m, "time": t, "l1": h.l1_distance(limit)? }));
        }
    }
    Ok(json!({ "l1_to_first_order": distances }))
}

fn meanfield_vs_particle(config: &ExperimentConfig, out: &mut Output) -> Result<Value, CliError> {
    let grid = config.grid.clone().unwrap_or_default();
    let comparison = config.comparison.clone().unwrap_or_default();
    let objective = config.objective.spec();
    let params = config.solver.params(objective.bounds)?;
    let (problem, mut f) = meanfield_setup(&grid, params, &objective)?;
    let mut init = config.init.spec(objective.bounds, comparison.particles);
    if params.mode.has_velocity() {
        init.velocities = swarmkit::swarm::VelocityInit::Gaussian {
            std: grid.velocity_std,
        };
    }
    let hists = particle_histograms(
        &params,
        &objective,
        &init,
        &grid.times,
        grid.x.axis(),
        config.seeds.master,
        0,
    )?;
    let ext = grid.format.extension();
    let mut pairs = Vec::new();
    for (h, &t) in hists.iter().zip(&grid.times) {
        problem.advance_to(&mut f, t)?;
        let tag = stamp(t);
        let rho = marginal(&f, &[AxisName::X]);
        out.snapshot(&format!("density_{tag}.{ext}"), &f)?;
        out.columns(&format!("meanfield_{tag}.dat"), PlotSource::Density(&rho))?;
        out.columns(&format!("particles_{tag}.dat"), PlotSource::Density(h))?;
        pairs.push(json!({ "time": t, "l1": h.l1_distance(&rho)? }));
    }
    Ok(json!({ "particles": comparison.particles, "l1_by_time": pairs }))
}

//! Experiment configuration files.
//!
//! A config is a JSON document. Every block except `kind` and the objective
//! name has defaults, and unknown keys are rejected so typos surface early.

use serde::{Deserialize, Serialize};

use swarmkit::bench::{couple_local_global, StopRule};
use swarmkit::meanfield::{Axis, Splitting, TimeScheme, VelocityFlux};
use swarmkit::noise::NoiseKind;
use swarmkit::objectives::{Bounds, ObjectiveKind, ObjectiveSpec};
use swarmkit::swarm::{Boundary, InitSpec, Mode, PositionInit, SolverParams, VelocityInit};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    ParticleRun,
    ParticleSweep,
    MeanfieldRun,
    InertiaComparison,
    MeanfieldVsParticle,
}

impl ExperimentKind {
    pub fn is_sweep(self) -> bool {
        self == ExperimentKind::ParticleSweep
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub objective: ObjectiveBlock,
    #[serde(default)]
    pub solver: SolverBlock,
    #[serde(default)]
    pub init: InitBlock,
    #[serde(default)]
    pub stop: StopBlock,
    #[serde(default)]
    pub success: SuccessBlock,
    #[serde(default)]
    pub seeds: SeedBlock,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub comparison: Option<ComparisonBlock>,
    #[serde(default)]
    pub output: OutputBlock,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectiveBlock {
    pub name: ObjectiveKind,
    #[serde(default = "defaults::dim")]
    pub dim: usize,
    #[serde(default)]
    pub shift: f64,
    #[serde(default)]
    pub offset: f64,
    /// Search box and initial sampling box for every coordinate.
    #[serde(default = "defaults::lower")]
    pub lower: f64,
    #[serde(default = "defaults::upper")]
    pub upper: f64,
    /// Frozen weights for the random function.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
}

impl ObjectiveBlock {
    pub fn spec(&self) -> ObjectiveSpec {
        let bounds = Bounds::new(self.lower, self.upper);
        let spec = ObjectiveSpec::new(self.name, self.dim)
            .with_shift(self.shift)
            .with_offset(self.offset)
            .with_bounds(bounds);
        match &self.weights {
            Some(w) => spec.with_noise(w.clone()),
            None => spec,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryBlock {
    #[default]
    None,
    /// Clamp positions to the objective's search box.
    Clamp,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverBlock {
    pub mode: Mode,
    pub m: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub sigma1: f64,
    pub sigma2: f64,
    /// When set, overrides `lambda1`/`sigma1` with `xi` times the global ones.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub xi: Option<f64>,
    pub nu: f64,
    pub beta: f64,
    pub alpha: f64,
    pub dt: f64,
    pub noise: NoiseKind,
    pub boundary: BoundaryBlock,
    pub pso_constraint: bool,
}

impl Default for SolverBlock {
    fn default() -> Self {
        let p = SolverParams::default();
        Self {
            mode: p.mode,
            m: p.m,
            lambda1: p.lambda1,
            lambda2: p.lambda2,
            sigma1: p.sigma1,
            sigma2: p.sigma2,
            xi: None,
            nu: p.nu,
            beta: p.beta,
            alpha: p.alpha,
            dt: p.dt,
            noise: p.noise,
            boundary: BoundaryBlock::None,
            pso_constraint: p.pso_constraint,
        }
    }
}

impl SolverBlock {
    pub fn params(&self, bounds: Bounds) -> Result<SolverParams, CliError> {
        let (lambda1, sigma1) = match self.xi {
            Some(xi) => couple_local_global(xi, self.lambda2, self.sigma2)
                .map_err(|e| CliError::invalid("solver.xi", e.to_string()))?,
            None => (self.lambda1, self.sigma1),
        };
        Ok(SolverParams {
            mode: self.mode,
            m: self.m,
            lambda1,
            lambda2: self.lambda2,
            sigma1,
            sigma2: self.sigma2,
            nu: self.nu,
            beta: self.beta,
            alpha: self.alpha,
            dt: self.dt,
            noise: self.noise,
            boundary: match self.boundary {
                BoundaryBlock::None => Boundary::None,
                BoundaryBlock::Clamp => Boundary::clamp_to(bounds),
            },
            pso_constraint: self.pso_constraint,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InitBlock {
    pub particles: usize,
    /// Spread of Gaussian initial velocities; zero starts at rest.
    pub velocity_std: f64,
}

impl Default for InitBlock {
    fn default() -> Self {
        Self {
            particles: 100,
            velocity_std: 0.0,
        }
    }
}

impl InitBlock {
    /// Positions uniform on the search box.
    pub fn spec(&self, bounds: Bounds, particles: usize) -> InitSpec {
        InitSpec {
            particles,
            positions: PositionInit::Uniform {
                lower: bounds.lower,
                upper: bounds.upper,
            },
            velocities: if self.velocity_std > 0.0 {
                VelocityInit::Gaussian {
                    std: self.velocity_std,
                }
            } else {
                VelocityInit::Zero
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StopBlock {
    pub delta_stall: f64,
    pub n_stall: u64,
    pub max_iter: u64,
}

impl Default for StopBlock {
    fn default() -> Self {
        let s = StopRule::default();
        Self {
            delta_stall: s.delta_stall,
            n_stall: s.n_stall,
            max_iter: s.max_iter,
        }
    }
}

impl StopBlock {
    pub fn rule(&self) -> StopRule {
        StopRule {
            delta_stall: self.delta_stall,
            n_stall: self.n_stall,
            max_iter: self.max_iter,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SuccessBlock {
    pub delta_err: f64,
}

impl Default for SuccessBlock {
    fn default() -> Self {
        Self { delta_err: 0.25 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SeedBlock {
    pub master: u64,
    /// Independent runs per sweep cell.
    pub runs: usize,
}

impl Default for SeedBlock {
    fn default() -> Self {
        Self {
            master: 0,
            runs: 100,
        }
    }
}

/// Cartesian product of the listed values; an empty list keeps the solver
/// block's value.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepBlock {
    pub m: Vec<f64>,
    pub sigma2: Vec<f64>,
    pub alpha: Vec<f64>,
    pub xi: Vec<f64>,
    pub particles: Vec<usize>,
    pub dt: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisBlock {
    pub lower: f64,
    pub upper: f64,
    pub cells: usize,
}

impl AxisBlock {
    pub fn axis(&self) -> Axis {
        Axis::new(self.lower, self.upper, self.cells)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridBlock {
    pub x: AxisBlock,
    /// Velocity axis of the kinetic runs.
    pub v: AxisBlock,
    pub dt: f64,
    pub splitting: Splitting,
    pub time_scheme: TimeScheme,
    pub velocity_flux: VelocityFlux,
    /// Snapshot times; the run ends at the last one.
    pub times: Vec<f64>,
    /// Spread of the Gaussian initial velocity profile.
    pub velocity_std: f64,
    pub format: SnapshotFormat,
}

impl Default for GridBlock {
    fn default() -> Self {
        Self {
            x: AxisBlock {
                lower: -3.0,
                upper: 3.0,
                cells: 90,
            },
            v: AxisBlock {
                lower: -4.0,
                upper: 4.0,
                cells: 120,
            },
            dt: 1e-3,
            splitting: Splitting::default(),
            time_scheme: TimeScheme::default(),
            velocity_flux: VelocityFlux::default(),
            times: vec![0.5, 1.0, 3.0],
            velocity_std: 0.25,
            format: SnapshotFormat::Csv,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SnapshotFormat {
    #[default]
    Csv,
    Binary,
}

impl SnapshotFormat {
    pub fn extension(self) -> &'static str {
        match self {
            SnapshotFormat::Csv => "csv",
            SnapshotFormat::Binary => "bin",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ComparisonBlock {
    /// Inertia weights compared against the first-order limit.
    pub inertias: Vec<f64>,
    /// Particles per histogram.
    pub particles: usize,
}

impl Default for ComparisonBlock {
    fn default() -> Self {
        Self {
            inertias: vec![0.5, 0.1, 0.01],
            particles: 100_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputBlock {
    pub dir: String,
}

impl Default for OutputBlock {
    fn default() -> Self {
        Self { dir: "out".into() }
    }
}

mod defaults {
    pub fn dim() -> usize {
        1
    }

    pub fn lower() -> f64 {
        -3.0
    }

    pub fn upper() -> f64 {
        3.0
    }
}

/// Parses and validates a config document.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let mut config: ExperimentConfig =
        serde_path_to_error::deserialize(de).map_err(|e| CliError::Parse {
            path: e.path().to_string(),
            message: e.inner().to_string(),
        })?;
    config.fill_defaults();
    config.validate()?;
    Ok(config)
}

impl ExperimentConfig {
    /// Adds the blocks the kind needs but the document left out.
    fn fill_defaults(&mut self) {
        use ExperimentKind::*;
        match self.kind {
            ParticleSweep => {
                self.sweep.get_or_insert_with(SweepBlock::default);
            }
            MeanfieldRun => {
                self.grid.get_or_insert_with(GridBlock::default);
            }
            MeanfieldVsParticle => {
                self.grid.get_or_insert_with(GridBlock::default);
                self.comparison.get_or_insert_with(ComparisonBlock::default);
            }
            InertiaComparison => {
                self.grid.get_or_insert_with(|| GridBlock {
                    x: AxisBlock {
                        lower: -3.0,
                        upper: 3.0,
                        cells: 120,
                    },
                    times: vec![2.0],
                    ..GridBlock::default()
                });
                self.comparison.get_or_insert_with(ComparisonBlock::default);
            }
            ParticleRun => {}
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let o = &self.objective;
        if o.dim == 0 {
            return Err(CliError::invalid("objective.dim", "must be at least 1"));
        }
        let spec = o.spec();
        spec.validate()
            .map_err(|e| CliError::invalid("objective", e.to_string()))?;

        let s = &self.solver;
        let positive = |path: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(CliError::invalid(
                    path,
                    format!("must be positive, got {v}"),
                ))
            }
        };
        let nonneg = |path: &str, v: f64| {
            if v >= 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(CliError::invalid(
                    path,
                    format!("must be nonnegative, got {v}"),
                ))
            }
        };
        positive("solver.dt", s.dt)?;
        if !(0.0..=1.0).contains(&s.m) {
            return Err(CliError::invalid(
                "solver.m",
                format!("must lie in [0, 1], got {}", s.m),
            ));
        }
        for (path, v) in [
            ("solver.lambda1", s.lambda1),
            ("solver.lambda2", s.lambda2),
            ("solver.sigma1", s.sigma1),
            ("solver.sigma2", s.sigma2),
            ("solver.alpha", s.alpha),
            ("solver.nu", s.nu),
            ("solver.beta", s.beta),
        ] {
            nonneg(path, v)?;
        }
        if let Some(xi) = s.xi {
            if !(0.0..=1.0).contains(&xi) {
                return Err(CliError::invalid(
                    "solver.xi",
                    format!("must lie in [0, 1], got {xi}"),
                ));
            }
        }
        s.params(spec.bounds)?
            .validate()
            .map_err(|e| CliError::invalid("solver", e.to_string()))?;

        if self.init.particles == 0 {
            return Err(CliError::invalid("init.particles", "must be at least 1"));
        }
        nonneg("init.velocity_std", self.init.velocity_std)?;
        positive("stop.delta_stall", self.stop.delta_stall)?;
        if self.stop.n_stall == 0 {
            return Err(CliError::invalid("stop.n_stall", "must be at least 1"));
        }
        positive("success.delta_err", self.success.delta_err)?;
        if self.seeds.runs == 0 {
            return Err(CliError::invalid("seeds.runs", "must be at least 1"));
        }

        if let Some(sweep) = &self.sweep {
            for &m in &sweep.m {
                if !(0.0..=1.0).contains(&m) {
                    return Err(CliError::invalid(
                        "sweep.m",
                        format!("must lie in [0, 1], got {m}"),
                    ));
                }
            }
            for &v in &sweep.sigma2 {
                nonneg("sweep.sigma2", v)?;
            }
            for &v in &sweep.alpha {
                nonneg("sweep.alpha", v)?;
            }
            for &xi in &sweep.xi {
                if !(0.0..=1.0).contains(&xi) {
                    return Err(CliError::invalid(
                        "sweep.xi",
                        format!("must lie in [0, 1], got {xi}"),
                    ));
                }
            }
            for &dt in &sweep.dt {
                positive("sweep.dt", dt)?;
            }
            if sweep.particles.contains(&0) {
                return Err(CliError::invalid("sweep.particles", "must be at least 1"));
            }
        }

        if let Some(grid) = &self.grid {
            positive("grid.dt", grid.dt)?;
            nonneg("grid.velocity_std", grid.velocity_std)?;
            for (name, a) in [("x", grid.x), ("v", grid.v)] {
                a.axis().validate(name)?;
            }
            if grid.times.is_empty() {
                return Err(CliError::invalid("grid.times", "needs at least one time"));
            }
            if grid.times.iter().any(|t| !(*t >= 0.0 && t.is_finite()))
                || grid.times.windows(2).any(|w| w[1] <= w[0])
            {
                return Err(CliError::invalid(
                    "grid.times",
                    "must be nonnegative and increasing",
                ));
            }
            if s.mode.has_velocity() {
                positive("grid.velocity_std", grid.velocity_std)?;
            }
            if o.dim != 1 {
                return Err(CliError::invalid(
                    "objective.dim",
                    "mean-field runs are one-dimensional",
                ));
            }
        }
        if let Some(c) = &self.comparison {
            if c.inertias.is_empty() {
                return Err(CliError::invalid(
                    "comparison.inertias",
                    "needs at least one value",
                ));
            }
            for &m in &c.inertias {
                if !(0.0..=1.0).contains(&m) {
                    return Err(CliError::invalid(
                        "comparison.inertias",
                        format!("must lie in [0, 1], got {m}"),
                    ));
                }
            }
            if c.particles == 0 {
                return Err(CliError::invalid(
                    "comparison.particles",
                    "must be at least 1",
                ));
            }
        }
        if self.output.dir.is_empty() {
            return Err(CliError::invalid("output.dir", "must not be empty"));
        }
        Ok(())
    }
}

//! Repeated seeded runs, success statistics and result tables.

use std::io;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::noise::derive_seed;
use crate::objectives::{ObjectiveKind, ObjectiveSpec};
use crate::par;
use crate::swarm::{run, InitSpec, RunReport, SolverParams};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StopRule {
    pub delta_stall: f64,
    pub n_stall: u64,
    pub max_iter: u64,
}

impl Default for StopRule {
    fn default() -> Self {
        Self {
            delta_stall: 1e-4,
            n_stall: 250,
            max_iter: 10_000,
        }
    }
}

impl StopRule {
    pub fn validate(&self) -> Result<()> {
        if !(self.delta_stall > 0.0) {
            return Err(Error::invalid("stop.delta_stall", "must be positive"));
        }
        if self.n_stall == 0 {
            return Err(Error::invalid("stop.n_stall", "must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuccessRule {
    pub delta_err: f64,
    pub x_min: Vec<f64>,
}

impl SuccessRule {
    pub fn new(delta_err: f64, x_min: Vec<f64>) -> Self {
        Self { delta_err, x_min }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta_err > 0.0) {
            return Err(Error::invalid("success.delta_err", "must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunOutcome {
    pub success: bool,
    /// Euclidean distance from the final consensus to the minimizer.
    pub error: f64,
    pub iterations: u64,
}

/// Success iff the final consensus is strictly inside the sup-norm ball of
/// radius `delta_err` around the minimizer.
pub fn evaluate_run(report: &RunReport, success: &SuccessRule) -> RunOutcome {
    let (sup, sq) = report.final_consensus.iter().zip(&success.x_min).fold(
        (0.0f64, 0.0),
        |(sup, sq), (a, b)| {
            let d = (a - b).abs();
            (sup.max(d), sq + d * d)
        },
    );
    RunOutcome {
        success: sup < success.delta_err,
        error: sq.sqrt(),
        iterations: report.iterations,
    }
}

/// Rate, mean error over successes, and mean iterations over all runs.
pub fn aggregate(outcomes: &[RunOutcome]) -> (f64, Option<f64>, f64) {
    if outcomes.is_empty() {
        return (0.0, None, 0.0);
    }
    let n = outcomes.len() as f64;
    let wins: Vec<f64> = outcomes
        .iter()
        .filter(|o| o.success)
        .map(|o| o.error)
        .collect();
    let rate = wins.len() as f64 / n;
    let error = (!wins.is_empty()).then(|| wins.iter().sum::<f64>() / wins.len() as f64);
    let n_iter = outcomes.iter().map(|o| o.iterations as f64).sum::<f64>() / n;
    (rate, error, n_iter)
}

/// `λ1 = ξ λ2`, `σ1 = ξ σ2`.
pub fn couple_local_global(xi: f64, lambda2: f64, sigma2: f64) -> Result<(f64, f64)> {
    if !(0.0..=1.0).contains(&xi) {
        return Err(Error::invalid(
            "xi",
            format!("must lie in [0, 1], got {xi}"),
        ));
    }
    Ok((xi * lambda2, xi * sigma2))
}

/// One cell of a parameter sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleConfig {
    pub objective: ObjectiveSpec,
    pub params: SolverParams,
    pub init: InitSpec,
    pub stop: StopRule,
    pub delta_err: f64,
    /// Local/global coupling label; `params` already carries the coefficients.
    pub xi: f64,
}

impl EnsembleConfig {
    fn objective_for_run(&self, master_seed: u64, run_index: u64) -> ObjectiveSpec {
        if self.objective.kind == ObjectiveKind::XsyRandom && self.objective.frozen_noise.is_none()
        {
            self.objective
                .clone()
                .with_xsy_seed(derive_seed(&[master_seed, run_index, 0x78_7379]))
        } else {
            self.objective.clone()
        }
    }
}

/// Runs `n_runs` independent seeded runs and aggregates them.
///
/// Run `i` uses the streams keyed by `(master_seed, i)`. XSY weights, when not
/// fixed in the config, are drawn once per run.
pub fn run_ensemble(cfg: &EnsembleConfig, n_runs: usize, master_seed: u64) -> Result<BenchRow> {
    if n_runs == 0 {
        return Err(Error::invalid("n_r", "must be at least 1"));
    }
    let success = SuccessRule::new(cfg.delta_err, cfg.objective.minimizer());
    success.validate()?;
    let start = Instant::now();
    let outcomes = par::map_range(n_runs, |i| {
        let objective = cfg.objective_for_run(master_seed, i as u64);
        objective.validate()?;
        let report = run(
            &cfg.params,
            &objective,
            &cfg.init,
            &cfg.stop,
            master_seed,
            i as u64,
        )?;
        Ok(evaluate_run(&report, &success))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let (rate, error, n_iter) = aggregate(&outcomes);
    let p = &cfg.params;
    Ok(BenchRow {
        function: cfg.objective.kind.name().to_string(),
        mode: p.mode.name().to_string(),
        m: p.m,
        sigma1: p.sigma1,
        sigma2: p.sigma2,
        lambda1: p.lambda1,
        lambda2: p.lambda2,
        alpha: p.alpha,
        beta: p.beta,
        nu: p.nu,
        xi: cfg.xi,
        n: cfg.init.particles,
        n_r: n_runs,
        rate,
        error,
        n_iter,
        wall_seconds: start.elapsed().as_secs_f64(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub function: String,
    pub mode: String,
    pub m: f64,
    pub sigma1: f64,
    pub sigma2: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub alpha: f64,
    pub beta: f64,
    pub nu: f64,
    pub xi: f64,
    #[serde(rename = "N")]
    pub n: usize,
    pub n_r: usize,
    pub rate: f64,
    pub error: Option<f64>,
    pub n_iter: f64,
    pub wall_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct BenchTable {
    pub rows: Vec<BenchRow>,
}

impl BenchTable {
    pub fn write_csv<W: io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        if self.rows.is_empty() {
            w.write_record([
                "function",
                "mode",
                "m",
                "sigma1",
                "sigma2",
                "lambda1",
                "lambda2",
                "alpha",
                "beta",
                "nu",
                "xi",
                "N",
                "n_r",
                "rate",
                "error",
                "n_iter",
                "wall_seconds",
            ])?;
        }
        for row in &self.rows {
            w.serialize(row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }

    pub fn read_csv<R: io::Read>(input: R) -> Result<Self> {
        let rows = csv::Reader::from_reader(input)
            .deserialize()
            .collect::<std::result::Result<Vec<BenchRow>, _>>()?;
        Ok(Self { rows })
    }
}

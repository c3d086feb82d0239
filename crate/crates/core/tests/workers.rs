//! Results must not depend on how many threads do the work.

use rayon::ThreadPoolBuilder;

use swarmkit::bench::{run_ensemble, EnsembleConfig, StopRule};
use swarmkit::meanfield::{DensityField, MeanFieldProblem, PhaseGrid};
use swarmkit::objectives::{ObjectiveKind, ObjectiveSpec};
use swarmkit::swarm::{InitSpec, Mode, SolverParams};

fn with_workers<T: Send>(workers: usize, job: impl FnOnce() -> T + Send) -> T {
    ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .unwrap()
        .install(job)
}

#[test]
fn ensemble_rows_match_across_worker_counts() {
    let cfg = EnsembleConfig {
        objective: ObjectiveSpec::new(ObjectiveKind::Rastrigin, 4),
        params: SolverParams {
            alpha: 50.0,
            dt: 0.05,
            ..SolverParams::global(Mode::SdpsoNoMemory, 0.3, 1.0, 1.5)
        },
        init: InitSpec::uniform(200, -3.0, 3.0),
        stop: StopRule {
            max_iter: 150,
            ..StopRule::default()
        },
        delta_err: 0.25,
        xi: 0.0,
    };
    let one = with_workers(1, || run_ensemble(&cfg, 6, 42).unwrap());
    let four = with_workers(4, || run_ensemble(&cfg, 6, 42).unwrap());
    assert_eq!(one.rate, four.rate);
    assert_eq!(one.error, four.error);
    assert_eq!(one.n_iter, four.n_iter);
}

#[test]
fn kinetic_density_matches_across_worker_counts() {
    let grid = PhaseGrid {
        dt: 0.01,
        ..PhaseGrid::standard(true, true)
    };
    let params = SolverParams {
        mode: Mode::SdpsoMemory,
        m: 0.5,
        lambda1: 1.0,
        sigma1: 0.5,
        lambda2: 1.0,
        sigma2: 0.5,
        alpha: 30.0,
        beta: 30.0,
        nu: 0.5,
        ..SolverParams::default()
    };
    let objective = ObjectiveSpec::new(ObjectiveKind::Ackley, 1);
    let problem = MeanFieldProblem::new(grid, params, &objective).unwrap();
    let advance = || {
        let mut f =
            DensityField::on_diagonal(grid.axes, |x| (-x * x).exp(), |v| (-4.0 * v * v).exp())
                .unwrap();
        f.normalize().unwrap();
        for _ in 0..3 {
            problem.step(&mut f).unwrap();
        }
        f
    };
    let one = with_workers(1, advance);
    let three = with_workers(3, advance);
    assert_eq!(one.values, three.values);
}

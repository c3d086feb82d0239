//! One worker against the full rayon pool on the two hot loops: a particle
//! step and a kinetic mean-field step. Build with `--no-default-features`
//! to time the sequential fallback instead.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rayon::{ThreadPool, ThreadPoolBuilder};

use swarmkit::meanfield::{DensityField, MeanFieldProblem, PhaseGrid};
use swarmkit::noise::SeededNoise;
use swarmkit::objectives::{ObjectiveKind, ObjectiveSpec};
use swarmkit::swarm::{step, InitSpec, Mode, SolverParams, SwarmState};

fn pools() -> Vec<(String, ThreadPool)> {
    let all = std::thread::available_parallelism().map_or(1, |n| n.get());
    let mut sizes = vec![1];
    if all > 1 {
        sizes.push(all);
    }
    sizes
        .into_iter()
        .map(|k| {
            let pool = ThreadPoolBuilder::new().num_threads(k).build().unwrap();
            (format!("{k}_workers"), pool)
        })
        .collect()
}

fn particle_step(c: &mut Criterion) {
    let objective = ObjectiveSpec::new(ObjectiveKind::Rastrigin, 20);
    let params = SolverParams {
        alpha: 5e4,
        dt: 0.01,
        ..SolverParams::global(Mode::SdpsoNoMemory, 0.2, 1.0, 5.0)
    };
    let noise = SeededNoise::new(1, 0);
    let init = InitSpec::uniform(20_000, -3.0, 3.0);
    let start = SwarmState::sample(&init, &params, &objective, &mut noise.init_rng()).unwrap();
    let mut group = c.benchmark_group("particle_step");
    for (name, pool) in pools() {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter_batched_ref(
                || start.clone(),
                |state| pool.install(|| step(state, &params, &objective, &noise).unwrap()),
                criterion::BatchSize::LargeInput,
            )
        });
    }
    group.finish();
}

fn kinetic_step(c: &mut Criterion) {
    let grid = PhaseGrid::standard(false, true);
    let params = SolverParams {
        alpha: 30.0,
        ..SolverParams::global(Mode::SdpsoNoMemory, 0.5, 1.0, 1.0 / 3f64.sqrt())
    };
    let objective = ObjectiveSpec::new(ObjectiveKind::Ackley, 1);
    let problem = MeanFieldProblem::new(grid, params, &objective).unwrap();
    let mut start = DensityField::from_fn(grid.axes, |x, _, v| (-x * x - 4.0 * v * v).exp());
    start.normalize().unwrap();
    let mut group = c.benchmark_group("kinetic_step");
    for (name, pool) in pools() {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter_batched_ref(
                || start.clone(),
                |f| pool.install(|| problem.step(f).unwrap()),
                criterion::BatchSize::LargeInput,
            )
        });
    }
    group.finish();
}

criterion_group!(benches, particle_step, kinetic_step);
criterion_main!(benches);

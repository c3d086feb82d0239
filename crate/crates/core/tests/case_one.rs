//! The kinetic mean-field run on the one-dimensional Ackley function.

use swarmkit::meanfield::{marginal, AxisName, DensityField, MeanFieldProblem, PhaseGrid};
use swarmkit::objectives::{ObjectiveKind, ObjectiveSpec};
use swarmkit::swarm::{Mode, SolverParams};

fn problem(shift: f64) -> (PhaseGrid, MeanFieldProblem) {
    let grid = PhaseGrid {
        dt: 0.005,
        ..PhaseGrid::standard(false, true)
    };
    let params = SolverParams {
        alpha: 30.0,
        ..SolverParams::global(Mode::SdpsoNoMemory, 0.5, 1.0, 1.0 / 3f64.sqrt())
    };
    let objective = ObjectiveSpec::new(ObjectiveKind::Ackley, 1).with_shift(shift);
    (
        grid,
        MeanFieldProblem::new(grid, params, &objective).unwrap(),
    )
}

fn mass_near(f: &DensityField, centre: f64, radius: f64) -> f64 {
    let rho = marginal(f, &[AxisName::X]);
    let axis = rho.axes.x;
    (0..axis.cells)
        .filter(|&i| (axis.center(i) - centre).abs() <= radius)
        .map(|i| rho.values[i])
        .sum::<f64>()
        * axis.width()
}

fn run_to(shift: f64, t: f64) -> (DensityField, f64) {
    let (grid, problem) = problem(shift);
    let mut f = DensityField::from_fn(grid.axes, |_, _, v| (-8.0 * v * v).exp());
    f.normalize().unwrap();
    problem.advance_to(&mut f, t).unwrap();
    let consensus = problem.consensus(&f).unwrap();
    (f, consensus)
}

#[test]
fn density_collapses_onto_the_minimizer() {
    let (start, _) = run_to(0.0, 0.0);
    let (f, consensus) = run_to(0.0, 3.0);
    assert!(consensus.abs() < 0.05, "consensus {consensus}");
    let near = mass_near(&f, 0.0, 0.25);
    assert!(near > 0.4, "mass near 0: {near}");
    assert!(near > 5.0 * mass_near(&start, 0.0, 0.25));
}

#[test]
fn shifted_minimizer_is_found() {
    let (f, consensus) = run_to(1.0, 3.0);
    assert!((consensus - 1.0).abs() < 0.05, "consensus {consensus}");
    let near = mass_near(&f, 1.0, 0.25);
    assert!(near > 0.4, "mass near 1: {near}");
}

use proptest::prelude::*;

use super::*;
use crate::bench::{couple_local_global, StopRule};
use crate::noise::{ConstantNoise, NoiseKind, SeededNoise};
use crate::objectives::{Bounds, FnObjective, Objective, ObjectiveKind, ObjectiveSpec};

fn ulps(a: f64, b: f64) -> u64 {
    let key = |x: f64| {
        let i = x.to_bits() as i64;
        if i < 0 {
            i64::MIN - i
        } else {
            i
        }
    };
    key(a).abs_diff(key(b))
}

fn state_1d(params: &SolverParams, obj: &dyn Objective, xs: &[f64]) -> SwarmState {
    SwarmState::from_positions(xs.iter().map(|&x| vec![x]).collect(), None, params, obj).unwrap()
}

fn schwefel(d: usize) -> ObjectiveSpec {
    ObjectiveSpec::new(ObjectiveKind::Schwefel, d)
}

#[test]
fn discrete_free_streaming() {
    let obj = schwefel(2);
    let params = SolverParams::from_acceleration(Mode::DiscretePso, 1.0, 0.0, 0.0);
    let mut s = SwarmState::from_positions(
        vec![vec![0.5, -1.0], vec![2.0, 0.0]],
        Some(vec![vec![0.25, 0.5], vec![-1.0, 1.0]]),
        &params,
        &obj,
    )
    .unwrap();
    let noise = SeededNoise::new(3, 0);
    for n in 1..=4 {
        step_discrete_pso(&mut s, &params, &obj, &noise).unwrap();
        let want0 = [0.5 + 0.25 * n as f64, -1.0 + 0.5 * n as f64];
        assert_eq!(s.particles[0].position, want0);
    }
}

#[test]
fn discrete_fixed_point_at_global_best() {
    let obj = schwefel(1).with_shift(0.3);
    let params = SolverParams::from_acceleration(Mode::DiscretePso, 0.7, 2.0, 2.0);
    let mut s = state_1d(&params, &obj, &[0.3]);
    let noise = SeededNoise::new(1, 0);
    for _ in 0..20 {
        step_discrete_pso(&mut s, &params, &obj, &noise).unwrap();
    }
    assert_eq!(s.particles[0].position, vec![0.3]);
    assert_eq!(s.consensus, vec![0.3]);
}

#[test]
fn discrete_hand_substitution() {
    // |x| in 1D; particles at -2, 1, 3 with velocities 1, 0, -1, R1 = R2 = 1.
    let obj = schwefel(1);
    let (c1, c2, m) = (1.5, 0.5, 0.7);
    let params = SolverParams::from_acceleration(Mode::DiscretePso, m, c1, c2);
    let xs = [-2.0, 1.0, 3.0];
    let vs = [1.0, 0.0, -1.0];
    let mut s = SwarmState::from_positions(
        xs.iter().map(|&x| vec![x]).collect(),
        Some(vs.iter().map(|&v| vec![v]).collect()),
        &params,
        &obj,
    )
    .unwrap();
    assert_eq!(s.consensus, vec![1.0]);
    let forced = ConstantNoise {
        uniform: 1.0,
        gaussian: 0.0,
    };
    step_discrete_pso(&mut s, &params, &obj, &forced).unwrap();
    // y = x initially so the local term vanishes; global best is 1.
    let v_new: Vec<f64> = xs
        .iter()
        .zip(&vs)
        .map(|(x, v)| m * v + c2 * (1.0 - x))
        .collect();
    let x_new: Vec<f64> = xs.iter().zip(&v_new).map(|(x, v)| x + v).collect();
    for i in 0..3 {
        assert!((s.particles[i].velocity[0] - v_new[i]).abs() < 1e-15);
        assert!((s.particles[i].position[0] - x_new[i]).abs() < 1e-15);
    }
    // x: -2 -> -0.8 (better), 1 -> 1 (not better), 3 -> 1.3 (better)
    assert_eq!(s.particles[0].local_best, vec![x_new[0]]);
    assert_eq!(s.particles[1].local_best, vec![1.0]);
    assert_eq!(s.particles[2].local_best, vec![x_new[2]]);
    assert_eq!(s.consensus, vec![x_new[0]]);
}

#[test]
fn sdpso_consensus_fixed_point() {
    let obj = ObjectiveSpec::new(ObjectiveKind::Ackley, 3);
    let params = SolverParams::global(Mode::SdpsoNoMemory, 0.4, 1.0, 0.0);
    let p = vec![0.7, -0.2, 1.1];
    let mut s = SwarmState::from_positions(vec![p.clone(); 5], None, &params, &obj).unwrap();
    let noise = SeededNoise::new(0, 0);
    for _ in 0..10 {
        step_sdpso_no_memory(&mut s, &params, &obj, &noise).unwrap();
    }
    assert!(s
        .particles
        .iter()
        .all(|q| q.position == p && q.velocity == vec![0.0; 3]));
    assert_eq!(s.consensus, p);
}

#[test]
fn sdpso_hand_substitution() {
    let obj = schwefel(1);
    let params = SolverParams {
        dt: 1.0,
        ..SolverParams::global(Mode::SdpsoNoMemory, 1.0, 1.0, 0.0)
    };
    let mut s = state_1d(&params, &obj, &[0.0]);
    s.consensus = vec![2.0];
    step_sdpso_no_memory(&mut s, &params, &obj, &SeededNoise::new(0, 0)).unwrap();
    assert_eq!(s.particles[0].velocity, vec![2.0]);
    assert_eq!(s.particles[0].position, vec![2.0]);
}

#[test]
fn cbo_hand_substitution() {
    let obj = schwefel(1);
    let params = SolverParams::global(Mode::Cbo, 0.0, 1.0, 0.0);
    let mut s = state_1d(&params, &obj, &[0.0]);
    s.consensus = vec![2.0];
    step_cbo(&mut s, &params, &obj, &SeededNoise::new(0, 0)).unwrap();
    assert!((s.particles[0].position[0] - 0.02).abs() < 1e-16);
}

#[test]
fn cbo_coincident_particles_stay() {
    let obj = ObjectiveSpec::new(ObjectiveKind::Rastrigin, 2);
    let params = SolverParams::global(Mode::Cbo, 0.0, 1.0, 5.0);
    let p = vec![1.3, -0.4];
    let mut s = SwarmState::from_positions(vec![p.clone(); 8], None, &params, &obj).unwrap();
    let noise = SeededNoise::new(4, 0);
    for _ in 0..10 {
        step_cbo(&mut s, &params, &obj, &noise).unwrap();
    }
    assert!(s.particles.iter().all(|q| q.position == p));
}

#[test]
fn cbo_noiseless_contraction() {
    let obj = ObjectiveSpec::new(ObjectiveKind::Ackley, 2);
    for rate in [0.1, 0.5, 1.0] {
        let params = SolverParams {
            dt: 0.1,
            ..SolverParams::global(Mode::Cbo, 0.0, rate / 0.1, 0.0)
        };
        let mut rng = SeededNoise::new(9, 0).init_rng();
        let mut s =
            SwarmState::sample(&InitSpec::uniform(30, -3.0, 3.0), &params, &obj, &mut rng).unwrap();
        let d0 = s.diameter();
        let noise = SeededNoise::new(0, 0);
        for n in 1..=20 {
            step_cbo(&mut s, &params, &obj, &noise).unwrap();
            let want = (1.0 - params.lambda2 * params.dt).powi(n) * d0;
            assert!(
                (s.diameter() - want).abs() <= 1e-12 * d0,
                "rate {rate} step {n}"
            );
        }
    }
}

fn random_state(
    mode: Mode,
    n: usize,
    seed: u64,
    obj: &dyn Objective,
    params: &SolverParams,
) -> SwarmState {
    let init = InitSpec {
        particles: n,
        positions: PositionInit::Uniform {
            lower: -3.0,
            upper: 3.0,
        },
        velocities: VelocityInit::Gaussian { std: 1.0 },
    };
    let mut rng = SeededNoise::new(seed, 77).init_rng();
    let p = SolverParams { mode, ..*params };
    SwarmState::sample(&init, &p, obj, &mut rng).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn small_inertia_step_matches_first_order_step(
        n in 1usize..40,
        d in 1usize..8,
        seed in any::<u64>(),
        lambda in 0.0f64..3.0,
        sigma in 0.0f64..10.0,
        dt in 1e-3f64..1.0,
        kind in prop_oneof![Just(NoiseKind::Gaussian), Just(NoiseKind::UniformSqrt3)],
    ) {
        let obj = ObjectiveSpec::new(ObjectiveKind::Rastrigin, d);
        let base = SolverParams { dt, noise: kind, alpha: 10.0, ..SolverParams::global(Mode::Cbo, 0.0, lambda, sigma) };
        let kinetic = SolverParams { mode: Mode::SdpsoNoMemory, ..base };
        let mut a = random_state(Mode::SdpsoNoMemory, n, seed, &obj, &kinetic);
        let mut b = random_state(Mode::Cbo, n, seed, &obj, &base);
        prop_assert_eq!(&a.consensus, &b.consensus);
        let noise = SeededNoise::new(seed, 1);
        step_sdpso_no_memory(&mut a, &kinetic, &obj, &noise).unwrap();
        step_cbo(&mut b, &base, &obj, &noise).unwrap();
        for (p, q) in a.particles.iter().zip(&b.particles) {
            for (x, y) in p.position.iter().zip(&q.position) {
                prop_assert!(ulps(*x, *y) <= 4, "{} vs {}", x, y);
            }
        }
    }

    #[test]
    fn boundary_matches_scalar_clamp(xs in proptest::collection::vec(proptest::collection::vec(-10.0f64..10.0, 3), 1..20)) {
        let obj = schwefel(3);
        let params = SolverParams::global(Mode::Cbo, 0.0, 1.0, 1.0);
        let mut s = SwarmState::from_positions(xs.clone(), None, &params, &obj).unwrap();
        let b = Bounds::new(-3.0, 3.0);
        apply_boundary(&mut s, &b);
        for (p, x) in s.particles.iter().zip(&xs) {
            for (got, raw) in p.position.iter().zip(x) {
                let want = if *raw < -3.0 { -3.0 } else if *raw > 3.0 { 3.0 } else { *raw };
                prop_assert_eq!(*got, want);
            }
        }
    }

    #[test]
    fn memory_stays_on_segment(
        seed in any::<u64>(),
        beta in 0.01f64..5.0,
        relax in 0.0f64..0.5,
    ) {
        let obj = ObjectiveSpec::new(ObjectiveKind::Rastrigin, 3);
        let dt = 0.05;
        let params = SolverParams {
            mode: Mode::SdpsoMemory, m: 0.3, lambda1: 1.0, sigma1: 1.0, lambda2: 1.0, sigma2: 2.0,
            beta, nu: relax / dt, dt, alpha: 10.0, ..SolverParams::default()
        };
        let mut s = random_state(Mode::SdpsoMemory, 12, seed, &obj, &params);
        let noise = SeededNoise::new(seed, 2);
        for _ in 0..5 {
            let before: Vec<Vec<f64>> = s.particles.iter().map(|p| p.local_best.clone()).collect();
            step_sdpso_memory(&mut s, &params, &obj, &noise).unwrap();
            for (p, y0) in s.particles.iter().zip(&before) {
                for k in 0..3 {
                    let (a, b) = (y0[k], p.position[k]);
                    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
                    let tol = 1e-14 * (1.0 + a.abs() + b.abs());
                    prop_assert!(p.local_best[k] >= lo - tol && p.local_best[k] <= hi + tol);
                }
            }
        }
    }
}

#[test]
fn memory_replacement_and_retention() {
    let obj = schwefel(1);
    let params = SolverParams {
        mode: Mode::CboLocalBest,
        lambda1: 0.0,
        sigma1: 0.0,
        lambda2: 10.0,
        sigma2: 0.0,
        nu: 50.0,
        beta: 3e3,
        dt: 0.01,
        ..SolverParams::default()
    };
    let noise = SeededNoise::new(0, 0);

    let mut better = state_1d(&params, &obj, &[1.0]);
    better.consensus = vec![0.0];
    step_cbo_local_best(&mut better, &params, &obj, &noise).unwrap();
    let p = &better.particles[0];
    assert!((p.position[0] - 0.9).abs() < 1e-15);
    assert_eq!(p.local_best, p.position);

    let mut worse = state_1d(&params, &obj, &[1.0]);
    worse.consensus = vec![2.0];
    step_cbo_local_best(&mut worse, &params, &obj, &noise).unwrap();
    let p = &worse.particles[0];
    assert!((p.position[0] - 1.1).abs() < 1e-15);
    assert_eq!(p.local_best, vec![1.0]);
}

#[test]
fn memory_scheme_reproduces_discrete_pso_in_one_step() {
    let d = 3;
    let obj = ObjectiveSpec::new(ObjectiveKind::Rastrigin, d);
    for seed in 0..20 {
        let base = SolverParams {
            dt: 1.0,
            nu: 0.5,
            beta: 1e12,
            alpha: 1e12,
            noise: NoiseKind::UniformSqrt3,
            ..SolverParams::from_acceleration(Mode::DiscretePso, 0.7, 1.5, 1.2)
        };
        let mem = SolverParams {
            mode: Mode::SdpsoMemory,
            ..base
        };
        base.validate().unwrap();
        mem.validate().unwrap();
        let mut a = random_state(Mode::DiscretePso, 16, seed, &obj, &base);
        let mut b = random_state(Mode::SdpsoMemory, 16, seed, &obj, &mem);
        assert_eq!(a.consensus, b.consensus);
        let noise = SeededNoise::new(seed, 5);
        step_discrete_pso(&mut a, &base, &obj, &noise).unwrap();
        step_sdpso_memory(&mut b, &mem, &obj, &noise).unwrap();
        for (p, q) in a.particles.iter().zip(&b.particles) {
            for k in 0..d {
                assert!((p.velocity[k] - q.velocity[k]).abs() < 1e-12);
                assert!((p.position[k] - q.position[k]).abs() < 1e-12);
                assert!((p.local_best[k] - q.local_best[k]).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn classical_memory_limit_is_monotone() {
    let d = 4;
    let obj = ObjectiveSpec::new(ObjectiveKind::Rastrigin, d);
    let params = SolverParams {
        mode: Mode::SdpsoMemory,
        m: 0.2,
        lambda1: 0.5,
        sigma1: 1.0,
        lambda2: 1.0,
        sigma2: 2.0,
        dt: 0.01,
        nu: 50.0,
        beta: 1e9,
        ..SolverParams::default()
    };
    let mut s = random_state(Mode::SdpsoMemory, 40, 8, &obj, &params);
    let noise = SeededNoise::new(8, 0);
    for _ in 0..200 {
        let before: Vec<f64> = s.particles.iter().map(|p| p.local_best_cost).collect();
        step_sdpso_memory(&mut s, &params, &obj, &noise).unwrap();
        for (p, c0) in s.particles.iter().zip(&before) {
            if params.beta * (p.cost - c0).abs() > 20.0 {
                assert!(p.local_best_cost <= *c0);
            }
        }
    }
}

#[test]
fn local_terms_drop_out() {
    let d = 2;
    let obj = ObjectiveSpec::new(ObjectiveKind::Ackley, d);
    let cbo = SolverParams::global(Mode::Cbo, 0.0, 1.0, 3.0);
    let lb = SolverParams {
        mode: Mode::CboLocalBest,
        ..cbo
    };
    let noise = SeededNoise::new(2, 2);

    // No local coefficients: identical to the plain scheme driven by the
    // consensus of the memories.
    let mut a = random_state(Mode::CboLocalBest, 10, 1, &obj, &lb);
    step_cbo_local_best(&mut a, &lb, &obj, &noise).unwrap();
    let ybar = a.consensus.clone();
    let mut b = random_state(Mode::Cbo, 10, 1, &obj, &cbo);
    let mut c = random_state(Mode::CboLocalBest, 10, 1, &obj, &lb);
    b.consensus = ybar.clone();
    c.consensus = ybar;
    b.step = 1;
    c.step = 1;
    for p in &mut c.particles {
        p.local_best = p.position.clone();
        p.local_best_cost = p.cost;
    }
    step_cbo(&mut b, &cbo, &obj, &noise).unwrap();
    step_cbo_local_best(&mut c, &lb, &obj, &noise).unwrap();
    for (p, q) in b.particles.iter().zip(&c.particles) {
        assert_eq!(p.position, q.position);
    }

    // Memories on top of the positions with no local noise: the local drift
    // multiplies a zero difference.
    let with_drift = SolverParams { lambda1: 5.0, ..lb };
    let mut e = random_state(Mode::CboLocalBest, 10, 1, &obj, &lb);
    let mut f = random_state(Mode::CboLocalBest, 10, 1, &obj, &with_drift);
    step_cbo_local_best(&mut e, &lb, &obj, &noise).unwrap();
    step_cbo_local_best(&mut f, &with_drift, &obj, &noise).unwrap();
    assert_eq!(e.positions(), f.positions());
}

#[test]
fn coupled_parameters_match_explicit_ones() {
    let (l1, s1) = couple_local_global(0.25, 1.0, 8.5).unwrap();
    let coupled = SolverParams {
        mode: Mode::CboLocalBest,
        lambda1: l1,
        sigma1: s1,
        lambda2: 1.0,
        sigma2: 8.5,
        ..SolverParams::default()
    };
    let explicit = SolverParams {
        lambda1: 0.25,
        sigma1: 2.125,
        ..coupled
    };
    assert_eq!(coupled, explicit);
}

#[test]
fn wrong_mode_is_rejected() {
    let obj = schwefel(1);
    let params = SolverParams::global(Mode::Cbo, 0.0, 1.0, 1.0);
    let mut s = state_1d(&params, &obj, &[0.0]);
    let noise = SeededNoise::new(0, 0);
    assert!(matches!(
        step_sdpso_no_memory(&mut s, &params, &obj, &noise),
        Err(crate::Error::WrongMode { .. })
    ));
    let other = SolverParams::global(Mode::SdpsoNoMemory, 0.0, 1.0, 1.0);
    assert!(step_sdpso_no_memory(&mut s, &other, &obj, &noise).is_err());
}

#[test]
fn zero_iterations_report_initial_consensus() {
    let obj = ObjectiveSpec::new(ObjectiveKind::Ackley, 3);
    let params = SolverParams::global(Mode::SdpsoNoMemory, 0.1, 1.0, 2.0);
    let stop = StopRule {
        max_iter: 0,
        ..StopRule::default()
    };
    let r = run(
        &params,
        &obj,
        &InitSpec::uniform(20, -3.0, 3.0),
        &stop,
        5,
        0,
    )
    .unwrap();
    assert_eq!(r.iterations, 0);
    assert_eq!(r.trajectory.len(), 1);
    assert_eq!(r.trajectory[0], r.final_consensus);
    assert_eq!(r.stop_reason, StopReason::MaxIter);
}

#[test]
fn runs_are_reproducible() {
    let obj = ObjectiveSpec::new(ObjectiveKind::Rastrigin, 4);
    let params = SolverParams::global(Mode::SdpsoNoMemory, 0.1, 1.0, 3.0);
    let stop = StopRule {
        max_iter: 200,
        ..StopRule::default()
    };
    let init = InitSpec::uniform(64, -3.0, 3.0);
    let a = run(&params, &obj, &init, &stop, 11, 3).unwrap();
    let b = run(&params, &obj, &init, &stop, 11, 3).unwrap();
    assert_eq!(a, b);
    let c = run(&params, &obj, &init, &stop, 11, 4).unwrap();
    assert_ne!(a.final_consensus, c.final_consensus);
}

#[cfg(feature = "parallel")]
#[test]
fn worker_count_does_not_change_results() {
    let obj = ObjectiveSpec::new(ObjectiveKind::Ackley, 5);
    let params = SolverParams {
        mode: Mode::SdpsoMemory,
        lambda1: 0.5,
        sigma1: 1.0,
        ..SolverParams::global(Mode::SdpsoMemory, 0.2, 1.0, 3.0)
    };
    let stop = StopRule {
        max_iter: 100,
        ..StopRule::default()
    };
    let init = InitSpec::uniform(300, -3.0, 3.0);
    let go = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| run(&params, &obj, &init, &stop, 1, 0).unwrap())
    };
    assert_eq!(go(1), go(4));
}

#[test]
fn constant_consensus_stalls_after_window() {
    let obj = FnObjective::new(2, |_: &[f64]| 0.0);
    let params = SolverParams::global(Mode::Cbo, 0.0, 1.0, 1.0);
    let mut s = SwarmState::from_positions(vec![vec![0.5, 0.5]; 4], None, &params, &obj).unwrap();
    let stop = StopRule {
        n_stall: 17,
        ..StopRule::default()
    };
    let r = run_from(&mut s, &params, &obj, &SeededNoise::new(0, 0), &stop).unwrap();
    assert_eq!(r.iterations, 17);
    assert_eq!(r.stop_reason, StopReason::Stalled);
}

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use aqc_linsolve::evolve::{
    average_evolution, energy, extract_solution, oracle_solve, run_channel, run_trajectory,
    run_trajectory_with, RngSeed, State,
};
use aqc_linsolve::experiment::{build_instance, preset};
use aqc_linsolve::hamiltonian::{ground_space, initial_state, ProblemInstance};
use aqc_linsolve::linalg::{eigh, expm_unitary, DensityMatrix, QuantumState};
use aqc_linsolve::schedule::{build_grid, Algorithm, Placement};

fn inst(name: &str, algorithm: Algorithm) -> ProblemInstance {
    let mut cfg = preset(name).unwrap();
    cfg.algorithm = algorithm;
    build_instance(&cfg).unwrap()
}

fn grid(i: &ProblemInstance, q: usize) -> aqc_linsolve::schedule::Schedule {
    build_grid(i.kappa(), q, i.algorithm(), Placement::Natural).unwrap()
}

#[test]
fn trajectory_matches_product_of_exponentials() {
    for alg in [Algorithm::One, Algorithm::Two] {
        let i = inst("alg1_paper", alg);
        let sched = grid(&i, 40);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let times: Vec<f64> = sched
            .steps
            .iter()
            .map(|s| rng.random_range(0.0..s.t_max))
            .collect();
        let mut k = 0;
        let report = run_trajectory_with(&i, &sched, None, |_| {
            k += 1;
            times[k - 1]
        })
        .unwrap();

        let mut psi = initial_state(&i).into_amplitudes();
        for (step, &t) in sched.steps.iter().zip(&times) {
            psi = expm_unitary(&i.hamiltonian(step.s).unwrap(), t).unwrap() * psi;
            assert!((psi.norm() - 1.0).abs() <= 1e-9);
        }
        let State::Pure(fin) = &report.final_state else {
            panic!("trajectory yields a pure state")
        };
        assert!((fin.amplitudes() - &psi).norm() <= 1e-8);
        assert!((fin.amplitudes().norm() - 1.0).abs() <= 1e-9);
    }
}

#[test]
fn identical_seeds_give_identical_reports() {
    let i = inst("alg2_paper", Algorithm::Two);
    let sched = grid(&i, 60);
    let a = run_trajectory(&i, &sched, RngSeed(9)).unwrap();
    let b = run_trajectory(&i, &sched, RngSeed(9)).unwrap();
    assert_eq!(
        serde_json::to_string(&a).unwrap(),
        serde_json::to_string(&b).unwrap()
    );
    let other = run_trajectory(&i, &sched, RngSeed(10)).unwrap();
    assert_ne!(a.steps[0].t_drawn, other.steps[0].t_drawn);
}

#[test]
fn channel_preserves_trace_and_positivity() {
    for alg in [Algorithm::One, Algorithm::Two] {
        let i = inst("alg2_paper", alg);
        let mut rho = initial_state(&i).density();
        for step in &grid(&i, 50).steps {
            let eig = eigh(&i.hamiltonian(step.s).unwrap()).unwrap();
            let (next, populations) = average_evolution(&rho, &eig, step.t_max).unwrap();
            let before = eig.vectors.adjoint() * rho.matrix() * &eig.vectors;
            for (k, p) in populations.iter().enumerate() {
                assert!((before[(k, k)].re - p).abs() <= 1e-12);
            }
            rho = next;
            assert!((rho.trace() - 1.0).abs() <= 1e-9);
            assert!(eigh(rho.operator()).unwrap().values[0] >= -1e-9);
        }
    }
}

#[test]
fn zero_duration_average_is_identity() {
    let i = inst("alg1_paper", Algorithm::One);
    let rho = initial_state(&i).density();
    let eig = eigh(&i.hamiltonian(0.4).unwrap()).unwrap();
    let (same, _) = average_evolution(&rho, &eig, 0.0).unwrap();
    let diff = (same.matrix() - rho.matrix())
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    assert!(diff <= 1e-12);
}

#[test]
fn zero_mode_is_stationary() {
    for alg in [Algorithm::One, Algorithm::Two] {
        let i = inst("alg2_paper", alg);
        let s = 0.63;
        let h = i.hamiltonian(s).unwrap();
        let g = ground_space(&h, i.expected_nullity()).unwrap();
        let zero = g.basis.column(0).into_owned();
        let evolved = expm_unitary(&h, 37.0).unwrap() * &zero;
        assert!((g.population(&evolved) - 1.0).abs() <= 1e-10);
        let eig = eigh(&h).unwrap();
        let rho = QuantumState::new(zero).unwrap().density();
        let (out, _) = average_evolution(&rho, &eig, 250.0).unwrap();
        assert!((g.population_mixed(out.matrix()) - 1.0).abs() <= 1e-10);
    }
}

#[test]
fn step_records_respect_invariants() {
    for alg in [Algorithm::One, Algorithm::Two] {
        let i = inst("alg1_paper", alg);
        let sched = grid(&i, 80);
        for report in [
            run_trajectory(&i, &sched, RngSeed(3)).unwrap(),
            run_channel(&i, &sched).unwrap(),
        ] {
            for r in &report.steps {
                if alg == Algorithm::One {
                    assert!(r.energy >= -1e-8);
                }
                assert!(r.ground_fidelity >= 0.0 && r.ground_fidelity <= 1.0 + 1e-10);
                assert!(r.e1 > 0.0);
                assert_eq!(r.e0, 0.0);
            }
            assert!(report.success_probability > 0.0 && report.success_probability <= 1.0);
            let f = report.solution_fidelity.unwrap();
            assert!((0.0..=1.0 + 1e-12).contains(&f));
        }
    }
}

#[test]
fn reported_fidelity_recomputes_from_final_state() {
    let i = inst("alg2_paper", Algorithm::Two);
    let sched = grid(&i, 100);
    let x = QuantumState::new(oracle_solve(&i).unwrap()).unwrap();
    for report in [
        run_trajectory(&i, &sched, RngSeed(1)).unwrap(),
        run_channel(&i, &sched).unwrap(),
    ] {
        let ex = extract_solution(&report.final_state, &i).unwrap();
        let f = ex.post_selected.expectation_in(&x);
        assert!((report.solution_fidelity.unwrap() - f).abs() <= 1e-14);
        assert!((ex.traced.trace() - 1.0).abs() <= 1e-10);
    }
}

#[test]
fn exact_solution_state_extracts_cleanly() {
    let i = inst("alg1_paper", Algorithm::One);
    let x = QuantumState::new(oracle_solve(&i).unwrap()).unwrap();
    let ex = extract_solution(&State::Pure(QuantumState::plus().kron(&x)), &i).unwrap();
    assert!((ex.success_probability - 1.0).abs() <= 1e-12);
    assert!((&ex.solution - x.amplitudes()).norm() <= 1e-12);
}

#[test]
fn zero_time_run_fails_postselection() {
    // |−⟩⊗b is orthogonal to the |+⟩ ancilla, so nothing survives read-out.
    let i = inst("alg1_paper", Algorithm::One);
    let sched = grid(&i, 1);
    let report = run_trajectory_with(&i, &sched, None, |_| 0.0).unwrap();
    let State::Pure(fin) = &report.final_state else {
        panic!()
    };
    assert!((fin.amplitudes() - initial_state(&i).amplitudes()).norm() <= 1e-12);
    assert!(report.solution.is_none());
    assert!(report.failure.is_some());
}

#[test]
fn energy_matches_definitions() {
    let i = inst("alg1_paper", Algorithm::One);
    let h = i.hamiltonian(0.3).unwrap();
    let eig = eigh(&h).unwrap();
    let v = QuantumState::new(eig.vector(5)).unwrap();
    assert!((energy(&State::Pure(v), &h).unwrap() - eig.values[5]).abs() <= 1e-12);
    let mixed = DensityMatrix::maximally_mixed(h.dim());
    assert!(
        (energy(&State::Mixed(mixed), &h).unwrap() - h.trace() / h.dim() as f64).abs() <= 1e-12
    );
}

#[test]
fn convergence_improves_with_steps() {
    let i = inst("alg2_paper", Algorithm::One);
    let x = QuantumState::new(oracle_solve(&i).unwrap()).unwrap();
    let infidelity = |q| {
        let mut v: Vec<f64> = (0..9u64)
            .map(|seed| {
                let r = run_trajectory(&i, &grid(&i, q), RngSeed(seed)).unwrap();
                let ex = extract_solution(&r.final_state, &i).unwrap();
                1.0 - ex.post_selected.expectation_in(&x)
            })
            .collect();
        v.sort_by(f64::total_cmp);
        v[4]
    };
    assert!(infidelity(400) < infidelity(30));
}

/// Frozen channel results for instance 2 at q = 300. The amplified protocol
/// reads out a better solution, while its zero-energy population is slightly
/// lower (by 3.5e-4), so only the former ordering is asserted.
#[test]
fn channel_regression_alg1_vs_alg2() {
    let run = |alg| {
        let i = inst("alg2_paper", alg);
        let r = run_channel(&i, &grid(&i, 300)).unwrap();
        (
            r.steps.last().unwrap().ground_fidelity,
            r.solution_fidelity.unwrap(),
        )
    };
    let (g1, f1) = run(Algorithm::One);
    let (g2, f2) = run(Algorithm::Two);
    for (got, want) in [
        (g1, 0.979673036001601),
        (g2, 0.979323929000097),
        (f1, 0.9967019467275333),
        (f2, 0.9982969925752841),
    ] {
        assert!((got - want).abs() <= 1e-9, "{got} vs {want}");
    }
    assert!(f2 > f1);
    assert!((g1 - g2).abs() < 1e-3);
}

#[test]
fn golden_alg2_trajectory() {
    let cfg = preset("alg2_paper").unwrap();
    let i = build_instance(&cfg).unwrap();
    let report = run_trajectory(&i, &grid(&i, 300), RngSeed(42)).unwrap();
    let golden = include_str!("golden/alg2_paper_seed42.csv");
    let mut lines = golden.lines();
    assert_eq!(
        lines.next().unwrap(),
        "step,v,s,t_drawn,t_max,energy,e1,ground_fidelity"
    );
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), report.steps.len());
    for (row, r) in rows.iter().zip(&report.steps) {
        assert!(r.ground_fidelity >= 0.9);
        assert!(r.energy < r.e1);
        let got = [
            r.j as f64,
            r.v,
            r.s,
            r.t_drawn.unwrap(),
            r.t_max,
            r.energy,
            r.e1,
            r.ground_fidelity,
        ];
        for (g, w) in got.iter().zip(row) {
            assert!(
                (g - w).abs() <= 1e-9 * (1.0 + w.abs()),
                "step {}: {g} vs {w}",
                r.j
            );
        }
    }
}

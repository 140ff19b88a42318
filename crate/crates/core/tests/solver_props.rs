use poa_core::datasets::{path_graph, random_euclidean_space, random_measure, random_tree};
use poa_core::mmspace::build_graph_metric;
use poa_core::observables::{check_lipschitz, covariance, mean, CheckMode};
use poa_core::poa::brute_force_po;
use poa_core::{ConstraintMode, Error, FiniteMetricSpace, PoaSolver, ProbabilityMeasure, SolverConfig};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn euclid(seed: u64, n: usize) -> (FiniteMetricSpace, ProbabilityMeasure) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let space = random_euclidean_space(n, 2, &mut rng).unwrap();
    let mu = random_measure(n, 0.1, &mut rng);
    (space, mu)
}

fn config(restarts: usize, seed: u64) -> SolverConfig {
    SolverConfig {
        restarts,
        seed,
        ..SolverConfig::default()
    }
}

#[test]
fn two_point_and_path_values() {
    let space = FiniteMetricSpace::new(vec![vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
    let mu = ProbabilityMeasure::uniform(2);
    let set = PoaSolver::new(&space, &mu, None, SolverConfig::default())
        .unwrap()
        .solve(3)
        .unwrap();
    assert_eq!(set.len(), 1);
    assert!(set.truncated);
    assert!((set.variances[0] - 0.25).abs() < 1e-12);
    assert!((set.observables[0][0].abs() - 0.5).abs() < 1e-12);

    let g = path_graph(3, 1.0).unwrap();
    let space = build_graph_metric(&g).unwrap();
    let mu = ProbabilityMeasure::uniform(3);
    let set = PoaSolver::new(&space, &mu, Some(&g), SolverConfig::default())
        .unwrap()
        .solve(3)
        .unwrap();
    assert_eq!(set.len(), 2);
    assert!((set.variances[0] - 2.0 / 3.0).abs() < 1e-12);
    assert!((set.variances[1] - 2.0 / 9.0).abs() < 1e-12);
    for (a, b) in set.observables[1].iter().zip([-1.0 / 3.0, 2.0 / 3.0, -1.0 / 3.0]) {
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn single_point_is_degenerate() {
    let space = FiniteMetricSpace::new(vec![vec![0.0]]).unwrap();
    let mu = ProbabilityMeasure::uniform(1);
    let solver = PoaSolver::new(&space, &mu, None, SolverConfig::default()).unwrap();
    assert!(matches!(
        solver.principal_observable(&[]),
        Err(Error::DegenerateVariance(_))
    ));
    assert!(matches!(solver.solve(0), Err(Error::InvalidConfig(_))));
}

#[test]
fn edges_mode_requires_graph() {
    let (space, mu) = euclid(1, 4);
    let cfg = SolverConfig {
        constraint_mode: ConstraintMode::Edges,
        ..SolverConfig::default()
    };
    assert!(matches!(
        PoaSolver::new(&space, &mu, None, cfg),
        Err(Error::ModeMismatch)
    ));
}

proptest! {
    // Fixed seed: the oracle comparison can legitimately miss on a near-tie,
    // and a flaky suite is worse than a narrower one.
    #![proptest_config(ProptestConfig {
        cases: 24,
        rng_seed: proptest::test_runner::RngSeed::Fixed(0x5eed),
        failure_persistence: None,
        ..ProptestConfig::default()
    })]

    #[test]
    fn first_observable_matches_oracle(seed in any::<u64>(), n in 2usize..6) {
        let (space, mu) = euclid(seed, n);
        let po = PoaSolver::new(&space, &mu, None, config(20, seed)).unwrap().principal_observable(&[]).unwrap();
        let (_, best) = brute_force_po(&space, &mu, &[]).unwrap();
        prop_assert!(po.variance <= best + 1e-9);
        prop_assert!(po.variance >= best - 1e-5 * (1.0 + best), "{} vs {}", po.variance, best);
    }

    #[test]
    fn ccp_traces_are_monotone(seed in any::<u64>(), n in 3usize..15) {
        let (space, mu) = euclid(seed, n);
        let set = PoaSolver::new(&space, &mu, None, config(6, seed)).unwrap().solve(3).unwrap();
        for d in &set.diagnostics {
            for run in &d.runs {
                prop_assert!(run.is_monotone(), "{:?}", run.variances);
            }
        }
    }

    #[test]
    fn outputs_are_feasible_and_orthogonal(seed in any::<u64>(), n in 3usize..15) {
        let (space, mu) = euclid(seed, n);
        let set = PoaSolver::new(&space, &mu, None, config(6, seed)).unwrap().solve(4).unwrap();
        for (i, phi) in set.observables.iter().enumerate() {
            let cert = check_lipschitz(&space, phi, 1.0, CheckMode::Pairwise, None).unwrap();
            prop_assert!(cert.max_violation <= 1e-8);
            prop_assert!(mean(&mu, phi).unwrap().abs() <= 1e-8);
            for psi in &set.observables[..i] {
                prop_assert!(covariance(&mu, phi, psi).unwrap().abs() <= 1e-7);
            }
        }
        for w in set.variances.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-9);
        }
    }

    #[test]
    fn tree_modes_agree(seed in any::<u64>(), n in 2usize..25) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_tree(n, (0.1, 2.0), &mut rng).unwrap();
        let space = build_graph_metric(&g).unwrap();
        let mu = random_measure(n, 0.1, &mut rng);
        let pw = PoaSolver::new(&space, &mu, None, config(4, seed)).unwrap().principal_observable(&[]).unwrap();
        let cfg = SolverConfig { constraint_mode: ConstraintMode::Edges, ..config(4, seed) };
        let ed = PoaSolver::new(&space, &mu, Some(&g), cfg).unwrap().principal_observable(&[]).unwrap();
        prop_assert!((pw.variance - ed.variance).abs() <= 1e-6);
    }
}

#[test]
fn solve_is_deterministic_across_thread_counts() {
    let (space, mu) = euclid(5, 18);
    let run = |threads| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| {
            PoaSolver::new(&space, &mu, None, config(8, 3))
                .unwrap()
                .solve(3)
                .unwrap()
        })
    };
    let a = run(1);
    let b = run(4);
    assert_eq!(a.variances, b.variances);
    for (x, y) in a.observables.iter().zip(&b.observables) {
        assert_eq!(x.values(), y.values());
    }
}

#[test]
fn priors_lower_the_variance_to_the_oracle() {
    let (space, mu) = euclid(9, 5);
    let solver = PoaSolver::new(&space, &mu, None, config(20, 0)).unwrap();
    let first = solver.principal_observable(&[]).unwrap();
    let second = solver
        .principal_observable(std::slice::from_ref(&first.observable))
        .unwrap();
    let (_, best) = brute_force_po(&space, &mu, &[first.observable.values()]).unwrap();
    assert!(second.variance <= best + 1e-9);
    assert!(second.variance >= best - 1e-5);
}

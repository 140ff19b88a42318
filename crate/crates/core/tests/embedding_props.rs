use poa_core::datasets::{cycle_graph, random_connected_graph, random_euclidean_space, random_measure};
use poa_core::embedding::{classical_mds, compare, distortion_report, embed, Norm};
use poa_core::mmspace::build_graph_metric;
use poa_core::{PoaSolver, SolverConfig};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn poa_embedding_never_expands(seed in any::<u64>(), n in 3usize..16) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_connected_graph(n, 0.2, (0.5, 2.0), &mut rng).unwrap();
        let space = build_graph_metric(&g).unwrap();
        let mu = random_measure(n, 0.1, &mut rng);
        let cfg = SolverConfig { restarts: 4, seed, ..SolverConfig::default() };
        let set = PoaSolver::new(&space, &mu, None, cfg).unwrap().solve(3).unwrap();
        let emb = embed(&set, set.len()).unwrap();
        for (i, j, d) in space.pairs() {
            prop_assert!(Norm::LInf.distance(&emb.coords[i], &emb.coords[j]) <= d + 1e-8);
        }
    }

    #[test]
    fn mds_is_exact_for_euclidean_points(seed in any::<u64>(), n in 2usize..12, dim in 1usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let space = random_euclidean_space(n, dim, &mut rng).unwrap();
        let emb = classical_mds(&space, n - 1).unwrap();
        let r = distortion_report(&space, &emb, 10).unwrap();
        prop_assert!(r.summary.max <= 1e-8, "max distortion {}", r.summary.max);
    }

    #[test]
    fn histogram_ignores_point_order(seed in any::<u64>(), n in 3usize..12) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let space = random_euclidean_space(n, 3, &mut rng).unwrap();
        let emb = classical_mds(&space, 1).unwrap();
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut rng);
        let space2 = space.subspace(&perm).unwrap();
        let mut emb2 = emb.clone();
        emb2.coords = perm.iter().map(|&p| emb.coords[p].clone()).collect();
        let a = distortion_report(&space, &emb, 12).unwrap();
        let b = distortion_report(&space2, &emb2, 12).unwrap();
        prop_assert_eq!(a.counts, b.counts);
        prop_assert!((a.summary.mean - b.summary.mean).abs() < 1e-12);
        prop_assert_eq!(a.summary.max, b.summary.max);
    }
}

#[test]
fn four_cycle_is_not_euclidean() {
    let space = build_graph_metric(&cycle_graph(4, 1.0).unwrap()).unwrap();
    let emb = classical_mds(&space, 3).unwrap();
    let r = distortion_report(&space, &emb, 10).unwrap();
    assert!(r.summary.max > 0.1);
}

#[test]
fn comparison_shares_bins() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let g = random_connected_graph(12, 0.1, (1.0, 1.0), &mut rng).unwrap();
    let space = build_graph_metric(&g).unwrap();
    let mu = poa_core::ProbabilityMeasure::uniform(12);
    let set = PoaSolver::new(&space, &mu, None, SolverConfig::default())
        .unwrap()
        .solve(2)
        .unwrap();
    let report = compare(&space, &embed(&set, 2).unwrap(), &classical_mds(&space, 2).unwrap(), 20).unwrap();
    assert_eq!(report.poa.bin_edges, report.mds.bin_edges);
    assert_eq!(report.poa.counts.iter().sum::<usize>(), 66);
    assert_eq!(report.mds.counts.iter().sum::<usize>(), 66);
    assert_eq!((report.poa.norm, report.mds.norm), (Norm::LInf, Norm::L2));
}

//! Small synthetic spaces used by tests, benchmarks and the CLI demos.

use rand::Rng;

use crate::error::Result;
use crate::mmspace::{normalize_measure, FiniteMetricSpace, ProbabilityMeasure, WeightedGraph};

/// Path on `n` nodes with every edge of length `edge`.
pub fn path_graph(n: usize, edge: f64) -> Result<WeightedGraph> {
    WeightedGraph::new(n, (1..n).map(|i| (i - 1, i, edge)))
}

/// Uniform grid on `[0, 1]` with `n` nodes joined by edges of length `1/(n−1)`.
pub fn unit_line_graph(n: usize) -> Result<WeightedGraph> {
    path_graph(n, 1.0 / (n - 1) as f64)
}

pub fn cycle_graph(n: usize, edge: f64) -> Result<WeightedGraph> {
    WeightedGraph::new(n, (0..n).map(|i| (i, (i + 1) % n, edge)))
}

/// Random recursive tree: node `i` hangs off a uniformly chosen earlier node.
/// Edge lengths are uniform in `lengths`, or 1 when the range is empty.
pub fn random_tree<R: Rng + ?Sized>(n: usize, lengths: (f64, f64), rng: &mut R) -> Result<WeightedGraph> {
    let edges: Vec<_> = (1..n)
        .map(|i| {
            let parent = rng.random_range(0..i);
            (parent, i, edge_length(lengths, rng))
        })
        .collect();
    WeightedGraph::new(n, edges)
}

/// A random spanning tree plus each remaining pair with probability `extra`.
pub fn random_connected_graph<R: Rng + ?Sized>(
    n: usize,
    extra: f64,
    lengths: (f64, f64),
    rng: &mut R,
) -> Result<WeightedGraph> {
    let tree = random_tree(n, lengths, rng)?;
    let mut edges: Vec<_> = tree.edges().iter().map(|e| (e.from, e.to, e.weight)).collect();
    let mut present = vec![false; n * n];
    for &(a, b, _) in &edges {
        present[a * n + b] = true;
        present[b * n + a] = true;
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if !present[i * n + j] && rng.random_bool(extra) {
                edges.push((i, j, edge_length(lengths, rng)));
            }
        }
    }
    WeightedGraph::new(n, edges)
}

fn edge_length<R: Rng + ?Sized>((lo, hi): (f64, f64), rng: &mut R) -> f64 {
    if hi > lo {
        rng.random_range(lo..hi)
    } else {
        lo.max(f64::MIN_POSITIVE)
    }
}

/// Euclidean distances between `n` uniform points in `[0, 1]^dim`.
pub fn random_euclidean_space<R: Rng + ?Sized>(n: usize, dim: usize, rng: &mut R) -> Result<FiniteMetricSpace> {
    let points: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..dim).map(|_| rng.random::<f64>()).collect())
        .collect();
    euclidean_space(&points)
}

pub fn euclidean_space(points: &[Vec<f64>]) -> Result<FiniteMetricSpace> {
    let rows = points
        .iter()
        .map(|p| {
            points
                .iter()
                .map(|q| p.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt())
                .collect()
        })
        .collect();
    FiniteMetricSpace::new(rows)
}

/// Weights uniform in `[floor, 1]`, normalized.
pub fn random_measure<R: Rng + ?Sized>(n: usize, floor: f64, rng: &mut R) -> ProbabilityMeasure {
    let raw: Vec<f64> = (0..n).map(|_| rng.random_range(floor..=1.0)).collect();
    normalize_measure(&raw).expect("positive weights")
}

//! Finite metric spaces, weighted graphs and probability measures.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashSet};
use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};

/// Absolute slack allowed in the triangle inequality.
pub const TRIANGLE_TOL: f64 = 1e-9;
/// Tolerance on the total mass of a probability measure.
pub const MASS_TOL: f64 = 1e-9;

/// A finite metric space stored as a dense row-major distance matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteMetricSpace {
    n: usize,
    dist: Vec<f64>,
    labels: Option<Vec<String>>,
    diameter: f64,
}

impl FiniteMetricSpace {
    /// Builds a space from a square distance matrix.
    ///
    /// Shape, finiteness, nonnegativity, the zero diagonal and symmetry are
    /// always checked. The triangle inequality is O(n³) and only checked by
    /// [`FiniteMetricSpace::validated`].
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let report = validate_shape_and_symmetry(&rows);
        if !report.is_valid() {
            return Err(Error::InvalidMetric(Box::new(report)));
        }
        Ok(Self::from_rows_unchecked(rows))
    }

    /// Like [`FiniteMetricSpace::new`] but also runs the full triangle check.
    pub fn validated(rows: Vec<Vec<f64>>) -> Result<Self> {
        let report = validate_metric(&rows);
        if !report.is_valid() {
            return Err(Error::InvalidMetric(Box::new(report)));
        }
        Ok(Self::from_rows_unchecked(rows))
    }

    fn from_rows_unchecked(rows: Vec<Vec<f64>>) -> Self {
        let n = rows.len();
        let dist: Vec<f64> = rows.into_iter().flatten().collect();
        let diameter = dist.iter().copied().fold(0.0, f64::max);
        Self {
            n,
            dist,
            labels: None,
            diameter,
        }
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                found: labels.len(),
            });
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn dist(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.dist[i * self.n..(i + 1) * self.n]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.n).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    /// The subspace induced by `indices`, in the given order.
    pub fn subspace(&self, indices: &[usize]) -> Result<Self> {
        if let Some(&bad) = indices.iter().find(|&&i| i >= self.n) {
            return Err(Error::IndexOutOfRange {
                index: bad,
                len: self.n,
            });
        }
        if indices.is_empty() {
            return Err(Error::EmptySpace);
        }
        let rows = indices
            .iter()
            .map(|&i| indices.iter().map(|&j| self.dist(i, j)).collect())
            .collect();
        let mut sub = Self::from_rows_unchecked(rows);
        if let Some(labels) = &self.labels {
            sub.labels = Some(indices.iter().map(|&i| labels[i].clone()).collect());
        }
        Ok(sub)
    }

    /// Iterator over unordered pairs `(i, j, d(i, j))` with `i < j`.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |i| ((i + 1)..self.n).map(move |j| (i, j, self.dist(i, j))))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub weight: f64,
}

/// A simple undirected graph with positive edge lengths.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    n: usize,
    edges: Vec<Edge>,
    connected: bool,
}

impl WeightedGraph {
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize, f64)>) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptySpace);
        }
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for (a, b, w) in edges {
            for idx in [a, b] {
                if idx >= n {
                    return Err(Error::IndexOutOfRange { index: idx, len: n });
                }
            }
            if a == b {
                return Err(Error::SelfLoop(a));
            }
            if !(w > 0.0) || !w.is_finite() {
                return Err(Error::NonPositiveWeight {
                    from: a,
                    to: b,
                    weight: w,
                });
            }
            if !seen.insert((a.min(b), a.max(b))) {
                return Err(Error::DuplicateEdge { from: a, to: b });
            }
            out.push(Edge {
                from: a,
                to: b,
                weight: w,
            });
        }
        let connected = components(n, &out) == 1;
        Ok(Self {
            n,
            edges: out,
            connected,
        })
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn is_connected(&self) -> bool {
        self.connected
    }

    fn adjacency(&self) -> Vec<Vec<(usize, f64)>> {
        let mut adj = vec![Vec::new(); self.n];
        for e in &self.edges {
            adj[e.from].push((e.to, e.weight));
            adj[e.to].push((e.from, e.weight));
        }
        adj
    }
}

fn components(n: usize, edges: &[Edge]) -> usize {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let mut count = n;
    for e in edges {
        let (a, b) = (find(&mut parent, e.from), find(&mut parent, e.to));
        if a != b {
            parent[a] = b;
            count -= 1;
        }
    }
    count
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ShortestPaths {
    #[default]
    Dijkstra,
    FloydWarshall,
}

/// Shortest-path metric of a connected weighted graph (Dijkstra from every source).
pub fn build_graph_metric(g: &WeightedGraph) -> Result<FiniteMetricSpace> {
    build_graph_metric_with(g, ShortestPaths::Dijkstra)
}

pub fn build_graph_metric_with(g: &WeightedGraph, algo: ShortestPaths) -> Result<FiniteMetricSpace> {
    let rows = match algo {
        ShortestPaths::Dijkstra => {
            let adj = g.adjacency();
            (0..g.n).into_par_iter().map(|s| dijkstra(&adj, s)).collect::<Vec<_>>()
        }
        ShortestPaths::FloydWarshall => floyd_warshall(g),
    };
    for (i, row) in rows.iter().enumerate() {
        if let Some(j) = row.iter().position(|d| d.is_infinite()) {
            return Err(Error::DisconnectedGraph { from: i, to: j });
        }
    }
    // Both directions are computed independently; enforce exact symmetry.
    let mut rows = rows;
    for i in 0..g.n {
        for j in (i + 1)..g.n {
            let d = rows[i][j].min(rows[j][i]);
            rows[i][j] = d;
            rows[j][i] = d;
        }
    }
    Ok(FiniteMetricSpace::from_rows_unchecked(rows))
}

#[derive(Clone, Copy, PartialEq)]
struct HeapItem {
    dist: f64,
    node: usize,
}

impl Eq for HeapItem {}

impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn dijkstra(adj: &[Vec<(usize, f64)>], source: usize) -> Vec<f64> {
    let mut dist = vec![f64::INFINITY; adj.len()];
    let mut heap = BinaryHeap::new();
    dist[source] = 0.0;
    heap.push(HeapItem {
        dist: 0.0,
        node: source,
    });
    while let Some(HeapItem { dist: d, node }) = heap.pop() {
        if d > dist[node] {
            continue;
        }
        for &(next, w) in &adj[node] {
            let nd = d + w;
            if nd < dist[next] {
                dist[next] = nd;
                heap.push(HeapItem { dist: nd, node: next });
            }
        }
    }
    dist
}

fn floyd_warshall(g: &WeightedGraph) -> Vec<Vec<f64>> {
    let n = g.n;
    let mut d = vec![vec![f64::INFINITY; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = 0.0;
    }
    for e in &g.edges {
        d[e.from][e.to] = d[e.from][e.to].min(e.weight);
        d[e.to][e.from] = d[e.to][e.from].min(e.weight);
    }
    for k in 0..n {
        for i in 0..n {
            let dik = d[i][k];
            if dik.is_infinite() {
                continue;
            }
            for j in 0..n {
                let via = dik + d[k][j];
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    d
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TriangleViolation {
    pub i: usize,
    /// The intermediate point.
    pub j: usize,
    pub k: usize,
    /// `d(i,k) - d(i,j) - d(j,k)`.
    pub slack: f64,
}

/// Problems found in a candidate distance matrix. Empty means valid.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    /// Rows whose length differs from the number of rows.
    pub malformed_rows: Vec<usize>,
    /// Entries that are negative or not finite.
    pub invalid_entries: Vec<(usize, usize, f64)>,
    pub diagonal: Vec<(usize, f64)>,
    /// `(i, j, d[i][j], d[j][i])` with `i < j`.
    pub symmetry: Vec<(usize, usize, f64, f64)>,
    pub worst_triangle: Option<TriangleViolation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.malformed_rows.is_empty()
            && self.invalid_entries.is_empty()
            && self.diagonal.is_empty()
            && self.symmetry.is_empty()
            && self.worst_triangle.is_none()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_valid() {
            return write!(f, "valid");
        }
        let mut parts = Vec::new();
        if !self.malformed_rows.is_empty() {
            parts.push(format!("{} malformed rows", self.malformed_rows.len()));
        }
        if !self.invalid_entries.is_empty() {
            parts.push(format!("{} negative or non-finite entries", self.invalid_entries.len()));
        }
        if !self.diagonal.is_empty() {
            parts.push(format!("{} nonzero diagonal entries", self.diagonal.len()));
        }
        if !self.symmetry.is_empty() {
            parts.push(format!("{} asymmetric pairs", self.symmetry.len()));
        }
        if let Some(t) = &self.worst_triangle {
            parts.push(format!(
                "triangle inequality violated at ({}, {}, {}) by {}",
                t.i, t.j, t.k, t.slack
            ));
        }
        write!(f, "{}", parts.join("; "))
    }
}

fn validate_shape_and_symmetry(rows: &[Vec<f64>]) -> ValidationReport {
    let n = rows.len();
    let mut report = ValidationReport {
        malformed_rows: rows
            .iter()
            .enumerate()
            .filter(|(_, r)| r.len() != n)
            .map(|(i, _)| i)
            .collect(),
        ..ValidationReport::default()
    };
    if n == 0 {
        report.malformed_rows.push(0);
    }
    if !report.malformed_rows.is_empty() {
        return report;
    }
    for i in 0..n {
        for j in 0..n {
            let v = rows[i][j];
            if !v.is_finite() || v < 0.0 {
                report.invalid_entries.push((i, j, v));
            }
        }
        if rows[i][i] != 0.0 {
            report.diagonal.push((i, rows[i][i]));
        }
        for j in (i + 1)..n {
            if rows[i][j] != rows[j][i] {
                report.symmetry.push((i, j, rows[i][j], rows[j][i]));
            }
        }
    }
    report
}

/// Full metric check: shape, diagonal, symmetry, and the worst triangle violation.
pub fn validate_metric(rows: &[Vec<f64>]) -> ValidationReport {
    let mut report = validate_shape_and_symmetry(rows);
    if !report.malformed_rows.is_empty() {
        return report;
    }
    let n = rows.len();
    let mut worst: Option<TriangleViolation> = None;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let slack = rows[i][k] - rows[i][j] - rows[j][k];
                if slack > TRIANGLE_TOL && worst.is_none_or(|w| slack > w.slack) {
                    worst = Some(TriangleViolation { i, j, k, slack });
                }
            }
        }
    }
    report.worst_triangle = worst;
    report
}

/// A probability vector over the points of a finite space.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbabilityMeasure {
    weights: Vec<f64>,
}

impl ProbabilityMeasure {
    /// Wraps weights that already sum to one (within [`MASS_TOL`]).
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        check_nonnegative(&weights)?;
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > MASS_TOL {
            return Err(Error::NotNormalized(total));
        }
        Ok(Self { weights })
    }

    pub fn uniform(n: usize) -> Self {
        Self {
            weights: vec![1.0 / n as f64; n],
        }
    }

    pub fn dirac(n: usize, at: usize) -> Self {
        let mut weights = vec![0.0; n];
        weights[at] = 1.0;
        Self { weights }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Indices with positive mass.
    pub fn support(&self) -> Vec<usize> {
        (0..self.weights.len()).filter(|&i| self.weights[i] > 0.0).collect()
    }

    pub(crate) fn check_len(&self, n: usize) -> Result<()> {
        if self.weights.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                found: self.weights.len(),
            });
        }
        Ok(())
    }
}

fn check_nonnegative(raw: &[f64]) -> Result<()> {
    for (index, &value) in raw.iter().enumerate() {
        if !value.is_finite() {
            return Err(Error::NonFinite { index, value });
        }
        if value < 0.0 {
            return Err(Error::NegativeMass { index, value });
        }
    }
    Ok(())
}

/// Scales a nonnegative vector to unit mass.
pub fn normalize_measure(raw: &[f64]) -> Result<ProbabilityMeasure> {
    check_nonnegative(raw)?;
    let total: f64 = raw.iter().sum();
    if total <= 0.0 {
        return Err(Error::AllZeroMass);
    }
    Ok(ProbabilityMeasure {
        weights: raw.iter().map(|w| w / total).collect(),
    })
}

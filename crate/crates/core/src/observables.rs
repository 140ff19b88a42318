//! Means, covariances and Lipschitz certification of scalar fields.
//!
//! The covariance here is the raw μ-weighted product of centered
//! observables. [`correlation`] is the same quantity computed after
//! centering both arguments; it is *not* divided by standard deviations,
//! so it should not be confused with a Pearson coefficient.

use std::ops::Deref;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::mmspace::{FiniteMetricSpace, ProbabilityMeasure, WeightedGraph};

/// Absolute slack allowed when certifying a Lipschitz bound.
pub const LIPSCHITZ_TOL: f64 = 1e-8;
/// Largest |mean| accepted by [`covariance`].
pub const CENTERING_TOL: f64 = 1e-9;

/// A real function on the points of a space.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Observable {
    values: Vec<f64>,
    certified: bool,
}

impl Observable {
    /// An uncertified observable.
    pub fn new(values: Vec<f64>) -> Self {
        Self {
            values,
            certified: false,
        }
    }

    /// Runs a pairwise 1-Lipschitz check and keeps the observable only if it passes.
    pub fn certify(values: Vec<f64>, space: &FiniteMetricSpace) -> Result<Self> {
        let report = check_lipschitz(space, &values, 1.0, CheckMode::Pairwise, None)?;
        if !report.certified {
            return Err(Error::UncertifiedObservable {
                index: 0,
                violation: report.max_violation,
            });
        }
        Ok(Self {
            values,
            certified: true,
        })
    }

    /// Distance to `point`, which is always 1-Lipschitz.
    pub fn distance_to(space: &FiniteMetricSpace, point: usize) -> Self {
        Self {
            values: space.row(point).to_vec(),
            certified: true,
        }
    }

    pub(crate) fn trusted(values: Vec<f64>) -> Self {
        Self {
            values,
            certified: true,
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn is_certified(&self) -> bool {
        self.certified
    }
}

impl Deref for Observable {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.values
    }
}

fn check_len(mu: &ProbabilityMeasure, f: &[f64]) -> Result<()> {
    mu.check_len(f.len())
}

/// `Σ μᵢ f(i)`.
pub fn mean(mu: &ProbabilityMeasure, f: &[f64]) -> Result<f64> {
    check_len(mu, f)?;
    Ok(dot_mu(mu, f, &vec![1.0; f.len()]))
}

pub(crate) fn dot_mu(mu: &ProbabilityMeasure, f: &[f64], g: &[f64]) -> f64 {
    mu.weights()
        .iter()
        .zip(f.iter().zip(g))
        .map(|(w, (a, b))| w * a * b)
        .sum()
}

/// Subtracts the μ-mean. Certification carries over.
pub fn center(mu: &ProbabilityMeasure, f: &Observable) -> Result<Observable> {
    Ok(Observable {
        values: center_values(mu, f)?,
        certified: f.certified,
    })
}

pub fn center_values(mu: &ProbabilityMeasure, f: &[f64]) -> Result<Vec<f64>> {
    let m = mean(mu, f)?;
    Ok(f.iter().map(|v| v - m).collect())
}

/// `Σ μᵢ f(i) g(i)` for μ-centered `f` and `g`.
pub fn covariance(mu: &ProbabilityMeasure, f: &[f64], g: &[f64]) -> Result<f64> {
    check_len(mu, f)?;
    check_len(mu, g)?;
    for h in [f, g] {
        let m = mean(mu, h)?;
        if m.abs() > CENTERING_TOL {
            return Err(Error::NotCentered(m));
        }
    }
    Ok(dot_mu(mu, f, g))
}

pub fn variance(mu: &ProbabilityMeasure, f: &[f64]) -> Result<f64> {
    correlation(mu, f, f)
}

/// Covariance of the centered versions of `f` and `g` (unnormalized).
pub fn correlation(mu: &ProbabilityMeasure, f: &[f64], g: &[f64]) -> Result<f64> {
    check_len(mu, f)?;
    check_len(mu, g)?;
    let (fm, gm) = (mean(mu, f)?, mean(mu, g)?);
    Ok(mu
        .weights()
        .iter()
        .zip(f.iter().zip(g))
        .map(|(w, (a, b))| w * (a - fm) * (b - gm))
        .sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CheckMode {
    /// Every pair of points.
    Pairwise,
    /// Only the edges of the graph whose shortest paths define the metric.
    Edges,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CertReport {
    /// `max(|fᵢ − fⱼ| − K·dᵢⱼ)` over the checked pairs; `-inf` if nothing was checked.
    pub max_violation: f64,
    pub worst_pair: Option<(usize, usize)>,
    pub pairs_checked: usize,
    pub certified: bool,
}

/// Checks `|f(i) − f(j)| ≤ K d(i, j)` within [`LIPSCHITZ_TOL`].
///
/// In edges mode only graph edges are checked; for shortest-path metrics
/// that already implies the bound for every pair.
pub fn check_lipschitz(
    space: &FiniteMetricSpace,
    f: &[f64],
    k: f64,
    mode: CheckMode,
    graph: Option<&WeightedGraph>,
) -> Result<CertReport> {
    if f.len() != space.len() {
        return Err(Error::LengthMismatch {
            expected: space.len(),
            found: f.len(),
        });
    }
    let mut worst = f64::NEG_INFINITY;
    let mut worst_pair = None;
    let mut checked = 0;
    let mut visit = |i: usize, j: usize, d: f64| {
        checked += 1;
        let v = (f[i] - f[j]).abs() - k * d;
        if v > worst {
            worst = v;
            worst_pair = Some((i, j));
        }
    };
    match mode {
        CheckMode::Pairwise => space.pairs().for_each(|(i, j, d)| visit(i, j, d)),
        CheckMode::Edges => {
            let g = graph.ok_or(Error::ModeMismatch)?;
            if g.node_count() != space.len() {
                return Err(Error::LengthMismatch {
                    expected: space.len(),
                    found: g.node_count(),
                });
            }
            g.edges().iter().for_each(|e| visit(e.from, e.to, e.weight));
        }
    }
    Ok(CertReport {
        max_violation: worst,
        worst_pair,
        pairs_checked: checked,
        certified: worst <= LIPSCHITZ_TOL,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mmspace::{build_graph_metric, normalize_measure};
    use approx::assert_abs_diff_eq;

    fn uniform(n: usize) -> ProbabilityMeasure {
        ProbabilityMeasure::uniform(n)
    }

    #[test]
    fn means() {
        assert_abs_diff_eq!(mean(&uniform(2), &[0.5, -0.5]).unwrap(), 0.0);
        let mu = normalize_measure(&[3.0, 1.0]).unwrap();
        assert_abs_diff_eq!(mean(&mu, &[0.5, -0.5]).unwrap(), 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(mean(&mu, &[1.7, 1.7]).unwrap(), 1.7, epsilon = 1e-15);
        assert!(matches!(mean(&mu, &[1.0]), Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn centering() {
        let c = center_values(&uniform(3), &[1.0, 2.0, 3.0]).unwrap();
        for (a, b) in c.iter().zip([-1.0, 0.0, 1.0]) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-15);
        }
        assert_eq!(
            center_values(&uniform(3), &[-1.0, 0.0, 1.0]).unwrap(),
            vec![-1.0, 0.0, 1.0]
        );
        let mu = normalize_measure(&[3.0, 1.0]).unwrap();
        assert_eq!(center_values(&mu, &[0.0, 1.0]).unwrap(), vec![-0.25, 0.75]);

        let obs = Observable::trusted(vec![0.0, 1.0]);
        assert!(center(&mu, &obs).unwrap().is_certified());
    }

    #[test]
    fn covariances() {
        let mu = uniform(3);
        let f = [-1.0, 0.0, 1.0];
        assert_abs_diff_eq!(covariance(&mu, &f, &f).unwrap(), 2.0 / 3.0, epsilon = 1e-15);
        let g = [1.0 / 3.0, -2.0 / 3.0, 1.0 / 3.0];
        assert_abs_diff_eq!(covariance(&mu, &f, &g).unwrap(), 0.0, epsilon = 1e-15);
        assert_eq!(covariance(&mu, &[0.0; 3], &[0.0; 3]).unwrap(), 0.0);
        match covariance(&mu, &[1.0, 2.0, 3.0], &f) {
            Err(Error::NotCentered(m)) => assert_abs_diff_eq!(m, 2.0, epsilon = 1e-15),
            other => panic!("expected NotCentered, got {other:?}"),
        }
    }

    #[test]
    fn variances_and_correlations() {
        assert_abs_diff_eq!(variance(&uniform(2), &[0.5, -0.5]).unwrap(), 0.25);
        assert_eq!(variance(&uniform(4), &[2.0; 4]).unwrap(), 0.0);
        assert_abs_diff_eq!(
            variance(&uniform(3), &[-1.0, 0.0, 1.0]).unwrap(),
            2.0 / 3.0,
            epsilon = 1e-15
        );

        let mu = uniform(4);
        let f = [1.0, -1.0, 0.0, 0.0];
        let g = [0.0, 0.0, 1.0, -1.0];
        assert_abs_diff_eq!(correlation(&mu, &f, &g).unwrap(), 0.0);
        assert_abs_diff_eq!(correlation(&mu, &f, &f).unwrap(), variance(&mu, &f).unwrap());
        assert_abs_diff_eq!(correlation(&mu, &[3.0; 4], &g).unwrap(), 0.0);
    }

    #[test]
    fn lipschitz_checks() {
        let two = FiniteMetricSpace::new(vec![vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let r = check_lipschitz(&two, &[0.0, 2.0], 1.0, CheckMode::Pairwise, None).unwrap();
        assert_eq!(r.max_violation, 1.0);
        assert!(!r.certified);
        let r = check_lipschitz(&two, &[0.0, 2.0], 1e12, CheckMode::Pairwise, None).unwrap();
        assert!(r.certified);

        let g = WeightedGraph::new(3, [(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        let path = build_graph_metric(&g).unwrap();
        let r = check_lipschitz(&path, &[-1.0, 0.0, 1.0], 1.0, CheckMode::Edges, Some(&g)).unwrap();
        assert!(r.certified);
        assert_eq!(r.pairs_checked, 2);
        assert!(matches!(
            check_lipschitz(&path, &[-1.0, 0.0, 1.0], 1.0, CheckMode::Edges, None),
            Err(Error::ModeMismatch)
        ));
    }
}

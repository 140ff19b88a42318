use serde::Serialize;

use crate::error::{Error, Result};
use crate::mmspace::{FiniteMetricSpace, ProbabilityMeasure, WeightedGraph};
use crate::observables::{mean, CENTERING_TOL};
use crate::simplex::StandardLp;

/// Which pairs carry a Lipschitz constraint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ConstraintMode {
    /// One constraint per unordered pair of points.
    #[default]
    Pairwise,
    /// One constraint per graph edge; valid for shortest-path metrics.
    Edges,
}

/// `{f : |fᵢ − fⱼ| ≤ dᵢⱼ for constrained pairs, ⟨aₖ, f⟩ = 0 for equality rows}`.
///
/// The first equality row is always the centering row `μ`; each prior
/// observable `φ` adds the row `μ ⊙ φ`.
#[derive(Debug, Clone, PartialEq)]
pub struct LipschitzPolytope {
    n: usize,
    pairs: Vec<(usize, usize, f64)>,
    /// Indices into `pairs` not implied by a two-hop path through strictly shorter pairs.
    essential: Vec<usize>,
    equalities: Vec<Vec<f64>>,
}

impl LipschitzPolytope {
    pub fn build(
        space: &FiniteMetricSpace,
        mu: &ProbabilityMeasure,
        priors: &[&[f64]],
        mode: ConstraintMode,
        graph: Option<&WeightedGraph>,
    ) -> Result<Self> {
        let n = space.len();
        mu.check_len(n)?;
        let pairs: Vec<(usize, usize, f64)> = match mode {
            ConstraintMode::Pairwise => space.pairs().collect(),
            ConstraintMode::Edges => {
                let g = graph.ok_or(Error::ModeMismatch)?;
                if g.node_count() != n {
                    return Err(Error::LengthMismatch {
                        expected: n,
                        found: g.node_count(),
                    });
                }
                g.edges().iter().map(|e| (e.from, e.to, e.weight)).collect()
            }
        };
        let mut equalities = vec![mu.weights().to_vec()];
        for prior in priors {
            let m = mean(mu, prior)?;
            if m.abs() > CENTERING_TOL {
                return Err(Error::NotCentered(m));
            }
            equalities.push(mu.weights().iter().zip(prior.iter()).map(|(w, p)| w * p).collect());
        }
        let essential = essential_pairs(space, &pairs);
        Ok(Self {
            n,
            pairs,
            essential,
            equalities,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Constrained pairs `(i, j, dᵢⱼ)`.
    pub fn pairs(&self) -> &[(usize, usize, f64)] {
        &self.pairs
    }

    /// Number of pair constraints actually handed to the LP.
    pub fn essential_len(&self) -> usize {
        self.essential.len()
    }

    pub fn equalities(&self) -> &[Vec<f64>] {
        &self.equalities
    }

    /// Largest violation over all inequality and equality rows.
    pub fn max_violation(&self, f: &[f64]) -> (f64, f64) {
        let ineq = self
            .pairs
            .iter()
            .map(|&(i, j, d)| (f[i] - f[j]).abs() - d)
            .fold(f64::NEG_INFINITY, f64::max);
        let eq = self
            .equalities
            .iter()
            .map(|a| a.iter().zip(f).map(|(x, y)| x * y).sum::<f64>().abs())
            .fold(0.0, f64::max);
        (ineq, eq)
    }
}

/// Pairs `(i, j)` with `d(i,j) ≥ d(i,k) + d(k,j)` for some `k` where both
/// hops are strictly shorter are implied by those hops; by induction on
/// length every dropped pair is implied by a chain of kept ones.
fn essential_pairs(space: &FiniteMetricSpace, pairs: &[(usize, usize, f64)]) -> Vec<usize> {
    let n = space.len();
    let eps = 1e-13 * space.diameter().max(f64::MIN_POSITIVE);
    (0..pairs.len())
        .filter(|&p| {
            let (i, j, d) = pairs[p];
            !(0..n).any(|k| {
                let (a, b) = (space.dist(i, k), space.dist(k, j));
                k != i && k != j && a > eps && b > eps && a + b <= d + eps
            })
        })
        .collect()
}

/// Relative right-hand-side perturbation used to break LP degeneracy.
const LP_PERTURBATION: f64 = 1e-11;

/// Maximizes `⟨c, f⟩` over the polytope.
///
/// Solves the dual transshipment-style LP (one row per point, one column per
/// directed Lipschitz constraint plus split free columns for the equality
/// rows) and reads `f` off the simplex multipliers, so every constraint that
/// is tight at the optimum holds to rounding. Implied pair constraints are
/// left out of the LP.
pub fn lp_maximize(c: &[f64], polytope: &LipschitzPolytope) -> Result<Vec<f64>> {
    let n = polytope.n;
    if c.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            found: c.len(),
        });
    }
    if c.iter().all(|&v| v == 0.0) {
        return Ok(vec![0.0; n]);
    }
    let mut lp = StandardLp::new(n, c.to_vec());
    for (i, j, d) in polytope.essential.iter().map(|&p| polytope.pairs[p]) {
        lp.push_column(vec![(i, 1.0), (j, -1.0)], d);
        lp.push_column(vec![(j, 1.0), (i, -1.0)], d);
    }
    for a in &polytope.equalities {
        let col: Vec<(usize, f64)> = a
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(|(i, &v)| (i, v))
            .collect();
        let neg = col.iter().map(|&(i, v)| (i, -v)).collect();
        lp.push_column(col, 0.0);
        lp.push_column(neg, 0.0);
    }
    Ok(lp.solve_perturbed(LP_PERTURBATION)?.duals)
}

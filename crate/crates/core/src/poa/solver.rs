use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use super::polytope::{lp_maximize, ConstraintMode, LipschitzPolytope};
use crate::error::{Error, Result};
use crate::mmspace::{FiniteMetricSpace, ProbabilityMeasure, WeightedGraph};
use crate::observables::{center_values, check_lipschitz, variance, CheckMode, Observable};

/// Slack tolerated when asserting that CCP variance does not decrease.
const MONOTONE_SLACK: f64 = 1e-12;
/// Relative tolerance for "one observable is worse than the next" repairs.
const ORDER_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolverConfig {
    pub restarts: usize,
    pub max_ccp_iters: usize,
    pub rel_improvement_tol: f64,
    pub variance_floor: f64,
    pub seed: u64,
    pub constraint_mode: ConstraintMode,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            restarts: 16,
            max_ccp_iters: 100,
            rel_improvement_tol: 1e-7,
            variance_floor: 1e-10,
            seed: 0,
            constraint_mode: ConstraintMode::Pairwise,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 {
            return Err(Error::InvalidConfig("restarts must be at least 1".into()));
        }
        if self.max_ccp_iters == 0 {
            return Err(Error::InvalidConfig("max_ccp_iters must be at least 1".into()));
        }
        if !(self.rel_improvement_tol > 0.0) || !(self.variance_floor > 0.0) {
            return Err(Error::InvalidConfig("tolerances must be positive".into()));
        }
        Ok(())
    }
}

/// How a single CCP run went.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunTrace {
    pub restart: usize,
    /// Variance after each LP step, starting with the first LP iterate.
    pub variances: Vec<f64>,
}

impl RunTrace {
    pub fn iterations(&self) -> usize {
        self.variances.len().saturating_sub(1)
    }

    pub fn is_monotone(&self) -> bool {
        self.variances
            .windows(2)
            .all(|w| w[1] >= w[0] - MONOTONE_SLACK * w[0].abs().max(1.0))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveDiagnostics {
    pub best_restart: usize,
    pub restarts_used: usize,
    pub iterations: usize,
    pub runs: Vec<RunTrace>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrincipalObservable {
    pub observable: Observable,
    pub variance: f64,
    pub diagnostics: SolveDiagnostics,
}

/// Principal observables `φ₁, φ₂, …` in extraction order.
#[derive(Debug, Clone, PartialEq)]
pub struct PrincipalObservableSet {
    pub observables: Vec<Observable>,
    pub variances: Vec<f64>,
    pub diagnostics: Vec<SolveDiagnostics>,
    /// Set when fewer than the requested number exist.
    pub truncated: bool,
}

impl PrincipalObservableSet {
    pub fn len(&self) -> usize {
        self.observables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observables.is_empty()
    }

    pub fn from_observables(observables: Vec<Observable>, mu: &ProbabilityMeasure) -> Result<Self> {
        let variances = observables
            .iter()
            .map(|o| variance(mu, o))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            diagnostics: Vec::new(),
            observables,
            variances,
            truncated: false,
        })
    }
}

/// Flips `f` so its largest-magnitude entry is positive (lowest index on ties).
pub fn sign_normalize(f: &mut [f64]) {
    let max = f.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if max == 0.0 {
        return;
    }
    let tie = 1e-9 * max.max(1.0);
    if let Some(lead) = f.iter().position(|v| v.abs() >= max - tie) {
        if f[lead] < 0.0 {
            f.iter_mut().for_each(|v| *v = -*v);
        }
    }
}

/// Convex-concave procedure over the Lipschitz polytope.
///
/// Each step maximizes the linearization `⟨2μ⊙fₜ, f⟩` of the variance with
/// [`lp_maximize`]; because the variance is convex the sequence of
/// variances never decreases.
#[derive(Debug, Clone)]
pub struct PoaSolver<'a> {
    space: &'a FiniteMetricSpace,
    mu: &'a ProbabilityMeasure,
    graph: Option<&'a WeightedGraph>,
    config: SolverConfig,
}

struct Run {
    f: Vec<f64>,
    variance: f64,
    trace: RunTrace,
}

impl<'a> PoaSolver<'a> {
    pub fn new(
        space: &'a FiniteMetricSpace,
        mu: &'a ProbabilityMeasure,
        graph: Option<&'a WeightedGraph>,
        config: SolverConfig,
    ) -> Result<Self> {
        config.validate()?;
        mu.check_len(space.len())?;
        if config.constraint_mode == ConstraintMode::Edges && graph.is_none() {
            return Err(Error::ModeMismatch);
        }
        Ok(Self {
            space,
            mu,
            graph,
            config,
        })
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    pub fn polytope(&self, priors: &[Observable]) -> Result<LipschitzPolytope> {
        let priors: Vec<&[f64]> = priors.iter().map(|p| p.values()).collect();
        LipschitzPolytope::build(self.space, self.mu, &priors, self.config.constraint_mode, self.graph)
    }

    /// Centered distance to the point minimizing `Σ μᵢ d(x, i)²`.
    fn barycentric_start(&self) -> Result<Vec<f64>> {
        let w = self.mu.weights();
        let score = |x: usize| -> f64 { self.space.row(x).iter().zip(w).map(|(d, m)| m * d * d).sum() };
        let best = (0..self.space.len())
            .min_by(|&a, &b| score(a).total_cmp(&score(b)))
            .ok_or(Error::EmptySpace)?;
        center_values(self.mu, self.space.row(best))
    }

    fn gradient(&self, f: &[f64]) -> Vec<f64> {
        self.mu.weights().iter().zip(f).map(|(m, v)| 2.0 * m * v).collect()
    }

    fn iterate(&self, polytope: &LipschitzPolytope, start: Vec<f64>, restart: usize) -> Result<Run> {
        let mut f = start;
        let mut var = variance(self.mu, &f)?;
        let mut variances = vec![var];
        for _ in 0..self.config.max_ccp_iters {
            let next = lp_maximize(&self.gradient(&f), polytope)?;
            let next_var = variance(self.mu, &next)?;
            if next_var < var {
                // Only rounding can get here; keep the better point.
                debug_assert!(next_var >= var - MONOTONE_SLACK * var.max(1.0));
                break;
            }
            let gain = next_var - var;
            f = next;
            var = next_var;
            variances.push(var);
            if gain <= self.config.rel_improvement_tol * var.max(f64::MIN_POSITIVE) {
                break;
            }
        }
        Ok(Run {
            f,
            variance: var,
            trace: RunTrace { restart, variances },
        })
    }

    fn random_start(&self, polytope: &LipschitzPolytope, priors: usize, restart: usize) -> Result<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.config.seed);
        rng.set_stream(((priors as u64) << 32) | restart as u64);
        let n = self.space.len();
        let mut u: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
        let norm = u.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            u.iter_mut().for_each(|v| *v /= norm);
        }
        lp_maximize(&u, polytope)
    }

    /// The next principal observable given the ones already found.
    pub fn principal_observable(&self, priors: &[Observable]) -> Result<PrincipalObservable> {
        self.principal_observable_from(priors, &[])
    }

    /// Like [`PoaSolver::principal_observable`], with extra feasible starting points.
    pub fn principal_observable_from(
        &self,
        priors: &[Observable],
        warm_starts: &[Vec<f64>],
    ) -> Result<PrincipalObservable> {
        let polytope = self.polytope(priors)?;
        let restarts = self.config.restarts;
        let runs = (0..restarts + warm_starts.len())
            .into_par_iter()
            .map(|r| {
                let start = if r == 0 {
                    lp_maximize(&self.gradient(&self.barycentric_start()?), &polytope)?
                } else if r < restarts {
                    self.random_start(&polytope, priors.len(), r)?
                } else {
                    warm_starts[r - restarts].clone()
                };
                self.iterate(&polytope, start, r)
            })
            .collect::<Result<Vec<Run>>>()?;

        let mut best = 0;
        for (i, run) in runs.iter().enumerate() {
            if run.variance > runs[best].variance {
                best = i;
            }
        }
        let best_var = runs[best].variance;
        if !(best_var >= self.config.variance_floor) {
            return Err(Error::DegenerateVariance(best_var));
        }

        let mut f = center_values(self.mu, &runs[best].f)?;
        sign_normalize(&mut f);
        let cert = check_lipschitz(self.space, &f, 1.0, CheckMode::Pairwise, None)?;
        if !cert.certified {
            return Err(Error::LipschitzViolation(cert.max_violation));
        }
        let variance = variance(self.mu, &f)?;
        let diagnostics = SolveDiagnostics {
            best_restart: runs[best].trace.restart,
            restarts_used: runs.len(),
            iterations: runs[best].trace.iterations(),
            runs: runs.into_iter().map(|r| r.trace).collect(),
        };
        Ok(PrincipalObservable {
            observable: Observable::trusted(f),
            variance,
            diagnostics,
        })
    }

    /// Up to `k` principal observables; stops early once the variance degenerates.
    ///
    /// If a later observable beats an earlier one, the earlier step was a
    /// local optimum: it is re-solved with the later observable (feasible
    /// for the earlier problem) as an extra start and the tail recomputed.
    pub fn solve(&self, k: usize) -> Result<PrincipalObservableSet> {
        if k == 0 {
            return Err(Error::InvalidConfig("k must be at least 1".into()));
        }
        let mut found: Vec<PrincipalObservable> = Vec::new();
        let mut warm: Vec<Vec<Vec<f64>>> = vec![Vec::new(); k];
        let mut repairs = 0;
        let max_repairs = 2 * k;
        let mut truncated = false;
        while found.len() < k {
            let m = found.len();
            let priors: Vec<Observable> = found.iter().map(|p| p.observable.clone()).collect();
            let next = match self.principal_observable_from(&priors, &warm[m]) {
                Ok(p) => p,
                Err(Error::DegenerateVariance(_)) => {
                    truncated = true;
                    break;
                }
                Err(e) => return Err(e),
            };
            if let Some(prev) = found.last() {
                if next.variance > prev.variance * (1.0 + ORDER_SLACK) && repairs < max_repairs {
                    repairs += 1;
                    warm[m - 1].push(next.observable.values().to_vec());
                    warm[m..].iter_mut().for_each(Vec::clear);
                    found.pop();
                    continue;
                }
            }
            found.push(next);
        }
        let mut set = PrincipalObservableSet {
            observables: Vec::with_capacity(found.len()),
            variances: Vec::with_capacity(found.len()),
            diagnostics: Vec::with_capacity(found.len()),
            truncated,
        };
        for p in found {
            set.observables.push(p.observable);
            set.variances.push(p.variance);
            set.diagnostics.push(p.diagnostics);
        }
        Ok(set)
    }
}

//! McShane-Whitney extensions of sampled 1-Lipschitz functions.
//!
//! Queries are given as distance vectors to the sample points, so new points
//! can come from anywhere distances can be measured.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mmspace::{FiniteMetricSpace, ProbabilityMeasure};
use crate::poa::{PoaSolver, SolverConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExtensionMode {
    /// `min_i φ(xᵢ) + d(x, xᵢ)`, the largest 1-Lipschitz extension.
    Upper,
    /// `max_i φ(xᵢ) − d(x, xᵢ)`, the smallest one.
    Lower,
    /// Average of upper and lower.
    Balanced,
}

impl ExtensionMode {
    pub const ALL: [ExtensionMode; 3] = [ExtensionMode::Upper, ExtensionMode::Lower, ExtensionMode::Balanced];
}

/// Values of an observable on a finite sample.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledObservable {
    values: Vec<f64>,
}

impl SampledObservable {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptySample);
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Extended value at a query given its distances to the sample points.
    ///
    /// A query at distance exactly zero from sample point `i` returns `φ(xᵢ)`.
    pub fn extend(&self, query: &[f64], mode: ExtensionMode) -> Result<f64> {
        if query.len() != self.values.len() {
            return Err(Error::LengthMismatch {
                expected: self.values.len(),
                found: query.len(),
            });
        }
        if let Some((index, &value)) = query.iter().enumerate().find(|(_, d)| !d.is_finite() || **d < 0.0) {
            return Err(Error::NonFinite { index, value });
        }
        if let Some(i) = query.iter().position(|&d| d == 0.0) {
            return Ok(self.values[i]);
        }
        let upper = || {
            self.values
                .iter()
                .zip(query)
                .map(|(v, d)| v + d)
                .fold(f64::INFINITY, f64::min)
        };
        let lower = || {
            self.values
                .iter()
                .zip(query)
                .map(|(v, d)| v - d)
                .fold(f64::NEG_INFINITY, f64::max)
        };
        Ok(match mode {
            ExtensionMode::Upper => upper(),
            ExtensionMode::Lower => lower(),
            ExtensionMode::Balanced => 0.5 * (upper() + lower()),
        })
    }
}

/// Gap between observables extended from a subsample and those recomputed on all points.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LeaveOutReport {
    pub held_out: Vec<usize>,
    /// Per observable: max over held-out points of `|φ⁰_sub(x) − φ_full(x)|`,
    /// minimized over the sign of the subsample observable.
    pub max_deviation: Vec<f64>,
    /// Same quantity over the retained points, where no extension is involved.
    pub max_deviation_retained: Vec<f64>,
}

/// Re-solves on all points except `held_out`, extends each observable to the
/// held-out points with the balanced extension, and reports the deviation
/// from the full-data observables. Nothing is asserted about the size of
/// the gap: the subsample problem is a different optimization.
pub fn leave_out_evaluation(
    space: &FiniteMetricSpace,
    mu: &ProbabilityMeasure,
    held_out: &[usize],
    k: usize,
    config: &SolverConfig,
) -> Result<LeaveOutReport> {
    let n = space.len();
    let kept: Vec<usize> = (0..n).filter(|i| !held_out.contains(i)).collect();
    if kept.is_empty() {
        return Err(Error::EmptySample);
    }
    let sub_space = space.subspace(&kept)?;
    let sub_mu = crate::mmspace::normalize_measure(&kept.iter().map(|&i| mu.weights()[i]).collect::<Vec<_>>())?;
    let pairwise = SolverConfig {
        constraint_mode: crate::poa::ConstraintMode::Pairwise,
        ..config.clone()
    };
    let full = PoaSolver::new(space, mu, None, pairwise.clone())?.solve(k)?;
    let sub = PoaSolver::new(&sub_space, &sub_mu, None, pairwise)?.solve(k)?;

    let m = full.len().min(sub.len());
    let mut max_deviation = Vec::with_capacity(m);
    let mut max_deviation_retained = Vec::with_capacity(m);
    for t in 0..m {
        let phi_full = &full.observables[t];
        let phi_sub = &sub.observables[t];
        let mut best = (f64::INFINITY, f64::INFINITY);
        for sign in [1.0, -1.0] {
            let sampled = SampledObservable::new(phi_sub.iter().map(|v| sign * v).collect())?;
            let mut dev_out: f64 = 0.0;
            for &h in held_out {
                let query: Vec<f64> = kept.iter().map(|&i| space.dist(h, i)).collect();
                let v = sampled.extend(&query, ExtensionMode::Balanced)?;
                dev_out = dev_out.max((v - phi_full[h]).abs());
            }
            let dev_in = kept
                .iter()
                .enumerate()
                .map(|(s, &i)| (sign * phi_sub[s] - phi_full[i]).abs())
                .fold(0.0, f64::max);
            if dev_out < best.0 {
                best = (dev_out, dev_in);
            }
        }
        max_deviation.push(best.0);
        max_deviation_retained.push(best.1);
    }
    Ok(LeaveOutReport {
        held_out: held_out.to_vec(),
        max_deviation,
        max_deviation_retained,
    })
}

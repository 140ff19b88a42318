//! Signals in the observable domain.
//!
//! Principal observables, normalized in `L²(μ)` and preceded by the constant
//! function, form a μ-orthonormal system `u₀, u₁, …, u_k`. A signal `f` is
//! represented by `aᵢ = ⟨f, uᵢ⟩_μ` and approximated by `Σ aᵢ uᵢ`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::mmspace::ProbabilityMeasure;
use crate::observables::dot_mu;
use crate::poa::PrincipalObservableSet;

const NORM_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ObservableBasis {
    /// `u₀ ≡ 1` followed by the normalized observables.
    pub vectors: Vec<Vec<f64>>,
    /// `‖φᵢ‖_{2,μ}` used for scaling (1 for `u₀`).
    pub norms: Vec<f64>,
}

impl ObservableBasis {
    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn point_count(&self) -> usize {
        self.vectors[0].len()
    }

    /// `⟨uᵢ, uⱼ⟩_μ`.
    pub fn gram(&self, mu: &ProbabilityMeasure) -> Vec<Vec<f64>> {
        self.vectors
            .iter()
            .map(|a| self.vectors.iter().map(|b| dot_mu(mu, a, b)).collect())
            .collect()
    }
}

/// Coefficients `a₀, …, a_k`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ObservableSpectrum {
    pub coefficients: Vec<f64>,
}

pub fn orthonormalize(pos: &PrincipalObservableSet, mu: &ProbabilityMeasure) -> Result<ObservableBasis> {
    let n = mu.len();
    let mut vectors = vec![vec![1.0; n]];
    let mut norms = vec![1.0];
    for (i, phi) in pos.observables.iter().enumerate() {
        mu.check_len(phi.len())?;
        let norm = dot_mu(mu, phi, phi).sqrt();
        if !(norm > NORM_FLOOR) {
            return Err(Error::ZeroNormObservable(i + 1));
        }
        vectors.push(phi.iter().map(|v| v / norm).collect());
        norms.push(norm);
    }
    Ok(ObservableBasis { vectors, norms })
}

pub fn analyze(f: &[f64], basis: &ObservableBasis, mu: &ProbabilityMeasure) -> Result<ObservableSpectrum> {
    mu.check_len(f.len())?;
    if basis.point_count() != f.len() {
        return Err(Error::LengthMismatch {
            expected: basis.point_count(),
            found: f.len(),
        });
    }
    Ok(ObservableSpectrum {
        coefficients: basis.vectors.iter().map(|u| dot_mu(mu, f, u)).collect(),
    })
}

pub fn synthesize(spectrum: &ObservableSpectrum, basis: &ObservableBasis) -> Result<Vec<f64>> {
    if spectrum.coefficients.len() > basis.len() {
        return Err(Error::SizeMismatch {
            expected: basis.len(),
            found: spectrum.coefficients.len(),
        });
    }
    let mut out = vec![0.0; basis.point_count()];
    for (a, u) in spectrum.coefficients.iter().zip(&basis.vectors) {
        out.iter_mut().zip(u).for_each(|(o, v)| *o += a * v);
    }
    Ok(out)
}

/// `f_k = Σ_{i ≤ k} aᵢ uᵢ`, i.e. the constant term plus the first `k` observables.
pub fn approximate(f: &[f64], basis: &ObservableBasis, mu: &ProbabilityMeasure, k: usize) -> Result<Vec<f64>> {
    let mut spectrum = analyze(f, basis, mu)?;
    spectrum.coefficients.truncate(k + 1);
    synthesize(&spectrum, basis)
}

/// `‖f − g‖_{2,μ}`.
pub fn l2_distance(mu: &ProbabilityMeasure, f: &[f64], g: &[f64]) -> f64 {
    let diff: Vec<f64> = f.iter().zip(g).map(|(a, b)| a - b).collect();
    dot_mu(mu, &diff, &diff).sqrt()
}

/// Sign changes along the index order, ignoring entries within `tol · max|u|` of zero.
pub fn sign_changes(u: &[f64], tol: f64) -> usize {
    let scale = u.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let cut = tol * scale;
    let mut last = 0.0_f64;
    let mut changes = 0;
    for &v in u {
        if v.abs() <= cut {
            continue;
        }
        if last != 0.0 && last.signum() != v.signum() {
            changes += 1;
        }
        last = v;
    }
    changes
}

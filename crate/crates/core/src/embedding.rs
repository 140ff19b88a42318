//! POA embeddings into (ℝᵏ, L∞), distortion statistics, and a classical MDS
//! baseline in (ℝᵏ, L2).
//!
//! The two embeddings live in different normed spaces, so a side-by-side
//! comparison ([`compare`]) keeps each report labeled with its norm.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::mmspace::FiniteMetricSpace;
use crate::poa::PrincipalObservableSet;

pub const DEFAULT_BINS: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Norm {
    #[serde(rename = "linf")]
    LInf,
    #[serde(rename = "l2")]
    L2,
}

impl Norm {
    pub fn distance(self, a: &[f64], b: &[f64]) -> f64 {
        let diffs = a.iter().zip(b).map(|(x, y)| (x - y).abs());
        match self {
            Norm::LInf => diffs.fold(0.0, f64::max),
            Norm::L2 => diffs.map(|d| d * d).sum::<f64>().sqrt(),
        }
    }
}

/// Point coordinates, one row per point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Embedding {
    pub coords: Vec<Vec<f64>>,
    pub norm: Norm,
}

impl Embedding {
    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.coords.first().map_or(0, Vec::len)
    }
}

/// `x ↦ (φ₁(x), …, φₖ(x))` with the L∞ norm.
pub fn embed(pos: &PrincipalObservableSet, k: usize) -> Result<Embedding> {
    if k == 0 || k > pos.len() {
        return Err(Error::NotEnoughObservables {
            requested: k,
            available: pos.len(),
        });
    }
    let n = pos.observables[0].len();
    let coords = (0..n)
        .map(|i| pos.observables[..k].iter().map(|phi| phi[i]).collect())
        .collect();
    Ok(Embedding {
        coords,
        norm: Norm::LInf,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistortionSummary {
    pub mean: f64,
    pub median: f64,
    pub max: f64,
    pub fraction_below_0_1: f64,
}

/// Pairwise distortions `δ(i,j) = |d(i,j) − ‖xᵢ − xⱼ‖|` and a histogram of `ln(1 + δ)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistortionReport {
    pub norm: Norm,
    /// `(i, j, δ)` for `i < j`.
    pub pairs: Vec<(usize, usize, f64)>,
    pub bin_edges: Vec<f64>,
    pub counts: Vec<usize>,
    pub summary: DistortionSummary,
}

pub fn distortions(space: &FiniteMetricSpace, emb: &Embedding) -> Result<Vec<(usize, usize, f64)>> {
    if emb.len() != space.len() {
        return Err(Error::SizeMismatch {
            expected: space.len(),
            found: emb.len(),
        });
    }
    Ok(space
        .pairs()
        .map(|(i, j, d)| (i, j, (d - emb.norm.distance(&emb.coords[i], &emb.coords[j])).abs()))
        .collect())
}

/// Distortion report with `bins` equal bins over `[0, max ln(1 + δ)]`.
pub fn distortion_report(space: &FiniteMetricSpace, emb: &Embedding, bins: usize) -> Result<DistortionReport> {
    let pairs = distortions(space, emb)?;
    let upper = pairs.iter().map(|p| p.2.ln_1p()).fold(0.0, f64::max);
    Ok(build_report(emb.norm, pairs, bins, upper))
}

fn build_report(norm: Norm, pairs: Vec<(usize, usize, f64)>, bins: usize, upper: f64) -> DistortionReport {
    let bins = bins.max(1);
    let upper = if upper > 0.0 { upper } else { 1.0 };
    let width = upper / bins as f64;
    let bin_edges = (0..=bins).map(|b| b as f64 * width).collect();
    let mut counts = vec![0; bins];
    for &(_, _, d) in &pairs {
        let b = ((d.ln_1p() / width) as usize).min(bins - 1);
        counts[b] += 1;
    }
    let mut sorted: Vec<f64> = pairs.iter().map(|p| p.2).collect();
    sorted.sort_by(f64::total_cmp);
    let m = sorted.len();
    let summary = if m == 0 {
        DistortionSummary {
            mean: 0.0,
            median: 0.0,
            max: 0.0,
            fraction_below_0_1: 1.0,
        }
    } else {
        DistortionSummary {
            mean: sorted.iter().sum::<f64>() / m as f64,
            median: if m % 2 == 1 {
                sorted[m / 2]
            } else {
                0.5 * (sorted[m / 2 - 1] + sorted[m / 2])
            },
            max: sorted[m - 1],
            fraction_below_0_1: sorted.iter().filter(|&&d| d < 0.1).count() as f64 / m as f64,
        }
    };
    DistortionReport {
        norm,
        pairs,
        bin_edges,
        counts,
        summary,
    }
}

/// POA (L∞) and MDS (L2) distortion reports over a shared histogram range.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub poa: DistortionReport,
    pub mds: DistortionReport,
}

pub fn compare(space: &FiniteMetricSpace, poa: &Embedding, mds: &Embedding, bins: usize) -> Result<ComparisonReport> {
    let a = distortions(space, poa)?;
    let b = distortions(space, mds)?;
    let upper = a.iter().chain(&b).map(|p| p.2.ln_1p()).fold(0.0, f64::max);
    Ok(ComparisonReport {
        poa: build_report(poa.norm, a, bins, upper),
        mds: build_report(mds.norm, b, bins, upper),
    })
}

/// Classical (Torgerson) MDS: eigenvectors of `−½ J D² J` scaled by `√λ`,
/// negative eigenvalues clamped to zero.
pub fn classical_mds(space: &FiniteMetricSpace, k: usize) -> Result<Embedding> {
    let n = space.len();
    if k == 0 || k + 1 > n {
        return Err(Error::SizeMismatch {
            expected: n.saturating_sub(1),
            found: k,
        });
    }
    let d2 = DMatrix::from_fn(n, n, |i, j| space.dist(i, j).powi(2));
    let row_means: Vec<f64> = (0..n).map(|i| d2.row(i).mean()).collect();
    let grand = row_means.iter().sum::<f64>() / n as f64;
    let b = DMatrix::from_fn(n, n, |i, j| -0.5 * (d2[(i, j)] - row_means[i] - row_means[j] + grand));
    let eig = SymmetricEigen::new(b);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));

    let mut coords = vec![vec![0.0; k]; n];
    for (c, &idx) in order.iter().take(k).enumerate() {
        let lambda = eig.eigenvalues[idx].max(0.0);
        let mut v: Vec<f64> = eig.eigenvectors.column(idx).iter().copied().collect();
        crate::poa::sign_normalize(&mut v);
        let s = lambda.sqrt();
        for (row, vi) in coords.iter_mut().zip(&v) {
            row[c] = vi * s;
        }
    }
    Ok(Embedding { coords, norm: Norm::L2 })
}

//! Wasserstein-1 on finite spaces and audits of the observable stability bounds.
//!
//! For 1-Lipschitz `f`, `|M_μ f − M_ν f| ≤ w₁(μ, ν)`. For pairs `(f, g)`,
//! centering with respect to μ and to ν moves each function by at most
//! `w₁` in sup-norm and changes the covariance by at most `4·D·w₁`, where
//! `D` is the diameter; with `C = max(1, 4D)` this makes every
//! `ε > C·w₁` admissible for the Hausdorff distance between the two
//! covariance operators. The audits check these inequalities on supplied
//! observable families; they never claim to evaluate the suprema.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::mmspace::{FiniteMetricSpace, ProbabilityMeasure};
use crate::observables::{check_lipschitz, dot_mu, mean, CheckMode, Observable};
use crate::poa::{lp_maximize, ConstraintMode, LipschitzPolytope, PrincipalObservableSet};
use crate::simplex::StandardLp;

/// Slack added to every audited bound.
pub const AUDIT_TOL: f64 = 1e-8;

/// A coupling of two measures and its transport cost.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransportPlan {
    pub plan: Vec<Vec<f64>>,
    pub cost: f64,
}

impl TransportPlan {
    pub fn row_sums(&self) -> Vec<f64> {
        self.plan.iter().map(|r| r.iter().sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<f64> {
        let n = self.plan.first().map_or(0, Vec::len);
        (0..n).map(|j| self.plan.iter().map(|r| r[j]).sum()).collect()
    }
}

/// Exact Wasserstein-1 distance via the transport LP on the two supports.
pub fn wasserstein1(
    space: &FiniteMetricSpace,
    mu: &ProbabilityMeasure,
    nu: &ProbabilityMeasure,
) -> Result<(f64, TransportPlan)> {
    let n = space.len();
    mu.check_len(n)?;
    nu.check_len(n)?;
    let src = mu.support();
    let dst = nu.support();
    if src.is_empty() || dst.is_empty() {
        return Err(Error::AllZeroMass);
    }
    // Rows: one per source, one per destination except the last (implied).
    let rows = src.len() + dst.len() - 1;
    let mut rhs: Vec<f64> = src.iter().map(|&i| mu.weights()[i]).collect();
    rhs.extend(dst[..dst.len() - 1].iter().map(|&j| nu.weights()[j]));
    let mut lp = StandardLp::new(rows, rhs);
    for (a, &i) in src.iter().enumerate() {
        for (b, &j) in dst.iter().enumerate() {
            let mut col = vec![(a, 1.0)];
            if b + 1 < dst.len() {
                col.push((src.len() + b, 1.0));
            }
            lp.push_column(col, space.dist(i, j));
        }
    }
    let sol = lp.solve()?;
    let mut plan = vec![vec![0.0; n]; n];
    for (a, &i) in src.iter().enumerate() {
        for (b, &j) in dst.iter().enumerate() {
            plan[i][j] = sol.x[a * dst.len() + b];
        }
    }
    let cost = sol.objective;
    Ok((cost, TransportPlan { plan, cost }))
}

fn certify_all(space: &FiniteMetricSpace, obs: &[&[f64]]) -> Result<()> {
    for (index, f) in obs.iter().enumerate() {
        let r = check_lipschitz(space, f, 1.0, CheckMode::Pairwise, None)?;
        if !r.certified {
            return Err(Error::UncertifiedObservable {
                index,
                violation: r.max_violation,
            });
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeanAuditReport {
    pub w1: f64,
    pub family_size: usize,
    /// `max |M_μ f − M_ν f|` over the family.
    pub max_gap: f64,
    pub worst_index: Option<usize>,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CovarianceAuditReport {
    pub w1: f64,
    pub diameter: f64,
    /// `max(1, 4·diameter)`.
    pub c_x: f64,
    /// `C_X · w₁ + tolerance`.
    pub epsilon: f64,
    pub pair_count: usize,
    /// `max ‖(f_μ, g_μ) − (f_ν, g_ν)‖∞` over the pairs.
    pub max_sup_gap: f64,
    /// `max |Σ_μ(f_μ, g_μ) − Σ_ν(f_ν, g_ν)|` over the pairs.
    pub max_cov_gap: f64,
    pub sup_bound: f64,
    pub cov_bound: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Holds `w₁(μ, ν)` so several families can be audited against one LP solve.
#[derive(Debug, Clone)]
pub struct StabilityAuditor<'a> {
    space: &'a FiniteMetricSpace,
    mu: &'a ProbabilityMeasure,
    nu: &'a ProbabilityMeasure,
    w1: f64,
}

impl<'a> StabilityAuditor<'a> {
    pub fn new(space: &'a FiniteMetricSpace, mu: &'a ProbabilityMeasure, nu: &'a ProbabilityMeasure) -> Result<Self> {
        let (w1, _) = wasserstein1(space, mu, nu)?;
        Ok(Self { space, mu, nu, w1 })
    }

    pub fn w1(&self) -> f64 {
        self.w1
    }

    pub fn mean_audit(&self, family: &[&[f64]]) -> Result<MeanAuditReport> {
        certify_all(self.space, family)?;
        let mut max_gap = 0.0;
        let mut worst_index = None;
        for (i, f) in family.iter().enumerate() {
            let gap = (mean(self.mu, f)? - mean(self.nu, f)?).abs();
            if worst_index.is_none() || gap > max_gap {
                max_gap = gap;
                worst_index = Some(i);
            }
        }
        Ok(MeanAuditReport {
            w1: self.w1,
            family_size: family.len(),
            max_gap,
            worst_index,
            tolerance: AUDIT_TOL,
            pass: max_gap <= self.w1 + AUDIT_TOL,
        })
    }

    pub fn covariance_audit(&self, pairs: &[(&[f64], &[f64])]) -> Result<CovarianceAuditReport> {
        let flat: Vec<&[f64]> = pairs.iter().flat_map(|&(f, g)| [f, g]).collect();
        certify_all(self.space, &flat)?;
        let diameter = self.space.diameter();
        let c_x = 1.0_f64.max(4.0 * diameter);
        let mut max_sup_gap: f64 = 0.0;
        let mut max_cov_gap: f64 = 0.0;
        for &(f, g) in pairs {
            let (fm, fn_) = (mean(self.mu, f)?, mean(self.nu, f)?);
            let (gm, gn) = (mean(self.mu, g)?, mean(self.nu, g)?);
            let f_mu: Vec<f64> = f.iter().map(|v| v - fm).collect();
            let g_mu: Vec<f64> = g.iter().map(|v| v - gm).collect();
            let f_nu: Vec<f64> = f.iter().map(|v| v - fn_).collect();
            let g_nu: Vec<f64> = g.iter().map(|v| v - gn).collect();
            let sup = f_mu
                .iter()
                .zip(&f_nu)
                .chain(g_mu.iter().zip(&g_nu))
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            let cov = (dot_mu(self.mu, &f_mu, &g_mu) - dot_mu(self.nu, &f_nu, &g_nu)).abs();
            max_sup_gap = max_sup_gap.max(sup);
            max_cov_gap = max_cov_gap.max(cov);
        }
        let sup_bound = self.w1 + AUDIT_TOL;
        let cov_bound = 4.0 * diameter * self.w1 + AUDIT_TOL;
        Ok(CovarianceAuditReport {
            w1: self.w1,
            diameter,
            c_x,
            epsilon: c_x * self.w1 + AUDIT_TOL,
            pair_count: pairs.len(),
            max_sup_gap,
            max_cov_gap,
            sup_bound,
            cov_bound,
            tolerance: AUDIT_TOL,
            pass: max_sup_gap <= sup_bound && max_cov_gap <= cov_bound,
        })
    }
}

pub fn mean_stability_audit(
    space: &FiniteMetricSpace,
    mu: &ProbabilityMeasure,
    nu: &ProbabilityMeasure,
    observables: &[&[f64]],
) -> Result<MeanAuditReport> {
    StabilityAuditor::new(space, mu, nu)?.mean_audit(observables)
}

pub fn covariance_stability_audit(
    space: &FiniteMetricSpace,
    mu: &ProbabilityMeasure,
    nu: &ProbabilityMeasure,
    pairs: &[(&[f64], &[f64])],
) -> Result<CovarianceAuditReport> {
    StabilityAuditor::new(space, mu, nu)?.covariance_audit(pairs)
}

/// A named list of observables.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservableFamily {
    pub name: String,
    pub members: Vec<Observable>,
}

impl ObservableFamily {
    pub fn slices(&self) -> Vec<&[f64]> {
        self.members.iter().map(|o| o.values()).collect()
    }

    /// All unordered pairs, including `(f, f)`.
    pub fn pairs(&self) -> Vec<(&[f64], &[f64])> {
        let s = self.slices();
        let mut out = Vec::new();
        for i in 0..s.len() {
            for j in i..s.len() {
                out.push((s[i], s[j]));
            }
        }
        out
    }
}

/// Distance-to-point observables, one per point.
pub fn distance_family(space: &FiniteMetricSpace) -> ObservableFamily {
    ObservableFamily {
        name: "distance".into(),
        members: (0..space.len()).map(|i| Observable::distance_to(space, i)).collect(),
    }
}

/// Vertices of the μ-centered Lipschitz polytope hit by random linear objectives.
pub fn random_vertex_family(
    space: &FiniteMetricSpace,
    mu: &ProbabilityMeasure,
    count: usize,
    seed: u64,
) -> Result<ObservableFamily> {
    let polytope = LipschitzPolytope::build(space, mu, &[], ConstraintMode::Pairwise, None)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut members = Vec::with_capacity(count);
    for _ in 0..count {
        let c: Vec<f64> = (0..space.len()).map(|_| StandardNormal.sample(&mut rng)).collect();
        members.push(Observable::certify(lp_maximize(&c, &polytope)?, space)?);
    }
    Ok(ObservableFamily {
        name: "lp-vertex".into(),
        members,
    })
}

/// Principal observables, distance observables and `random` LP vertices.
pub fn default_families(
    space: &FiniteMetricSpace,
    mu: &ProbabilityMeasure,
    pos: Option<&PrincipalObservableSet>,
    random: usize,
    seed: u64,
) -> Result<Vec<ObservableFamily>> {
    let mut out = Vec::new();
    if let Some(pos) = pos {
        out.push(ObservableFamily {
            name: "principal".into(),
            members: pos.observables.clone(),
        });
    }
    out.push(distance_family(space));
    if random > 0 {
        out.push(random_vertex_family(space, mu, random, seed)?);
    }
    Ok(out)
}

/// Hausdorff distance between the graphs of `φ` on `A` and `ψ` on `B` in
/// `Z × ℝ` with the max metric. `cross[a][b] = d_Z(a, b)`.
pub fn functional_hausdorff(phi: &[f64], psi: &[f64], cross: &[Vec<f64>]) -> Result<f64> {
    if cross.len() != phi.len() {
        return Err(Error::MissingDistance {
            a: cross.len().min(phi.len()),
            b: 0,
        });
    }
    for (a, row) in cross.iter().enumerate() {
        if row.len() != psi.len() {
            return Err(Error::MissingDistance {
                a,
                b: row.len().min(psi.len()),
            });
        }
        if let Some(b) = row.iter().position(|d| !d.is_finite() || *d < 0.0) {
            return Err(Error::MissingDistance { a, b });
        }
    }
    if phi.is_empty() || psi.is_empty() {
        return Err(Error::EmptySample);
    }
    let cost = |a: usize, b: usize| cross[a][b].max((phi[a] - psi[b]).abs());
    let forward = (0..phi.len())
        .map(|a| (0..psi.len()).map(|b| cost(a, b)).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max);
    let backward = (0..psi.len())
        .map(|b| (0..phi.len()).map(|a| cost(a, b)).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max);
    Ok(forward.max(backward))
}

/// A relation between two finite index sets covering both sides.
#[derive(Debug, Clone, PartialEq)]
pub struct Correspondence {
    pairs: Vec<(usize, usize)>,
}

impl Correspondence {
    pub fn new(pairs: Vec<(usize, usize)>, left: usize, right: usize) -> Result<Self> {
        let mut seen_l = vec![false; left];
        let mut seen_r = vec![false; right];
        for &(a, b) in &pairs {
            if a >= left {
                return Err(Error::IndexOutOfRange { index: a, len: left });
            }
            if b >= right {
                return Err(Error::IndexOutOfRange { index: b, len: right });
            }
            seen_l[a] = true;
            seen_r[b] = true;
        }
        if let Some(index) = seen_l.iter().position(|s| !s) {
            return Err(Error::NotSurjective { side: "left", index });
        }
        if let Some(index) = seen_r.iter().position(|s| !s) {
            return Err(Error::NotSurjective { side: "right", index });
        }
        Ok(Self { pairs })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            pairs: (0..n).map(|i| (i, i)).collect(),
        }
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CorrespondenceDistortion {
    /// Structural distortion: `max |d(z₁, z₂) − d′(z′₁, z′₂)|`.
    pub dis: f64,
    /// Functional distortion: `max |f(z) − f′(z′)|`.
    pub fdis: f64,
    /// `½ · max(dis, 2·fdis)`.
    pub score: f64,
}

pub fn correspondence_distortion(
    r: &Correspondence,
    d: &[Vec<f64>],
    d_prime: &[Vec<f64>],
    f: &[f64],
    f_prime: &[f64],
) -> Result<CorrespondenceDistortion> {
    let lookup = |table: &[Vec<f64>], a: usize, b: usize| -> Result<f64> {
        table
            .get(a)
            .and_then(|row| row.get(b))
            .copied()
            .ok_or(Error::MissingDistance { a, b })
    };
    let mut dis: f64 = 0.0;
    for &(z1, w1) in &r.pairs {
        for &(z2, w2) in &r.pairs {
            dis = dis.max((lookup(d, z1, z2)? - lookup(d_prime, w1, w2)?).abs());
        }
    }
    let mut fdis: f64 = 0.0;
    for &(z, w) in &r.pairs {
        let a = *f.get(z).ok_or(Error::IndexOutOfRange { index: z, len: f.len() })?;
        let b = *f_prime.get(w).ok_or(Error::IndexOutOfRange {
            index: w,
            len: f_prime.len(),
        })?;
        fdis = fdis.max((a - b).abs());
    }
    Ok(CorrespondenceDistortion {
        dis,
        fdis,
        score: 0.5 * dis.max(2.0 * fdis),
    })
}

/// Normalized counting measure of `m` i.i.d. draws from μ.
pub fn empirical_sample(mu: &ProbabilityMeasure, m: usize, seed: u64) -> Result<ProbabilityMeasure> {
    if m == 0 {
        return Err(Error::InvalidConfig("sample size must be at least 1".into()));
    }
    let dist = WeightedIndex::new(mu.weights()).map_err(|_| Error::AllZeroMass)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = vec![0usize; mu.len()];
    for _ in 0..m {
        counts[dist.sample(&mut rng)] += 1;
    }
    ProbabilityMeasure::new(counts.iter().map(|&c| c as f64 / m as f64).collect())
}

/// `max |M_μ f − M_ν f|` over `family`; a plain evaluation without certification.
pub fn max_mean_gap(mu: &ProbabilityMeasure, nu: &ProbabilityMeasure, family: &[&[f64]]) -> Result<f64> {
    let mut gap: f64 = 0.0;
    for f in family {
        gap = gap.max((mean(mu, f)? - mean(nu, f)?).abs());
    }
    Ok(gap)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn two_point() -> FiniteMetricSpace {
        FiniteMetricSpace::new(vec![vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap()
    }

    #[test]
    fn w1_examples() {
        let space = two_point();
        let (w, plan) = wasserstein1(
            &space,
            &ProbabilityMeasure::dirac(2, 0),
            &ProbabilityMeasure::dirac(2, 1),
        )
        .unwrap();
        assert_eq!(w, 1.0);
        assert_eq!(plan.plan, vec![vec![0.0, 1.0], vec![0.0, 0.0]]);

        let mu = ProbabilityMeasure::new(vec![0.75, 0.25]).unwrap();
        let nu = ProbabilityMeasure::new(vec![0.25, 0.75]).unwrap();
        let (w, plan) = wasserstein1(&space, &mu, &nu).unwrap();
        assert_abs_diff_eq!(w, 0.5, epsilon = 1e-12);
        for (a, b) in plan.row_sums().iter().zip(mu.weights()) {
            assert_abs_diff_eq!(*a, *b, epsilon = 1e-12);
        }
        for (a, b) in plan.col_sums().iter().zip(nu.weights()) {
            assert_abs_diff_eq!(*a, *b, epsilon = 1e-12);
        }
        let (w, _) = wasserstein1(&space, &mu, &mu).unwrap();
        assert_abs_diff_eq!(w, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn tight_two_point_audits() {
        let space = two_point();
        let mu = ProbabilityMeasure::dirac(2, 0);
        let nu = ProbabilityMeasure::uniform(2);
        let f = [0.5, -0.5];
        let r = mean_stability_audit(&space, &mu, &nu, &[&f]).unwrap();
        assert_abs_diff_eq!(r.w1, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(r.max_gap, 0.5, epsilon = 1e-12);
        assert!(r.pass);

        let c = covariance_stability_audit(&space, &mu, &nu, &[(&f, &f)]).unwrap();
        assert_eq!(c.c_x, 4.0);
        assert_abs_diff_eq!(c.max_sup_gap, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(c.max_cov_gap, 0.25, epsilon = 1e-12);
        assert_abs_diff_eq!(c.cov_bound, 2.0, epsilon = 1e-7);
        assert!(c.pass);

        assert!(matches!(
            mean_stability_audit(&space, &mu, &nu, &[&[0.0, 2.0]]),
            Err(Error::UncertifiedObservable { index: 0, .. })
        ));
    }

    #[test]
    fn hausdorff_examples() {
        let cross = vec![vec![0.0, 1.0], vec![1.0, 0.0]];
        assert_eq!(functional_hausdorff(&[1.0, 2.0], &[1.0, 2.0], &cross).unwrap(), 0.0);
        assert_eq!(functional_hausdorff(&[0.0], &[3.0], &[vec![0.0]]).unwrap(), 3.0);
        assert_eq!(functional_hausdorff(&[0.0], &[0.5], &[vec![1.0]]).unwrap(), 1.0);
        assert!(matches!(
            functional_hausdorff(&[0.0], &[0.5, 1.0], &[vec![1.0]]),
            Err(Error::MissingDistance { .. })
        ));
    }

    #[test]
    fn correspondence_examples() {
        let d = vec![vec![0.0, 1.0], vec![1.0, 0.0]];
        let r = Correspondence::identity(2);
        let out = correspondence_distortion(&r, &d, &d, &[1.0, 2.0], &[1.0, 2.0]).unwrap();
        assert_eq!((out.dis, out.fdis), (0.0, 0.0));

        let d2 = vec![vec![0.0, 2.0], vec![2.0, 0.0]];
        let out = correspondence_distortion(&r, &d, &d2, &[0.0, 0.0], &[0.0, 0.0]).unwrap();
        assert_eq!((out.dis, out.fdis), (1.0, 0.0));

        let p = vec![vec![0.0, 1.0, 2.0], vec![1.0, 0.0, 1.0], vec![2.0, 1.0, 0.0]];
        let out = correspondence_distortion(
            &Correspondence::identity(3),
            &p,
            &p,
            &[1.0, 0.0, -1.0],
            &[0.5, 0.0, -0.5],
        )
        .unwrap();
        assert_eq!((out.dis, out.fdis, out.score), (0.0, 0.5, 0.5));

        assert!(matches!(
            Correspondence::new(vec![(0, 0)], 2, 1),
            Err(Error::NotSurjective { side: "left", index: 1 })
        ));
    }

    #[test]
    fn empirical_measures() {
        let delta = ProbabilityMeasure::dirac(3, 1);
        assert_eq!(empirical_sample(&delta, 17, 4).unwrap(), delta);
        let mu = ProbabilityMeasure::new(vec![0.75, 0.25]).unwrap();
        assert_eq!(
            empirical_sample(&mu, 100, 9).unwrap(),
            empirical_sample(&mu, 100, 9).unwrap()
        );
        let big = empirical_sample(&mu, 10_000, 1).unwrap();
        assert!((big.weights()[0] - 0.75).abs() <= 3.0 / 100.0);
        assert!(empirical_sample(&mu, 0, 1).is_err());
    }
}

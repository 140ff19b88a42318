use nalgebra::{DMatrix, DVector};

use super::polytope::{ConstraintMode, LipschitzPolytope};
use super::solver::sign_normalize;
use crate::error::{Error, Result};
use crate::mmspace::{FiniteMetricSpace, ProbabilityMeasure};
use crate::observables::{variance, Observable};

pub const BRUTE_FORCE_MAX_POINTS: usize = 6;
const FEAS_TOL: f64 = 1e-9;

/// Maximal-variance point of the centered, prior-orthogonal Lipschitz
/// polytope, by enumerating every vertex.
///
/// Each candidate vertex fixes `n − rank(equalities)` pair constraints as
/// tight (with either sign), solves the square system and keeps feasible
/// solutions. The variance is convex, so its maximum sits on a vertex.
pub fn brute_force_po(
    space: &FiniteMetricSpace,
    mu: &ProbabilityMeasure,
    priors: &[&[f64]],
) -> Result<(Observable, f64)> {
    let n = space.len();
    if n > BRUTE_FORCE_MAX_POINTS {
        return Err(Error::TooLarge {
            n,
            max: BRUTE_FORCE_MAX_POINTS,
        });
    }
    let polytope = LipschitzPolytope::build(space, mu, priors, ConstraintMode::Pairwise, None)?;
    let equalities = independent_rows(polytope.equalities());
    let pairs = polytope.pairs();
    let free = n - equalities.len();

    let mut best: Option<(Vec<f64>, f64)> = None;
    for chosen in combinations(pairs.len(), free) {
        for signs in 0..(1u32 << free) {
            let mut a = DMatrix::<f64>::zeros(n, n);
            let mut b = DVector::<f64>::zeros(n);
            for (r, row) in equalities.iter().enumerate() {
                for c in 0..n {
                    a[(r, c)] = row[c];
                }
            }
            for (slot, &p) in chosen.iter().enumerate() {
                let (i, j, d) = pairs[p];
                let s = if signs >> slot & 1 == 1 { -1.0 } else { 1.0 };
                let r = equalities.len() + slot;
                a[(r, i)] = s;
                a[(r, j)] = -s;
                b[r] = d;
            }
            let Some(x) = a.clone().lu().solve(&b) else {
                continue;
            };
            if x.iter().any(|v| !v.is_finite()) || (&a * &x - &b).amax() > FEAS_TOL {
                continue;
            }
            let f: Vec<f64> = x.iter().copied().collect();
            let (ineq, eq) = polytope.max_violation(&f);
            if ineq > FEAS_TOL || eq > FEAS_TOL {
                continue;
            }
            let v = variance(mu, &f)?;
            if best.as_ref().is_none_or(|(_, bv)| v > *bv) {
                best = Some((f, v));
            }
        }
    }
    let (mut f, v) = best.unwrap_or_else(|| (vec![0.0; n], 0.0));
    sign_normalize(&mut f);
    Ok((Observable::trusted(f), v))
}

/// A maximal linearly independent subset of `rows` (Gram-Schmidt).
fn independent_rows(rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut kept = Vec::new();
    for row in rows {
        let mut r = row.clone();
        for q in &basis {
            let dot: f64 = r.iter().zip(q).map(|(a, b)| a * b).sum();
            r.iter_mut().zip(q).for_each(|(a, b)| *a -= dot * b);
        }
        let norm = r.iter().map(|v| v * v).sum::<f64>().sqrt();
        let scale = row.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 1e-10 * scale.max(1e-300) {
            r.iter_mut().for_each(|v| *v /= norm);
            basis.push(r);
            kept.push(row.clone());
        }
    }
    kept
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if current.len() == k {
            out.push(current.clone());
            return;
        }
        for i in start..n {
            if n - i < k - current.len() {
                break;
            }
            current.push(i);
            rec(i + 1, n, k, current, out);
            current.pop();
        }
    }
    rec(0, n, k, &mut current, &mut out);
    out
}

//! Two-phase revised simplex for `min cᵀx  s.t.  Ax = b, x ≥ 0`.
//!
//! Columns are sparse; the basis inverse is kept dense and refactorized
//! periodically. Pricing is Dantzig's rule, falling back to Bland's rule
//! after a run of degenerate pivots so the method always terminates.
//! The returned duals `y` satisfy `Aᵀy ≤ c` within [`OPT_TOL`] and are
//! recomputed from a fresh factorization of the final basis.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Reduced-cost tolerance for optimality.
pub const OPT_TOL: f64 = 1e-11;
const PIVOT_TOL: f64 = 1e-9;
const RATIO_TIE: f64 = 1e-12;
const DEGENERATE_STEP: f64 = 1e-12;
const DEGENERATE_RUN: usize = 32;
const REFACTOR_EVERY: usize = 64;

pub type SparseColumn = Vec<(usize, f64)>;

/// A linear program in equality standard form.
#[derive(Debug, Clone, Default)]
pub struct StandardLp {
    pub rows: usize,
    pub columns: Vec<SparseColumn>,
    pub costs: Vec<f64>,
    pub rhs: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub duals: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
}

impl StandardLp {
    pub fn new(rows: usize, rhs: Vec<f64>) -> Self {
        Self {
            rows,
            columns: Vec::new(),
            costs: Vec::new(),
            rhs,
        }
    }

    pub fn push_column(&mut self, column: SparseColumn, cost: f64) -> usize {
        self.columns.push(column);
        self.costs.push(cost);
        self.columns.len() - 1
    }

    pub fn solve(&self) -> Result<LpSolution> {
        assert_eq!(self.rhs.len(), self.rows, "rhs length must equal row count");
        assert_eq!(self.columns.len(), self.costs.len());
        Tableau::new(self).run()
    }

    /// Solves with every right-hand side pushed away from zero by a
    /// deterministic amount of order `rel · (1 + max|b|)`.
    ///
    /// This breaks primal degeneracy. The duals stay feasible for the
    /// original problem (they do not depend on `b`) and are optimal for the
    /// perturbed one, so `bᵀy` is within `2 · rel · (1 + max|b|) · Σ|y|` of
    /// the true optimum. The primal `x` refers to the perturbed problem.
    pub fn solve_perturbed(&self, rel: f64) -> Result<LpSolution> {
        let scale = 1.0 + self.rhs.iter().fold(0.0_f64, |m, b| m.max(b.abs()));
        let mut lp = self.clone();
        for (i, b) in lp.rhs.iter_mut().enumerate() {
            // Weyl sequence in [0.5, 1).
            let theta = 0.5 + 0.5 * ((i as f64 + 1.0) * 0.618_033_988_749_894_9).fract();
            let dir = if *b < 0.0 { -1.0 } else { 1.0 };
            *b += dir * rel * scale * theta;
        }
        lp.solve()
    }
}

struct Tableau<'a> {
    lp: &'a StandardLp,
    m: usize,
    n_struct: usize,
    row_sign: Vec<f64>,
    rhs: Vec<f64>,
    basis: Vec<usize>,
    in_basis: Vec<bool>,
    binv: Vec<f64>,
    x_b: Vec<f64>,
    iterations: usize,
    since_refactor: usize,
    max_iterations: usize,
}

impl<'a> Tableau<'a> {
    fn new(lp: &'a StandardLp) -> Self {
        let m = lp.rows;
        let n_struct = lp.columns.len();
        let row_sign: Vec<f64> = lp.rhs.iter().map(|&b| if b < 0.0 { -1.0 } else { 1.0 }).collect();
        let rhs: Vec<f64> = lp.rhs.iter().zip(&row_sign).map(|(b, s)| b * s).collect();
        let mut binv = vec![0.0; m * m];
        for i in 0..m {
            binv[i * m + i] = 1.0;
        }
        let mut in_basis = vec![false; n_struct + m];
        in_basis[n_struct..].iter_mut().for_each(|b| *b = true);
        Self {
            lp,
            m,
            n_struct,
            row_sign,
            x_b: rhs.clone(),
            rhs,
            basis: (n_struct..n_struct + m).collect(),
            in_basis,
            binv,
            iterations: 0,
            since_refactor: 0,
            max_iterations: 50 * (n_struct + m) + 10_000,
        }
    }

    fn is_artificial(&self, j: usize) -> bool {
        j >= self.n_struct
    }

    /// Column `j` of the sign-adjusted constraint matrix, scattered densely.
    fn column(&self, j: usize, out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        if self.is_artificial(j) {
            out[j - self.n_struct] = 1.0;
        } else {
            for &(r, v) in &self.lp.columns[j] {
                out[r] += v * self.row_sign[r];
            }
        }
    }

    fn dot_column(&self, y: &[f64], j: usize) -> f64 {
        if self.is_artificial(j) {
            y[j - self.n_struct]
        } else {
            self.lp.columns[j]
                .iter()
                .map(|&(r, v)| y[r] * v * self.row_sign[r])
                .sum()
        }
    }

    fn duals(&self, cost: &dyn Fn(usize) -> f64) -> Vec<f64> {
        let m = self.m;
        let mut y = vec![0.0; m];
        for (p, &j) in self.basis.iter().enumerate() {
            let c = cost(j);
            if c != 0.0 {
                let row = &self.binv[p * m..(p + 1) * m];
                y.iter_mut().zip(row).for_each(|(yi, b)| *yi += c * b);
            }
        }
        y
    }

    fn refactor(&mut self) -> Result<()> {
        let m = self.m;
        let mut b = DMatrix::<f64>::zeros(m, m);
        let mut col = vec![0.0; m];
        for (p, &j) in self.basis.iter().enumerate() {
            self.column(j, &mut col);
            for r in 0..m {
                b[(r, p)] = col[r];
            }
        }
        let inv = b.try_inverse().ok_or(Error::SingularBasis)?;
        for p in 0..m {
            for r in 0..m {
                self.binv[p * m + r] = inv[(p, r)];
            }
        }
        for p in 0..m {
            let row = &self.binv[p * m..(p + 1) * m];
            self.x_b[p] = row.iter().zip(&self.rhs).map(|(a, b)| a * b).sum();
        }
        self.since_refactor = 0;
        Ok(())
    }

    fn pivot(&mut self, p_out: usize, entering: usize, w: &[f64]) {
        let m = self.m;
        let pivot = w[p_out];
        let theta = self.x_b[p_out] / pivot;
        for p in 0..m {
            if p != p_out {
                self.x_b[p] -= theta * w[p];
            }
        }
        self.x_b[p_out] = theta;

        let (head, rest) = self.binv.split_at_mut(p_out * m);
        let (pivot_row, tail) = rest.split_at_mut(m);
        pivot_row.iter_mut().for_each(|v| *v /= pivot);
        for (p, row) in head.chunks_exact_mut(m).enumerate() {
            let f = w[p];
            if f != 0.0 {
                row.iter_mut().zip(pivot_row.iter()).for_each(|(a, b)| *a -= f * b);
            }
        }
        for (off, row) in tail.chunks_exact_mut(m).enumerate() {
            let f = w[p_out + 1 + off];
            if f != 0.0 {
                row.iter_mut().zip(pivot_row.iter()).for_each(|(a, b)| *a -= f * b);
            }
        }

        self.in_basis[self.basis[p_out]] = false;
        self.in_basis[entering] = true;
        self.basis[p_out] = entering;
        self.iterations += 1;
        self.since_refactor += 1;
    }

    /// `B⁻¹ a_j`.
    fn ftran(&self, j: usize) -> Vec<f64> {
        let m = self.m;
        let mut w = vec![0.0; m];
        let mut col = vec![0.0; m];
        self.column(j, &mut col);
        for (p, wp) in w.iter_mut().enumerate() {
            let row = &self.binv[p * m..(p + 1) * m];
            *wp = row.iter().zip(&col).map(|(a, b)| a * b).sum();
        }
        w
    }

    /// Runs simplex iterations for the given cost until optimal.
    fn optimize(&mut self, cost: &dyn Fn(usize) -> f64, allow_artificial: bool) -> Result<()> {
        let total = self.n_struct + self.m;
        let mut degenerate_run = 0;
        let mut bland = false;
        loop {
            if self.iterations >= self.max_iterations {
                return Err(Error::IterationLimit(self.max_iterations));
            }
            if self.since_refactor >= REFACTOR_EVERY {
                self.refactor()?;
            }
            let y = self.duals(cost);
            let mut entering = None;
            let mut best = -OPT_TOL;
            for j in 0..total {
                if self.in_basis[j] || (!allow_artificial && self.is_artificial(j)) {
                    continue;
                }
                let d = cost(j) - self.dot_column(&y, j);
                if d < best {
                    entering = Some(j);
                    if bland {
                        break;
                    }
                    best = d;
                }
            }
            let Some(q) = entering else {
                if self.since_refactor > 0 {
                    // Confirm optimality against a fresh factorization.
                    self.refactor()?;
                    continue;
                }
                return Ok(());
            };

            let w = self.ftran(q);
            let mut min_ratio = f64::INFINITY;
            for p in 0..self.m {
                let blocks_artificial = !allow_artificial && self.is_artificial(self.basis[p]);
                if w[p] > PIVOT_TOL {
                    min_ratio = min_ratio.min(self.x_b[p].max(0.0) / w[p]);
                } else if blocks_artificial && w[p].abs() > PIVOT_TOL {
                    min_ratio = 0.0;
                }
            }
            if !min_ratio.is_finite() {
                return Err(Error::Unbounded);
            }
            let mut leave: Option<usize> = None;
            for p in 0..self.m {
                let blocks_artificial = !allow_artificial && self.is_artificial(self.basis[p]);
                let ratio = if w[p] > PIVOT_TOL {
                    self.x_b[p].max(0.0) / w[p]
                } else if blocks_artificial && w[p].abs() > PIVOT_TOL {
                    0.0
                } else {
                    continue;
                };
                if ratio > min_ratio + RATIO_TIE {
                    continue;
                }
                leave = match leave {
                    None => Some(p),
                    Some(cur) if bland => {
                        if self.basis[p] < self.basis[cur] {
                            Some(p)
                        } else {
                            Some(cur)
                        }
                    }
                    Some(cur) => {
                        if w[p].abs() > w[cur].abs() {
                            Some(p)
                        } else {
                            Some(cur)
                        }
                    }
                };
            }
            let p_out = leave.expect("ratio test found a finite minimum");
            if min_ratio <= DEGENERATE_STEP {
                degenerate_run += 1;
                if degenerate_run > DEGENERATE_RUN {
                    bland = true;
                }
            } else {
                degenerate_run = 0;
                bland = false;
            }
            self.pivot(p_out, q, &w);
            self.x_b.iter_mut().for_each(|v| {
                if *v < 0.0 && *v > -1e-13 {
                    *v = 0.0
                }
            });
        }
    }

    /// Pivots artificials that sit in the basis at level zero out of it.
    fn drive_out_artificials(&mut self) -> Result<()> {
        let m = self.m;
        for p in 0..m {
            if !self.is_artificial(self.basis[p]) {
                continue;
            }
            let row = self.binv[p * m..(p + 1) * m].to_vec();
            let mut best: Option<(usize, f64)> = None;
            for j in 0..self.n_struct {
                if self.in_basis[j] {
                    continue;
                }
                let alpha = self.dot_column(&row, j).abs();
                if alpha > PIVOT_TOL && best.is_none_or(|(_, a)| alpha > a) {
                    best = Some((j, alpha));
                }
            }
            if let Some((j, _)) = best {
                let w = self.ftran(j);
                self.pivot(p, j, &w);
            }
            // Otherwise the row is redundant and the artificial stays at zero.
        }
        self.refactor()
    }

    fn run(mut self) -> Result<LpSolution> {
        let n_struct = self.n_struct;
        let scale = 1.0 + self.rhs.iter().map(|v| v.abs()).sum::<f64>();

        let phase_one = move |j: usize| if j >= n_struct { 1.0 } else { 0.0 };
        self.optimize(&phase_one, true)?;
        let residual: f64 = self
            .basis
            .iter()
            .zip(&self.x_b)
            .filter(|(&j, _)| j >= n_struct)
            .map(|(_, &v)| v)
            .sum();
        if residual > 1e-9 * scale {
            return Err(Error::Infeasible(residual));
        }
        for (p, &j) in self.basis.iter().enumerate() {
            if j >= n_struct {
                self.x_b[p] = 0.0;
            }
        }
        self.drive_out_artificials()?;

        let costs = &self.lp.costs;
        let phase_two = |j: usize| if j >= n_struct { 0.0 } else { costs[j] };
        self.optimize(&phase_two, false)?;
        self.refactor()?;

        let mut x = vec![0.0; n_struct];
        for (p, &j) in self.basis.iter().enumerate() {
            if j < n_struct {
                x[j] = self.x_b[p].max(0.0);
            }
        }
        let y = self.duals(&phase_two);
        let duals = y.iter().zip(&self.row_sign).map(|(v, s)| v * s).collect();
        let objective = x.iter().zip(costs).map(|(a, c)| a * c).sum();
        Ok(LpSolution {
            x,
            duals,
            objective,
            iterations: self.iterations,
        })
    }
}

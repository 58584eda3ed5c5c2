//! Dense two-phase primal simplex with Bland's rule.
//!
//! Solves `maximize c.x` subject to linear rows and `x >= 0`. Bland's rule
//! (lowest-index entering column, lowest-index leaving variable on ratio
//! ties) keeps the highly degenerate leakage polytope from cycling. The
//! returned point is always a basic feasible solution, i.e. a vertex.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    LessEq,
    Equal,
    GreaterEq,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearConstraint {
    pub coeffs: Vec<f64>,
    pub relation: Relation,
    pub rhs: f64,
}

/// `maximize objective . x` s.t. `constraints`, `x >= 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub constraints: Vec<LinearConstraint>,
}

impl LinearProgram {
    pub fn num_variables(&self) -> usize {
        self.objective.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimplexOptions {
    pub pivot_tol: f64,
    /// Defaults to `50 * (variables + constraints)` when `None`.
    pub max_iterations: Option<usize>,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self { pivot_tol: 1e-9, max_iterations: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimplexSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
}

struct Tableau {
    rows: usize,
    cols: usize,
    /// `(rows + 1) x (cols + 1)`; last row is the objective, last column the rhs.
    data: Vec<f64>,
    basis: Vec<usize>,
    /// Columns allowed to enter the basis.
    eligible: Vec<bool>,
    tol: f64,
    iterations: usize,
    max_iterations: usize,
}

impl Tableau {
    fn at(&self, r: usize, c: usize) -> f64 {
        self.data[r * (self.cols + 1) + c]
    }

    fn rhs(&self, r: usize) -> f64 {
        self.at(r, self.cols)
    }

    fn row_mut(&mut self, r: usize) -> &mut [f64] {
        let w = self.cols + 1;
        &mut self.data[r * w..(r + 1) * w]
    }

    fn pivot(&mut self, pr: usize, pc: usize) {
        let w = self.cols + 1;
        let inv = 1.0 / self.at(pr, pc);
        self.row_mut(pr).iter_mut().for_each(|v| *v *= inv);
        let pivot_row: Vec<f64> = self.data[pr * w..(pr + 1) * w].to_vec();
        for r in 0..=self.rows {
            if r == pr {
                continue;
            }
            let factor = self.at(r, pc);
            if factor != 0.0 {
                for (v, p) in self.row_mut(r).iter_mut().zip(&pivot_row) {
                    *v -= factor * p;
                }
                self.data[r * w + pc] = 0.0;
            }
        }
        self.basis[pr] = pc;
    }

    /// Loads `-c` into the objective row and prices out the basis.
    fn set_objective(&mut self, cost: &[f64]) {
        let obj = self.rows;
        let w = self.cols + 1;
        self.data[obj * w..].iter_mut().for_each(|v| *v = 0.0);
        for (j, &c) in cost.iter().enumerate() {
            self.data[obj * w + j] = -c;
        }
        for r in 0..self.rows {
            let cb = cost.get(self.basis[r]).copied().unwrap_or(0.0);
            if cb != 0.0 {
                for c in 0..w {
                    self.data[obj * w + c] += cb * self.data[r * w + c];
                }
            }
        }
    }

    fn run(&mut self) -> Result<()> {
        loop {
            let obj = self.rows;
            let entering = (0..self.cols).find(|&j| self.eligible[j] && self.at(obj, j) < -self.tol);
            let Some(pc) = entering else { return Ok(()) };
            let mut leave: Option<(usize, f64)> = None;
            for r in 0..self.rows {
                let a = self.at(r, pc);
                if a > self.tol {
                    let ratio = self.rhs(r) / a;
                    leave = match leave {
                        None => Some((r, ratio)),
                        Some((br, bratio)) => {
                            if ratio < bratio - self.tol
                                || (ratio <= bratio + self.tol && self.basis[r] < self.basis[br])
                            {
                                Some((r, ratio))
                            } else {
                                Some((br, bratio))
                            }
                        }
                    };
                }
            }
            let Some((pr, _)) = leave else { return Err(Error::Unbounded) };
            if self.iterations >= self.max_iterations {
                return Err(Error::IterationLimitExceeded(self.max_iterations));
            }
            self.pivot(pr, pc);
            self.iterations += 1;
        }
    }

    fn remove_row(&mut self, r: usize) {
        let w = self.cols + 1;
        self.data.drain(r * w..(r + 1) * w);
        self.basis.remove(r);
        self.rows -= 1;
    }
}

/// Maximizes `lp` and returns an optimal vertex.
pub fn maximize(lp: &LinearProgram, opts: SimplexOptions) -> Result<SimplexSolution> {
    let n = lp.num_variables();
    let rows = lp.constraints.len();
    for c in &lp.constraints {
        if c.coeffs.len() != n {
            return Err(Error::DimensionMismatch { expected: n, actual: c.coeffs.len() });
        }
    }
    let max_iterations = opts.max_iterations.unwrap_or(50 * (n + rows));

    // Normalize to non-negative right-hand sides.
    let normalized: Vec<(Vec<f64>, Relation, f64)> = lp
        .constraints
        .iter()
        .map(|c| {
            if c.rhs < 0.0 {
                let flipped = match c.relation {
                    Relation::LessEq => Relation::GreaterEq,
                    Relation::GreaterEq => Relation::LessEq,
                    Relation::Equal => Relation::Equal,
                };
                (c.coeffs.iter().map(|v| -v).collect(), flipped, -c.rhs)
            } else {
                (c.coeffs.clone(), c.relation, c.rhs)
            }
        })
        .collect();

    let slacks = normalized.iter().filter(|c| c.1 != Relation::Equal).count();
    let artificials = normalized.iter().filter(|c| c.1 != Relation::LessEq).count();
    let cols = n + slacks + artificials;
    let mut t = Tableau {
        rows,
        cols,
        data: vec![0.0; (rows + 1) * (cols + 1)],
        basis: vec![0; rows],
        eligible: vec![true; cols],
        tol: opts.pivot_tol,
        iterations: 0,
        max_iterations,
    };
    let (mut next_slack, mut next_art) = (n, n + slacks);
    for (r, (coeffs, rel, rhs)) in normalized.iter().enumerate() {
        let w = cols + 1;
        t.data[r * w..r * w + n].copy_from_slice(coeffs);
        t.data[r * w + cols] = *rhs;
        match rel {
            Relation::LessEq => {
                t.data[r * w + next_slack] = 1.0;
                t.basis[r] = next_slack;
                next_slack += 1;
            }
            Relation::GreaterEq => {
                t.data[r * w + next_slack] = -1.0;
                next_slack += 1;
                t.data[r * w + next_art] = 1.0;
                t.basis[r] = next_art;
                next_art += 1;
            }
            Relation::Equal => {
                t.data[r * w + next_art] = 1.0;
                t.basis[r] = next_art;
                next_art += 1;
            }
        }
    }

    let is_art = |j: usize| j >= n + slacks;
    if artificials > 0 {
        let mut cost = vec![0.0; cols];
        cost[n + slacks..].iter_mut().for_each(|c| *c = -1.0);
        t.set_objective(&cost);
        t.run()?;
        if t.rhs(t.rows) < -opts.pivot_tol.max(1e-9) {
            return Err(Error::Infeasible);
        }
        // Drive zero-level artificials out of the basis; drop redundant rows.
        let mut r = 0;
        while r < t.rows {
            if is_art(t.basis[r]) {
                let col = (0..n + slacks).find(|&j| t.at(r, j).abs() > opts.pivot_tol);
                match col {
                    Some(j) => {
                        t.pivot(r, j);
                        r += 1;
                    }
                    None => t.remove_row(r),
                }
            } else {
                r += 1;
            }
        }
        for j in n + slacks..cols {
            t.eligible[j] = false;
        }
    }

    let mut cost = vec![0.0; cols];
    cost[..n].copy_from_slice(&lp.objective);
    t.set_objective(&cost);
    t.run()?;

    let mut x = vec![0.0; n];
    for r in 0..t.rows {
        let b = t.basis[r];
        if b < n {
            x[b] = t.rhs(r).max(0.0);
        }
    }
    let objective = x.iter().zip(&lp.objective).map(|(a, c)| a * c).sum();
    Ok(SimplexSolution { x, objective, iterations: t.iterations })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(coeffs: &[f64], relation: Relation, rhs: f64) -> LinearConstraint {
        LinearConstraint { coeffs: coeffs.to_vec(), relation, rhs }
    }

    #[test]
    fn textbook_maximum() {
        // max 3x + 5y s.t. x <= 4, 2y <= 12, 3x + 2y <= 18 -> (2, 6), 36
        let lp = LinearProgram {
            objective: vec![3.0, 5.0],
            constraints: vec![
                row(&[1.0, 0.0], Relation::LessEq, 4.0),
                row(&[0.0, 2.0], Relation::LessEq, 12.0),
                row(&[3.0, 2.0], Relation::LessEq, 18.0),
            ],
        };
        let s = maximize(&lp, SimplexOptions::default()).unwrap();
        assert!((s.objective - 36.0).abs() < 1e-12);
        assert!((s.x[0] - 2.0).abs() < 1e-12 && (s.x[1] - 6.0).abs() < 1e-12);
    }

    #[test]
    fn equality_and_ge_rows_need_phase_one() {
        // max -x - y s.t. x + y = 2, x >= 0.5 -> objective -2
        let lp = LinearProgram {
            objective: vec![-1.0, -2.0],
            constraints: vec![
                row(&[1.0, 1.0], Relation::Equal, 2.0),
                row(&[1.0, 0.0], Relation::GreaterEq, 0.5),
            ],
        };
        let s = maximize(&lp, SimplexOptions::default()).unwrap();
        assert!((s.x[0] - 2.0).abs() < 1e-12);
        assert!((s.objective + 2.0).abs() < 1e-12);
    }

    #[test]
    fn redundant_equalities_are_dropped() {
        let lp = LinearProgram {
            objective: vec![1.0, 1.0],
            constraints: vec![
                row(&[1.0, 1.0], Relation::Equal, 1.0),
                row(&[2.0, 2.0], Relation::Equal, 2.0),
            ],
        };
        let s = maximize(&lp, SimplexOptions::default()).unwrap();
        assert!((s.objective - 1.0).abs() < 1e-12);
    }

    #[test]
    fn negative_rhs_is_flipped() {
        // -x <= -1  <=>  x >= 1; max -x -> x = 1
        let lp = LinearProgram {
            objective: vec![-1.0],
            constraints: vec![row(&[-1.0], Relation::LessEq, -1.0)],
        };
        let s = maximize(&lp, SimplexOptions::default()).unwrap();
        assert!((s.x[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn infeasible_and_unbounded() {
        let lp = LinearProgram {
            objective: vec![1.0],
            constraints: vec![
                row(&[1.0], Relation::LessEq, 1.0),
                row(&[1.0], Relation::GreaterEq, 2.0),
            ],
        };
        assert_eq!(maximize(&lp, SimplexOptions::default()), Err(Error::Infeasible));
        let lp = LinearProgram { objective: vec![1.0], constraints: vec![row(&[-1.0], Relation::LessEq, 1.0)] };
        assert_eq!(maximize(&lp, SimplexOptions::default()), Err(Error::Unbounded));
    }

    #[test]
    fn iteration_cap() {
        let lp = LinearProgram {
            objective: vec![3.0, 5.0],
            constraints: vec![
                row(&[1.0, 0.0], Relation::LessEq, 4.0),
                row(&[0.0, 2.0], Relation::LessEq, 12.0),
                row(&[3.0, 2.0], Relation::LessEq, 18.0),
            ],
        };
        let opts = SimplexOptions { max_iterations: Some(1), ..Default::default() };
        assert_eq!(maximize(&lp, opts), Err(Error::IterationLimitExceeded(1)));
    }
}

//! High-utility regime (`l >= log2(M - 1)`).
//!
//! Around the identity the utility is linear to first order,
//! `D(p1 W || p2 W) ~ Tr(Psi W^T)`, where `Psi` holds the partial derivatives
//! of the divergence at `W = I`. Maximizing that trace over the leakage
//! polytope is a linear program in the `M^2` mechanism entries and `M` slack
//! variables `eps_j >= max_i W_ij`.

pub mod simplex;

use std::f64::consts::LOG2_E;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{Distribution, LeakageBudget, Mechanism, Method, PutSolution, Provenance};
use simplex::{LinearConstraint, LinearProgram, Relation, SimplexOptions};

/// Partial derivatives of `D(p1 W || p2 W)` with respect to `W_ij` at `W = I`,
/// in bits per unit probability. Each row peaks on the diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct PsiMatrix {
    size: usize,
    entries: Vec<f64>,
}

impl PsiMatrix {
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.size + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.size..(i + 1) * self.size]
    }

    /// Row-major entries.
    pub fn as_slice(&self) -> &[f64] {
        &self.entries
    }

    /// `Psi_ii - max_{j != i} Psi_ij`, the loss per unit of row `i` moved off
    /// the diagonal.
    pub fn diagonal_gap(&self, i: usize) -> f64 {
        let best_off = (0..self.size)
            .filter(|&j| j != i)
            .map(|j| self.get(i, j))
            .fold(f64::NEG_INFINITY, f64::max);
        self.get(i, i) - best_off
    }

    /// Off-diagonal column with the largest entry in row `i`; ties go to the
    /// lowest index.
    pub fn second_best_column(&self, i: usize) -> usize {
        let mut best = None;
        for j in (0..self.size).filter(|&j| j != i) {
            match best {
                Some((_, v)) if self.get(i, j) <= v => {}
                _ => best = Some((j, self.get(i, j))),
            }
        }
        best.map(|(j, _)| j).expect("size >= 2")
    }
}

/// `Psi_ij = p1_i (log2(p1_j / p2_j) + log2 e) - p2_i (p1_j / p2_j) log2 e`.
pub fn psi_matrix(p1: &Distribution, p2: &Distribution) -> Result<PsiMatrix> {
    let m = p1.len();
    if p2.len() != m {
        return Err(Error::DimensionMismatch { expected: m, actual: p2.len() });
    }
    for p in [p1, p2] {
        if let Some((index, &value)) = p.probs().iter().enumerate().find(|(_, &v)| v <= 0.0) {
            return Err(Error::NonPositiveSupport { index, value });
        }
    }
    let (a, b) = (p1.probs(), p2.probs());
    let mut entries = Vec::with_capacity(m * m);
    for i in 0..m {
        for j in 0..m {
            let ratio = a[j] / b[j];
            entries.push(a[i] * (ratio.log2() + LOG2_E) - b[i] * ratio * LOG2_E);
        }
    }
    Ok(PsiMatrix { size: m, entries })
}

/// `Tr(Psi W^T) = sum_ij Psi_ij W_ij`.
pub fn trace_objective(psi: &PsiMatrix, w: &Mechanism) -> Result<f64> {
    if psi.size != w.size() {
        return Err(Error::DimensionMismatch { expected: psi.size, actual: w.size() });
    }
    Ok(psi.entries.iter().zip(w.as_slice()).map(|(a, b)| a * b).sum())
}

/// Index of `W_ij` in the LP variable vector.
pub fn w_index(m: usize, i: usize, j: usize) -> usize {
    i * m + j
}

/// Index of the slack `eps_j`.
pub fn eps_index(m: usize, j: usize) -> usize {
    m * m + j
}

/// The leakage polytope over `(W, eps)` with a zero objective:
/// `W_ij <= eps_j`, `sum_j eps_j <= 2^l`, rows of `W` sum to one. Non-negativity
/// of all variables is implicit.
pub fn mechanism_polytope(m: usize, budget: &LeakageBudget) -> LinearProgram {
    let n = m * m + m;
    let mut constraints = Vec::with_capacity(m * m + m + 1);
    for i in 0..m {
        for j in 0..m {
            let mut coeffs = vec![0.0; n];
            coeffs[w_index(m, i, j)] = 1.0;
            coeffs[eps_index(m, j)] = -1.0;
            constraints.push(LinearConstraint { coeffs, relation: Relation::LessEq, rhs: 0.0 });
        }
    }
    let mut coeffs = vec![0.0; n];
    (0..m).for_each(|j| coeffs[eps_index(m, j)] = 1.0);
    constraints.push(LinearConstraint { coeffs, relation: Relation::LessEq, rhs: budget.linear() });
    for i in 0..m {
        let mut coeffs = vec![0.0; n];
        (0..m).for_each(|j| coeffs[w_index(m, i, j)] = 1.0);
        constraints.push(LinearConstraint { coeffs, relation: Relation::Equal, rhs: 1.0 });
    }
    LinearProgram { objective: vec![0.0; n], constraints }
}

/// The linearized tradeoff problem, ready for [`solve_lp`].
#[derive(Debug, Clone, PartialEq)]
pub struct LpProblem {
    pub p1: Distribution,
    pub p2: Distribution,
    pub budget: LeakageBudget,
    pub psi: PsiMatrix,
    pub program: LinearProgram,
    /// Variables with an explicit `x >= 0` bound (the `W_ij`); `eps >= 0`
    /// follows from `W_ij <= eps_j`.
    pub nonnegative: Vec<usize>,
    /// Set when the problem was built below the high-utility regime.
    pub regime_warning: Option<String>,
}

impl LpProblem {
    pub fn size(&self) -> usize {
        self.psi.size
    }

    /// `M^2 + M`.
    pub fn num_variables(&self) -> usize {
        self.program.num_variables()
    }

    /// Rows plus explicit bounds: `2 M^2 + M + 1`.
    pub fn num_constraints(&self) -> usize {
        self.program.constraints.len() + self.nonnegative.len()
    }
}

/// `log2(M - 1)`, the lower edge of the high-utility regime.
pub fn regime_threshold(m: usize) -> f64 {
    ((m - 1) as f64).log2()
}

/// Builds `max Tr(Psi W^T)` over the leakage polytope. Below `log2(M - 1)`
/// this is an error unless `force_regime` is set, in which case the problem
/// carries a warning.
pub fn build_lp(
    p1: &Distribution,
    p2: &Distribution,
    budget: &LeakageBudget,
    force_regime: bool,
) -> Result<LpProblem> {
    let psi = psi_matrix(p1, p2)?;
    let m = psi.size;
    let budget = LeakageBudget::for_alphabet(budget.bits(), m)?;
    let threshold = regime_threshold(m);
    let mut regime_warning = None;
    if budget.bits() < threshold - 1e-12 {
        let err = Error::OutsideRegime { bits: budget.bits(), threshold };
        if !force_regime {
            return Err(err);
        }
        regime_warning = Some(err.to_string());
    }
    let mut program = mechanism_polytope(m, &budget);
    program.objective[..m * m].copy_from_slice(&psi.entries);
    Ok(LpProblem {
        p1: p1.clone(),
        p2: p2.clone(),
        budget,
        psi,
        program,
        nonnegative: (0..m * m).collect(),
        regime_warning,
    })
}

/// A vertex of the leakage polytope found by the simplex.
#[derive(Debug, Clone, PartialEq)]
pub struct PolytopeVertex {
    pub mechanism: Mechanism,
    pub objective: f64,
    pub iterations: usize,
}

/// Maximizes `program` (built on [`mechanism_polytope`]) and reads the
/// mechanism out of the optimal vertex.
pub fn solve_polytope(program: &LinearProgram, m: usize) -> Result<PolytopeVertex> {
    let sol = simplex::maximize(program, SimplexOptions::default())?;
    let rows: Vec<Vec<f64>> = (0..m)
        .map(|i| (0..m).map(|j| sol.x[w_index(m, i, j)]).collect())
        .collect();
    let mechanism = Mechanism::from_rows_normalized(rows, 1e-9)
        .map_err(|e| Error::Consistency(format!("simplex vertex is not a mechanism: {e}")))?;
    Ok(PolytopeVertex { mechanism, objective: sol.objective, iterations: sol.iterations })
}

/// Solves the linear program. `utility_bits` is the exact divergence at the
/// returned vertex; the linear value goes to `surrogate_value`.
pub fn solve_lp(problem: &LpProblem) -> Result<PutSolution> {
    let vertex = solve_polytope(&problem.program, problem.size()).map_err(|e| match e {
        Error::Infeasible | Error::Unbounded => {
            Error::Consistency(format!("leakage polytope reported {e}"))
        }
        other => other,
    })?;
    let linear = trace_objective(&problem.psi, &vertex.mechanism)?;
    let provenance = Provenance {
        iterations: Some(vertex.iterations),
        note: problem.regime_warning.clone(),
        ..Provenance::default()
    };
    Ok(PutSolution::new(&problem.p1, &problem.p2, vertex.mechanism, Method::LpHighUtility, Some(linear))?
        .with_provenance(provenance))
}

/// Feasible two-entry construction: diagonal `2^l / M`, and `(M - 2^l) / M`
/// on each row's best off-diagonal `Psi` column (ties to the lowest index).
/// Feasible whenever `2^l >= M / 2`.
pub fn two_entry_witness(psi: &PsiMatrix, budget: &LeakageBudget) -> Result<Mechanism> {
    let m = psi.size;
    let t = budget.linear();
    if t < m as f64 / 2.0 || t > m as f64 + 1e-12 {
        return Err(Error::BudgetOutOfRange {
            bits: budget.bits(),
            min: (m as f64 / 2.0).log2(),
            max: (m as f64).log2(),
        });
    }
    let t = t.min(m as f64);
    let mut rows = vec![vec![0.0; m]; m];
    for (i, row) in rows.iter_mut().enumerate() {
        row[i] = t / m as f64;
        row[psi.second_best_column(i)] = (m as f64 - t) / m as f64;
    }
    Mechanism::new(rows)
}

/// Sparsity pattern of a high-utility solution.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StructureReport {
    pub zero_entries: usize,
    pub required_zeros: usize,
    pub diagonal_positive: bool,
    pub max_nonzeros_per_row: usize,
}

impl StructureReport {
    /// At least `M(M - 2)` zeros, a positive diagonal and at most two
    /// nonzeros per row.
    pub fn passes(&self) -> bool {
        self.zero_entries >= self.required_zeros
            && self.diagonal_positive
            && self.max_nonzeros_per_row <= 2
    }
}

/// Entries at most `tol` count as zero.
pub fn check_vertex_structure(w: &Mechanism, tol: f64) -> StructureReport {
    let m = w.size();
    let zero_entries = w.as_slice().iter().filter(|&&v| v <= tol).count();
    let diagonal_positive = (0..m).all(|i| w.get(i, i) > tol);
    let max_nonzeros_per_row = w.rows().map(|r| r.iter().filter(|&&v| v > tol).count()).max().unwrap_or(0);
    StructureReport {
        zero_entries,
        required_zeros: m * (m - 2),
        diagonal_positive,
        max_nonzeros_per_row,
    }
}

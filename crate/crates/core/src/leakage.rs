//! Maximal leakage of a mechanism and its extremal cases.
//!
//! For a source with full support the maximal leakage from `X` to `X̂`
//! reduces to `log2 sum_j max_i W_ij`; it reads only the mechanism.

use crate::model::Mechanism;

/// Tolerance used for the leakage/structure equivalences.
pub const EQUIVALENCE_TOL: f64 = 1e-9;

/// `log2(sum_j max_i W_ij)` in bits, in `[0, log2 M]`.
pub fn maximal_leakage(w: &Mechanism) -> f64 {
    let max = (w.size() as f64).log2();
    w.column_max_sum().log2().clamp(0.0, max)
}

/// All rows equal within `tol` (zero leakage).
pub fn is_rank_one(w: &Mechanism, tol: f64) -> bool {
    let first = w.row(0);
    w.rows()
        .skip(1)
        .all(|r| r.iter().zip(first).all(|(a, b)| (a - b).abs() <= tol))
}

/// Every column peaks at 1 and rows are stochastic (full leakage).
pub fn is_permutation_matrix(w: &Mechanism, tol: f64) -> bool {
    let rows_ok = w.rows().all(|r| (r.iter().sum::<f64>() - 1.0).abs() <= tol);
    rows_ok && (0..w.size()).all(|j| (w.column_max(j) - 1.0).abs() <= tol)
}

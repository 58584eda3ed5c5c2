use std::f64::consts::LOG2_E;

use rayon::prelude::*;

use super::{better, worker_pool, OracleMethod, OracleReport};
use crate::error::{Error, Result};
use crate::model::{Distribution, LeakageBudget, Mechanism};

/// Smallest accepted grid resolution.
pub const MIN_RESOLUTION: usize = 100;

/// Moves `(r1, r2)` onto `r1 + r2 = c`, splitting the shift evenly but
/// staying inside the unit box.
fn project(r1: f64, r2: f64, c: f64) -> (f64, f64) {
    let shift = 0.5 * (c - r1 - r2);
    let lo = (c - 1.0).max(0.0);
    let hi = c.min(1.0);
    let r1 = (r1 + shift).clamp(lo, hi);
    (r1, c - r1)
}

/// `D((a, 1 - a) || (b, 1 - b))` in bits; zero-probability letters of the
/// first law contribute nothing.
#[inline]
fn binary_kl(a: f64, b: f64) -> f64 {
    let mut d = 0.0;
    if a > 0.0 && b > 0.0 {
        d += a * (a / b).ln();
    }
    let (a, b) = (1.0 - a, 1.0 - b);
    if a > 0.0 && b > 0.0 {
        d += a * (a / b).ln();
    }
    (d * LOG2_E).max(0.0)
}

/// Exhaustive search over `(rho1, rho2) = (W_12, W_21)` on a
/// `resolution x resolution` grid of the unit square, keeping points with
/// `2 - 2^l <= rho1 + rho2 <= 2^l`. Grid points within half a cell of either
/// boundary line are moved onto it, so the optimal corners are hit exactly
/// when they lie on a grid row or column.
///
/// Each hypothesis is the probability of the second letter.
pub fn grid_oracle_binary(p1: f64, p2: f64, l: f64, resolution: usize) -> Result<OracleReport> {
    if resolution < MIN_RESOLUTION {
        return Err(Error::InvalidArgument(format!(
            "resolution {resolution} is below {MIN_RESOLUTION}"
        )));
    }
    let d1 = Distribution::bernoulli(p1)?;
    let d2 = Distribution::bernoulli(p2)?;
    let budget = LeakageBudget::for_alphabet(l, 2)?;
    let (q1, q2) = (d1.probs(), d2.probs());
    let t = budget.linear();
    let (lo, hi) = (2.0 - t, t);
    let h = 1.0 / (resolution - 1) as f64;

    let scan_row = |a: usize| -> ((f64, usize), u64, (f64, f64)) {
        let r1 = a as f64 * h;
        let mut best = (f64::NEG_INFINITY, usize::MAX);
        let mut best_point = (0.0, 0.0);
        let mut evaluations = 0;
        // Columns that can reach the band, padded by one for rounding.
        let first = ((lo - r1) / h - 1.5).floor().max(0.0) as usize;
        let last = (((hi - r1) / h + 1.5).ceil().max(0.0) as usize).min(resolution - 1);
        for b in first..=last {
            let r2 = b as f64 * h;
            let s = r1 + r2;
            let (x, y) = if (s - lo).abs() < 0.5 * h {
                project(r1, r2, lo)
            } else if (s - hi).abs() < 0.5 * h {
                project(r1, r2, hi)
            } else if s < lo || s > hi {
                continue;
            } else {
                (r1, r2)
            };
            // First output letter of p W for W = [[1 - x, x], [y, 1 - y]].
            let u = binary_kl(q1[0] * (1.0 - x) + q1[1] * y, q2[0] * (1.0 - x) + q2[1] * y);
            evaluations += 1;
            // Indices grow along the row, so a strict improvement keeps the
            // lowest index on ties.
            if u > best.0 {
                best = (u, a * resolution + b);
                best_point = (x, y);
            }
        }
        (best, evaluations, best_point)
    };

    let rows: Vec<_> = worker_pool()?.install(|| (0..resolution).into_par_iter().map(scan_row).collect());
    let evaluations = rows.iter().map(|r| r.1).sum();
    let (best, _, (x, y)) = rows
        .into_iter()
        .reduce(|acc, r| if better(acc.0, r.0) == r.0 { r } else { acc })
        .expect("resolution >= 100");
    if best.1 == usize::MAX {
        return Err(Error::Consistency("grid contains no feasible point".into()));
    }
    let best_mechanism = Mechanism::new(vec![vec![1.0 - x, x], vec![y, 1.0 - y]])?;
    Ok(OracleReport {
        best_mechanism,
        best_utility: best.0,
        evaluations,
        method: OracleMethod::Grid,
        is_lower_bound: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::binary::{solve_binary, BinaryParams};
    use crate::model::{is_feasible, kl_divergence};

    #[test]
    fn full_budget_reaches_kl() {
        let r = grid_oracle_binary(0.3, 0.7, 1.0, 201).unwrap();
        let d = kl_divergence(&Distribution::bernoulli(0.3).unwrap(), &Distribution::bernoulli(0.7).unwrap()).unwrap();
        assert!((r.best_utility - d).abs() < 1e-12);
    }

    #[test]
    fn zero_budget_is_near_zero() {
        let r = grid_oracle_binary(0.3, 0.7, 0.0, 201).unwrap();
        assert!(r.best_utility <= 1e-6);
        assert!(is_feasible(&r.best_mechanism, &LeakageBudget::new(0.0).unwrap(), 1e-9));
    }

    #[test]
    fn pins_the_closed_form() {
        let r = grid_oracle_binary(0.3, 0.7, 0.5, 2001).unwrap();
        let exact = solve_binary(&BinaryParams::new(0.3, 0.7, 0.5).unwrap()).unwrap();
        assert!((r.best_utility - exact.utility_bits).abs() < 1e-3);
        assert!(r.best_utility <= exact.utility_bits + 1e-9);
        assert!(is_feasible(&r.best_mechanism, &LeakageBudget::new(0.5).unwrap(), 1e-9));
    }

    #[test]
    fn specialized_kl_matches_general() {
        for (a, b) in [(0.3, 0.7), (0.0, 0.4), (1.0, 0.2), (0.5, 0.5)] {
            let p = Distribution::with_zeros(vec![a, 1.0 - a]).unwrap();
            let q = Distribution::new(vec![b, 1.0 - b]).unwrap();
            assert!((binary_kl(a, b) - kl_divergence(&p, &q).unwrap()).abs() < 1e-15);
        }
    }

    #[test]
    fn rejects_coarse_grids() {
        assert!(grid_oracle_binary(0.3, 0.7, 0.5, 99).is_err());
    }

    #[test]
    fn projection_stays_in_box() {
        let (x, y) = project(0.4, 1.0, 1.414);
        assert!((x - 0.414).abs() < 1e-12 && (y - 1.0).abs() < 1e-12);
        let (x, y) = project(0.0, 0.58, 0.586);
        assert!((x - 0.003).abs() < 1e-12 && (y - 0.583).abs() < 1e-12);
    }
}

//! High-privacy regime (`l <= 1`, `M >= 3`).
//!
//! Near a rank-1 mechanism `W0` with common row `w0`, the relative entropy is
//! replaced by its quadratic (Euclidean) term
//! `1/2 * sum_j ((p1 - p2) W)_j^2 / w0_j`. Maximizing it under the leakage
//! constraint has a closed form: one column carries `2^l - 1` on the inputs
//! where `p1 > p2`, a second column carries `2^l - 1` on the rest, and the
//! remaining `M - 2` columns are constant and share `2 - 2^l`.
//!
//! The quadratic term is on the natural-log scale of the divergence, so the
//! exact utility in bits times `ln 2` is the comparable quantity.

use crate::error::{Error, Result};
use crate::model::{pushforward, Distribution, LeakageBudget, Mechanism, Method, PutSolution};

/// Input letters split by the sign of `p1_i - p2_i`; zero differences go to
/// `minus`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignPartition {
    pub plus: Vec<usize>,
    pub minus: Vec<usize>,
}

/// Common row `w0` of the rank-1 anchor and the neighborhood radius
/// `max_{k,j} |(p_k W)_j - w0_j|` of the mechanism it was derived from.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceRow {
    pub w0: Distribution,
    pub delta: f64,
}

impl ReferenceRow {
    pub fn new(w0: Distribution, delta: f64) -> Self {
        Self { w0, delta }
    }

    /// Anchor at the average of the two distinct rows of `w`, one taken from
    /// each side of the partition.
    pub fn row_average(
        p1: &Distribution,
        p2: &Distribution,
        w: &Mechanism,
        partition: &SignPartition,
    ) -> Result<Self> {
        let a = w.row(partition.plus[0]);
        let b = w.row(partition.minus[0]);
        let avg: Vec<f64> = a.iter().zip(b).map(|(x, y)| 0.5 * (x + y)).collect();
        let s: f64 = avg.iter().sum();
        let w0 = Distribution::with_zeros(avg.into_iter().map(|v| v / s).collect())?;
        let mut delta: f64 = 0.0;
        for p in [p1, p2] {
            let out = pushforward(p, w)?;
            for (o, c) in out.probs().iter().zip(w0.probs()) {
                delta = delta.max((o - c).abs());
            }
        }
        Ok(Self { w0, delta })
    }

    /// Whether `delta <= 1/M`, the neighborhood in which the quadratic
    /// approximation is meant to be used.
    pub fn within_neighborhood(&self) -> bool {
        self.delta <= 1.0 / self.w0.len() as f64
    }
}

/// `1/2 * sum_j ((p1 - p2) W)_j^2 / w0_j`.
pub fn eit_objective(
    p1: &Distribution,
    p2: &Distribution,
    w: &Mechanism,
    anchor: &ReferenceRow,
) -> Result<f64> {
    let m = w.size();
    for len in [p1.len(), p2.len(), anchor.w0.len()] {
        if len != m {
            return Err(Error::DimensionMismatch { expected: m, actual: len });
        }
    }
    let diff: Vec<f64> = p1.probs().iter().zip(p2.probs()).map(|(a, b)| a - b).collect();
    let mut total = 0.0;
    for j in 0..m {
        let x: f64 = (0..m).map(|i| diff[i] * w.get(i, j)).sum();
        let w0j = anchor.w0.probs()[j];
        if w0j > 0.0 {
            total += x * x / w0j;
        } else if x.abs() > 1e-12 {
            return Err(Error::DivisionByZeroSupport(j));
        }
    }
    Ok(0.5 * total)
}

pub fn sign_partition(p1: &Distribution, p2: &Distribution) -> Result<SignPartition> {
    if p1.len() != p2.len() {
        return Err(Error::DimensionMismatch { expected: p1.len(), actual: p2.len() });
    }
    if p1 == p2 {
        return Err(Error::DegenerateHypotheses);
    }
    let (plus, minus) = (0..p1.len()).partition(|&i| p1.probs()[i] - p2.probs()[i] > 0.0);
    Ok(SignPartition { plus, minus })
}

fn check_inputs(p1: &Distribution, p2: &Distribution, budget: &LeakageBudget) -> Result<f64> {
    let m = p1.len();
    if p2.len() != m {
        return Err(Error::DimensionMismatch { expected: m, actual: p2.len() });
    }
    if m < 3 {
        return Err(Error::AlphabetTooSmall(m));
    }
    if p1 == p2 {
        return Err(Error::DegenerateHypotheses);
    }
    let bits = budget.bits();
    if bits > 1.0 + 1e-12 {
        return Err(Error::BudgetOutOfRange { bits, min: 0.0, max: 1.0 });
    }
    Ok(bits.min(1.0).exp2())
}

/// `(2^l - 1) / 2 * ||p1 - p2||_1^2`.
pub fn eit_optimal_value(p1: &Distribution, p2: &Distribution, budget: &LeakageBudget) -> Result<f64> {
    let t = check_inputs(p1, p2, budget)?;
    let tv = p1.l1_distance(p2)?;
    Ok(0.5 * (t - 1.0) * tv * tv)
}

/// The optimal mechanism of the quadratic problem. Column 0 is supported on
/// `plus`, column 1 on `minus`, and the `M - 2` constant columns split
/// `2 - 2^l` uniformly. `surrogate_value` holds the quadratic optimum;
/// `utility_bits` is the exact divergence at the mechanism.
pub fn solve_eit(p1: &Distribution, p2: &Distribution, budget: &LeakageBudget) -> Result<PutSolution> {
    let t = check_inputs(p1, p2, budget)?;
    let m = p1.len();
    let partition = sign_partition(p1, p2)?;
    let reveal = t - 1.0;
    let eps = (2.0 - t) / (m - 2) as f64;
    let mut rows = vec![vec![eps; m]; m];
    for &i in &partition.plus {
        rows[i][0] = reveal;
        rows[i][1] = 0.0;
    }
    for &i in &partition.minus {
        rows[i][0] = 0.0;
        rows[i][1] = reveal;
    }
    let w = Mechanism::new(rows)?;
    let value = eit_optimal_value(p1, p2, budget)?;
    PutSolution::new(p1, p2, w, Method::EitHighPrivacy, Some(value))
}

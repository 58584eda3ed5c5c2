//! Distributions, mechanisms, the utility functional and the feasibility
//! predicates every solver shares.
//!
//! All logarithms are base 2, so utilities and leakages are in bits. The
//! convention `0 · log 0 = 0` is used throughout.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::leakage::maximal_leakage;

/// Smallest admissible entry of a hypothesis distribution `p1` / `p2`.
pub const POSITIVITY_FLOOR: f64 = 1e-12;

/// Tolerance on `sum(p) = 1` and on row sums of a mechanism.
pub const NORMALIZATION_TOL: f64 = 1e-12;

/// Default tolerance of the feasibility predicates.
pub const DEFAULT_FEASIBILITY_TOL: f64 = 1e-9;

/// A probability row vector over an `M`-letter alphabet.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Distribution {
    probs: Vec<f64>,
}

impl Distribution {
    /// A hypothesis distribution: full support, every entry at least
    /// [`POSITIVITY_FLOOR`]. Inputs below the floor are rejected, never clamped.
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        let d = Self::with_zeros(probs)?;
        if let Some((index, &value)) = d
            .probs
            .iter()
            .enumerate()
            .find(|(_, &v)| v < POSITIVITY_FLOOR)
        {
            return Err(Error::NonPositiveSupport { index, value });
        }
        Ok(d)
    }

    /// A distribution that may put zero mass on some letters (output laws,
    /// anchors).
    pub fn with_zeros(probs: Vec<f64>) -> Result<Self> {
        if probs.len() < 2 {
            return Err(Error::InvalidDistribution(format!(
                "alphabet size {} < 2",
                probs.len()
            )));
        }
        if let Some((i, v)) = probs
            .iter()
            .enumerate()
            .find(|(_, v)| !v.is_finite() || **v < 0.0)
        {
            return Err(Error::InvalidDistribution(format!("entry {i} is {v}")));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::InvalidDistribution(format!("entries sum to {sum}")));
        }
        Ok(Self { probs })
    }

    /// Bernoulli law with parameter `p` on the second letter: `(1 - p, p)`.
    pub fn bernoulli(p: f64) -> Result<Self> {
        Self::new(vec![1.0 - p, p])
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn is_strictly_positive(&self) -> bool {
        self.probs.iter().all(|&v| v >= POSITIVITY_FLOOR)
    }

    /// `sum_i |p_i - q_i|`.
    pub fn l1_distance(&self, other: &Distribution) -> Result<f64> {
        check_same_len(self.len(), other.len())?;
        Ok(self
            .probs
            .iter()
            .zip(&other.probs)
            .map(|(a, b)| (a - b).abs())
            .sum())
    }
}

impl<'de> Deserialize<'de> for Distribution {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let probs = Vec::<f64>::deserialize(d)?;
        Distribution::with_zeros(probs).map_err(serde::de::Error::custom)
    }
}

/// An `M x M` row-stochastic matrix: `W[i][j] = Pr{output j | input i}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MechanismRepr", into = "MechanismRepr")]
pub struct Mechanism {
    size: usize,
    data: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct MechanismRepr {
    rows: Vec<Vec<f64>>,
}

impl TryFrom<MechanismRepr> for Mechanism {
    type Error = Error;

    fn try_from(repr: MechanismRepr) -> Result<Self> {
        Mechanism::from_rows_normalized(repr.rows, DEFAULT_FEASIBILITY_TOL)
    }
}

impl From<Mechanism> for MechanismRepr {
    fn from(w: Mechanism) -> Self {
        MechanismRepr { rows: w.to_rows() }
    }
}

impl Mechanism {
    /// Validates entries in `[0, 1]` and row sums within [`NORMALIZATION_TOL`].
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::from_rows_with_tol(rows, NORMALIZATION_TOL)
    }

    /// As [`Mechanism::new`] with a caller-chosen tolerance. Entries within
    /// `tol` outside `[0, 1]` are clamped.
    pub fn from_rows_with_tol(rows: Vec<Vec<f64>>, tol: f64) -> Result<Self> {
        let size = rows.len();
        if size < 2 {
            return Err(Error::InvalidMechanism(format!("{size} rows; need at least 2")));
        }
        let mut data = Vec::with_capacity(size * size);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != size {
                return Err(Error::InvalidMechanism(format!(
                    "row {} has {} entries; mechanism must be square ({size}x{size})",
                    i + 1,
                    row.len()
                )));
            }
            for (j, &v) in row.iter().enumerate() {
                if !v.is_finite() || v < -tol || v > 1.0 + tol {
                    return Err(Error::EntryOutOfRange { row: i + 1, col: j + 1, value: v });
                }
                data.push(v.clamp(0.0, 1.0));
            }
            let sum: f64 = data[i * size..(i + 1) * size].iter().sum();
            if (sum - 1.0).abs() > tol {
                return Err(Error::RowNotStochastic { row: i + 1, sum });
            }
        }
        Ok(Self { size, data })
    }

    /// Validates within `tol`, then rescales each row to sum to one.
    pub fn from_rows_normalized(rows: Vec<Vec<f64>>, tol: f64) -> Result<Self> {
        let mut w = Self::from_rows_with_tol(rows, tol)?;
        let m = w.size;
        for row in w.data.chunks_mut(m) {
            let s: f64 = row.iter().sum();
            row.iter_mut().for_each(|v| *v /= s);
        }
        Ok(w)
    }

    pub fn identity(size: usize) -> Self {
        let mut data = vec![0.0; size * size];
        for i in 0..size {
            data[i * size + i] = 1.0;
        }
        Self { size, data }
    }

    /// Every row equal to `row`.
    pub fn rank_one(row: &Distribution) -> Self {
        let size = row.len();
        let data = (0..size).flat_map(|_| row.probs().iter().copied()).collect();
        Self { size, data }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.size + col]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.size..(i + 1) * self.size]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks(self.size)
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.rows().map(<[f64]>::to_vec).collect()
    }

    /// Row-major entries.
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn column_max(&self, col: usize) -> f64 {
        (0..self.size).map(|i| self.get(i, col)).fold(0.0, f64::max)
    }

    /// `sum_j max_i W_ij`, the linear-domain leakage.
    pub fn column_max_sum(&self) -> f64 {
        (0..self.size).map(|j| self.column_max(j)).sum()
    }
}

/// A maximal-leakage budget `l` in bits together with its linear value `2^l`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LeakageBudget {
    bits: f64,
    linear: f64,
}

impl LeakageBudget {
    pub fn new(bits: f64) -> Result<Self> {
        if !bits.is_finite() || bits < 0.0 {
            return Err(Error::BudgetOutOfRange { bits, min: 0.0, max: f64::INFINITY });
        }
        Ok(Self { bits, linear: bits.exp2() })
    }

    /// Budget checked against an alphabet of size `m`: `0 <= l <= log2 m`.
    /// Values above `log2 m` by at most `1e-12` are clamped.
    pub fn for_alphabet(bits: f64, m: usize) -> Result<Self> {
        let max = (m as f64).log2();
        if bits > max && bits <= max + 1e-12 {
            return Ok(Self { bits: max, linear: m as f64 });
        }
        if !bits.is_finite() || bits < 0.0 || bits > max {
            return Err(Error::BudgetOutOfRange { bits, min: 0.0, max });
        }
        Self::new(bits)
    }

    pub fn bits(&self) -> f64 {
        self.bits
    }

    /// `2^l`.
    pub fn linear(&self) -> f64 {
        self.linear
    }
}

fn check_same_len(expected: usize, actual: usize) -> Result<()> {
    if expected != actual {
        return Err(Error::DimensionMismatch { expected, actual });
    }
    Ok(())
}

/// `D(p || q) = sum_i p_i log2(p_i / q_i)` in bits.
pub fn kl_divergence(p: &Distribution, q: &Distribution) -> Result<f64> {
    check_same_len(p.len(), q.len())?;
    if let Some((index, &value)) = q.probs().iter().enumerate().find(|(_, &v)| v <= 0.0) {
        return Err(Error::NonPositiveSupport { index, value });
    }
    Ok(kl_bits(p.probs(), q.probs()))
}

/// KL in bits over raw non-negative vectors; terms with `p_i = 0` vanish.
pub(crate) fn kl_bits(p: &[f64], q: &[f64]) -> f64 {
    let d: f64 = p
        .iter()
        .zip(q)
        .filter(|(&a, _)| a > 0.0)
        .map(|(&a, &b)| a * (a / b).log2())
        .sum();
    d.max(0.0)
}

/// The output law `pW`.
pub fn pushforward(p: &Distribution, w: &Mechanism) -> Result<Distribution> {
    check_same_len(w.size(), p.len())?;
    let out = pushforward_raw(p.probs(), w.as_slice(), w.size());
    // Round-off can push the sum a few ulps away from 1; renormalize.
    let s: f64 = out.iter().sum();
    Distribution::with_zeros(out.into_iter().map(|v| v / s).collect())
}

pub(crate) fn pushforward_raw(p: &[f64], w: &[f64], m: usize) -> Vec<f64> {
    let mut out = vec![0.0; m];
    for (i, &pi) in p.iter().enumerate() {
        for (o, &wij) in out.iter_mut().zip(&w[i * m..(i + 1) * m]) {
            *o += pi * wij;
        }
    }
    out
}

/// Exact utility `D(p1 W || p2 W)` for a row-major `m x m` matrix, without
/// allocating. Output letters with `(p2 W)_j = 0` contribute zero.
pub(crate) fn utility_raw(p1: &[f64], p2: &[f64], w: &[f64], m: usize) -> f64 {
    let mut d = 0.0;
    for j in 0..m {
        let mut a = 0.0;
        let mut b = 0.0;
        for i in 0..m {
            let wij = w[i * m + j];
            a += p1[i] * wij;
            b += p2[i] * wij;
        }
        if a > 0.0 && b > 0.0 {
            d += a * (a / b).log2();
        }
    }
    d.max(0.0)
}

/// The type-II error exponent after the mechanism, `D(p1 W || p2 W)` in bits.
pub fn utility(p1: &Distribution, p2: &Distribution, w: &Mechanism) -> Result<f64> {
    check_same_len(p1.len(), p2.len())?;
    check_same_len(p1.len(), w.size())?;
    for p in [p1, p2] {
        if let Some((index, &value)) = p
            .probs()
            .iter()
            .enumerate()
            .find(|(_, &v)| v < POSITIVITY_FLOOR)
        {
            return Err(Error::NonPositiveSupport { index, value });
        }
    }
    Ok(utility_raw(p1.probs(), p2.probs(), w.as_slice(), w.size()))
}

/// Whether `w` satisfies the leakage budget and stochasticity within `tol`.
pub fn is_feasible(w: &Mechanism, budget: &LeakageBudget, tol: f64) -> bool {
    let entries_ok = w.as_slice().iter().all(|&v| v >= -tol && v <= 1.0 + tol);
    let rows_ok = w.rows().all(|r| (r.iter().sum::<f64>() - 1.0).abs() <= tol);
    entries_ok && rows_ok && w.column_max_sum() <= budget.linear() + tol
}

/// Column `i` of the result is column `perm[i]` of `w`.
pub fn permute_columns(w: &Mechanism, perm: &[usize]) -> Result<Mechanism> {
    let m = w.size();
    if perm.len() != m {
        return Err(Error::InvalidPermutation(format!(
            "length {} for a {m}x{m} mechanism",
            perm.len()
        )));
    }
    let mut seen = vec![false; m];
    for &p in perm {
        if p >= m || std::mem::replace(&mut seen[p], true) {
            return Err(Error::InvalidPermutation(format!("{perm:?} is not a bijection")));
        }
    }
    let mut data = vec![0.0; m * m];
    for i in 0..m {
        for (c, &src) in perm.iter().enumerate() {
            data[i * m + c] = w.get(i, src);
        }
    }
    Ok(Mechanism { size: m, data })
}

/// Which solver produced a [`PutSolution`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    BinaryExact,
    EitHighPrivacy,
    LpHighUtility,
    OracleGrid,
    OracleVertexSample,
}

/// Solver-side details attached to a solution.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    /// Co-optimal mechanisms (e.g. both branches on a binary tie).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub alternatives: Vec<Mechanism>,
    /// The reported utility is only a lower bound on the optimum.
    #[serde(default)]
    pub lower_bound: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub evaluations: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub iterations: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// A mechanism with its exact utility and leakage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PutSolution {
    pub mechanism: Mechanism,
    /// Exact `D(p1 W || p2 W)`, never a surrogate.
    pub utility_bits: f64,
    pub leakage_bits: f64,
    pub method: Method,
    /// Objective of the approximate problem the solver optimized (EIT value,
    /// LP linear value), when there is one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub surrogate_value: Option<f64>,
    #[serde(default)]
    pub provenance: Provenance,
}

impl PutSolution {
    /// Computes utility and leakage from `mechanism`.
    pub fn new(
        p1: &Distribution,
        p2: &Distribution,
        mechanism: Mechanism,
        method: Method,
        surrogate_value: Option<f64>,
    ) -> Result<Self> {
        let utility_bits = utility(p1, p2, &mechanism)?;
        let leakage_bits = maximal_leakage(&mechanism);
        Ok(Self {
            mechanism,
            utility_bits,
            leakage_bits,
            method,
            surrogate_value,
            provenance: Provenance::default(),
        })
    }

    pub fn with_provenance(mut self, provenance: Provenance) -> Self {
        self.provenance = provenance;
        self
    }

    /// Recomputes utility and leakage and compares them with the stored values.
    pub fn revalidate(&self, p1: &Distribution, p2: &Distribution) -> Result<()> {
        let u = utility(p1, p2, &self.mechanism)?;
        let l = maximal_leakage(&self.mechanism);
        if (u - self.utility_bits).abs() > 1e-12 {
            return Err(Error::Consistency(format!(
                "stored utility {} but mechanism gives {u}",
                self.utility_bits
            )));
        }
        if (l - self.leakage_bits).abs() > 1e-9 {
            return Err(Error::Consistency(format!(
                "stored leakage {} but mechanism gives {l}",
                self.leakage_bits
            )));
        }
        Ok(())
    }
}

/// One point of a [`TradeoffCurve`].
#[derive(Debug, Clone, PartialEq)]
pub struct CurvePoint {
    pub budget: LeakageBudget,
    pub solution: PutSolution,
    /// Index of the earlier point whose mechanism is reused here.
    pub carried_from: Option<usize>,
}

/// `(l, utility)` points ordered by budget; utilities never decrease.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TradeoffCurve {
    points: Vec<CurvePoint>,
}

/// Slack on the non-decreasing utility invariant.
pub const CURVE_MONOTONE_TOL: f64 = 1e-9;

impl TradeoffCurve {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn points(&self) -> &[CurvePoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    fn check_budget(&self, budget: &LeakageBudget) -> Result<()> {
        if let Some(last) = self.points.last() {
            if budget.bits() <= last.budget.bits() {
                return Err(Error::InvalidArgument(format!(
                    "budgets must be strictly increasing: {} after {}",
                    budget.bits(),
                    last.budget.bits()
                )));
            }
        }
        Ok(())
    }

    /// Appends a point, rejecting it if it breaks either invariant.
    pub fn push(&mut self, budget: LeakageBudget, solution: PutSolution) -> Result<()> {
        self.check_budget(&budget)?;
        if let Some(last) = self.points.last() {
            if solution.utility_bits < last.solution.utility_bits - CURVE_MONOTONE_TOL {
                return Err(Error::Consistency(format!(
                    "utility decreased from {} to {} at l = {}",
                    last.solution.utility_bits,
                    solution.utility_bits,
                    budget.bits()
                )));
            }
        }
        self.points.push(CurvePoint { budget, solution, carried_from: None });
        Ok(())
    }

    /// Appends a point; if its utility falls below the running best, the
    /// best earlier mechanism (feasible for every larger budget) is reused.
    /// Returns `true` when the point was carried forward.
    pub fn push_with_carry_forward(
        &mut self,
        budget: LeakageBudget,
        solution: PutSolution,
    ) -> Result<bool> {
        self.check_budget(&budget)?;
        let best = self.points.last().map(|p| (p.carried_from.unwrap_or(self.points.len() - 1), p));
        match best {
            Some((source, last))
                if solution.utility_bits < last.solution.utility_bits - CURVE_MONOTONE_TOL =>
            {
                let carried = self.points[source].solution.clone();
                self.points.push(CurvePoint { budget, solution: carried, carried_from: Some(source) });
                Ok(true)
            }
            _ => {
                self.points.push(CurvePoint { budget, solution, carried_from: None });
                Ok(false)
            }
        }
    }
}

//! Exact privacy-utility tradeoff for binary sources.
//!
//! A binary hypothesis is a Bernoulli parameter `p`, the probability of the
//! second letter, so the law is `(1 - p, p)`. With off-diagonal entries
//! `rho1 = W_12`, `rho2 = W_21` the leakage constraint becomes the band
//! `2 - 2^l <= rho1 + rho2 <= 2^l` in the unit box, a hexagon whose six
//! corners are returned by [`binary_vertices`]. The convex utility peaks at
//! one of them, which gives the closed form `max(f1, f2)`.

use crate::error::{Error, Result};
use crate::model::{Distribution, LeakageBudget, Mechanism, Method, PutSolution, Provenance};

/// Validated `(p1, p2, l)` for a binary test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinaryParams {
    p1: f64,
    p2: f64,
    l: f64,
}

fn check_open_unit(name: &str, p: f64) -> Result<()> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain(format!("{name} = {p} must lie in (0, 1)")));
    }
    Ok(())
}

/// Clamps `l` to `[0, 1]` when it is off by at most `1e-12`.
fn check_binary_budget(l: f64) -> Result<f64> {
    if (-1e-12..0.0).contains(&l) {
        return Ok(0.0);
    }
    if l > 1.0 && l <= 1.0 + 1e-12 {
        return Ok(1.0);
    }
    if !(0.0..=1.0).contains(&l) {
        return Err(Error::Domain(format!("l = {l} must lie in [0, 1]")));
    }
    Ok(l)
}

impl BinaryParams {
    pub fn new(p1: f64, p2: f64, l: f64) -> Result<Self> {
        check_open_unit("p1", p1)?;
        check_open_unit("p2", p2)?;
        if p1 == p2 {
            return Err(Error::Domain("p1 = p2: the hypotheses coincide".into()));
        }
        let l = check_binary_budget(l)?;
        Ok(Self { p1, p2, l })
    }

    pub fn p1(&self) -> f64 {
        self.p1
    }

    pub fn p2(&self) -> f64 {
        self.p2
    }

    pub fn l(&self) -> f64 {
        self.l
    }

    /// `((1 - p1, p1), (1 - p2, p2))`.
    pub fn distributions(&self) -> Result<(Distribution, Distribution)> {
        Ok((Distribution::bernoulli(self.p1)?, Distribution::bernoulli(self.p2)?))
    }
}

/// Utility at vertex 1, `W = [[2 - 2^l, 2^l - 1], [1, 0]]`.
pub fn f1(params: &BinaryParams) -> f64 {
    let (p1, p2) = (params.p1, params.p2);
    let t = params.l.exp2();
    let a1 = (2.0 - t) + p1 * (t - 1.0);
    let a2 = (2.0 - t) + p2 * (t - 1.0);
    let v = (p1 - 1.0) * (t - 1.0) * ((1.0 - p2) * a1 / ((1.0 - p1) * a2)).log2() + (a1 / a2).log2();
    v.max(0.0)
}

/// Utility at vertex 2, `W = [[0, 1], [2^l - 1, 2 - 2^l]]`.
pub fn f2(params: &BinaryParams) -> f64 {
    let (p1, p2) = (params.p1, params.p2);
    let t = params.l.exp2();
    let b1 = 1.0 + p1 * (1.0 - t);
    let b2 = 1.0 + p2 * (1.0 - t);
    let v = p1 * (t - 1.0) * (p1 * b2 / (p2 * b1)).log2() + (b1 / b2).log2();
    v.max(0.0)
}

fn from_off_diagonal(rho1: f64, rho2: f64) -> Mechanism {
    Mechanism::new(vec![vec![1.0 - rho1, rho1], vec![rho2, 1.0 - rho2]])
        .expect("box point is a stochastic matrix")
}

/// The six corners of the binary feasible region, in order 1..6:
///
/// 1. `(2^l - 1, 1)`  2. `(1, 2^l - 1)`  3. `(0, 2 - 2^l)`  4. `(2 - 2^l, 0)`
/// 5. `(0, 1)`  6. `(1, 0)`
///
/// as `(rho1, rho2)`. Vertices 1/4 and 2/3 are column swaps of each other;
/// 5 and 6 are rank-1.
pub fn binary_vertices(l: f64) -> Result<[Mechanism; 6]> {
    let l = check_binary_budget(l)?;
    let t = l.exp2();
    Ok([
        from_off_diagonal(t - 1.0, 1.0),
        from_off_diagonal(1.0, t - 1.0),
        from_off_diagonal(0.0, 2.0 - t),
        from_off_diagonal(2.0 - t, 0.0),
        from_off_diagonal(0.0, 1.0),
        from_off_diagonal(1.0, 0.0),
    ])
}

/// Optimal binary mechanism: vertex 1 if `f1 >= f2`, else vertex 2. On a tie
/// both are recorded in the provenance.
pub fn solve_binary(params: &BinaryParams) -> Result<PutSolution> {
    let (d1, d2) = params.distributions()?;
    let (v1, v2) = (f1(params), f2(params));
    let [w1, w2, ..] = binary_vertices(params.l)?;
    let mut provenance = Provenance::default();
    let mechanism = if v1 >= v2 {
        if v1 == v2 {
            provenance.alternatives = vec![w1.clone(), w2];
            provenance.note = Some("f1 = f2: both vertex mechanisms are optimal".into());
        }
        w1
    } else {
        w2
    };
    Ok(PutSolution::new(&d1, &d2, mechanism, Method::BinaryExact, None)?.with_provenance(provenance))
}

/// Convenience wrapper taking the budget type used elsewhere.
pub fn solve_binary_budget(p1: f64, p2: f64, budget: &LeakageBudget) -> Result<PutSolution> {
    solve_binary(&BinaryParams::new(p1, p2, budget.bits())?)
}

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution as _, StandardNormal};
use rayon::prelude::*;

use super::{better, worker_pool, OracleMethod, OracleReport};
use crate::error::{Error, Result};
use crate::lp::{mechanism_polytope, solve_polytope};
use crate::model::{utility, Distribution, LeakageBudget, Mechanism};

/// Maximizes `samples` random linear objectives (standard-normal weights on
/// the mechanism entries) over the leakage polytope and keeps the vertex with
/// the largest exact utility. Sample `k` draws from ChaCha20 stream `k`.
///
/// The result is a lower bound on the optimum.
pub fn vertex_sample_oracle(
    p1: &Distribution,
    p2: &Distribution,
    budget: &LeakageBudget,
    samples: usize,
    seed: u64,
) -> Result<OracleReport> {
    if samples == 0 {
        return Err(Error::InvalidArgument("samples must be at least 1".into()));
    }
    let m = p1.len();
    if p2.len() != m {
        return Err(Error::DimensionMismatch { expected: m, actual: p2.len() });
    }
    if m < 2 {
        return Err(Error::AlphabetTooSmall(m));
    }
    let budget = LeakageBudget::for_alphabet(budget.bits(), m)?;
    let base = mechanism_polytope(m, &budget);

    let run = |k: usize| -> Result<(f64, Mechanism)> {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        rng.set_stream(k as u64);
        let mut program = base.clone();
        for c in program.objective.iter_mut().take(m * m) {
            *c = StandardNormal.sample(&mut rng);
        }
        let vertex = solve_polytope(&program, m)?;
        Ok((utility(p1, p2, &vertex.mechanism)?, vertex.mechanism))
    };

    let results: Vec<Result<(f64, Mechanism)>> =
        worker_pool()?.install(|| (0..samples).into_par_iter().map(run).collect());
    let mut best = (f64::NEG_INFINITY, usize::MAX);
    let mut vertices = Vec::with_capacity(samples);
    for (k, r) in results.into_iter().enumerate() {
        let (u, w) = r?;
        best = better(best, (u, k));
        vertices.push(w);
    }
    Ok(OracleReport {
        best_mechanism: vertices.swap_remove(best.1),
        best_utility: best.0,
        evaluations: samples as u64,
        method: OracleMethod::VertexSample,
        is_lower_bound: true,
    })
}

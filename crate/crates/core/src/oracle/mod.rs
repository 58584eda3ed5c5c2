//! Independent checks on the solvers: brute-force search for binary
//! sources, random-objective vertex sampling for larger alphabets, and Monte
//! Carlo simulation of the hypothesis test itself.
//!
//! All three are deterministic given their inputs and seed, regardless of the
//! number of worker threads.

mod grid;
mod simulate;
mod vertex;

pub use grid::grid_oracle_binary;
pub use simulate::{simulate_test, SimulationReport, RNG_NAME};
pub use vertex::vertex_sample_oracle;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Distribution, Mechanism, Method, PutSolution, Provenance};

/// Environment variable capping worker threads; `0` or unset means one per core.
pub const THREADS_ENV: &str = "LEAKAGE_PUT_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleMethod {
    Grid,
    VertexSample,
}

/// Best feasible mechanism an oracle found.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub best_mechanism: Mechanism,
    pub best_utility: f64,
    pub evaluations: u64,
    pub method: OracleMethod,
    /// No approximation guarantee beyond being attained by a feasible point.
    pub is_lower_bound: bool,
}

impl OracleReport {
    pub fn into_solution(self, p1: &Distribution, p2: &Distribution) -> Result<PutSolution> {
        let method = match self.method {
            OracleMethod::Grid => Method::OracleGrid,
            OracleMethod::VertexSample => Method::OracleVertexSample,
        };
        let provenance = Provenance {
            lower_bound: self.is_lower_bound,
            evaluations: Some(self.evaluations),
            ..Provenance::default()
        };
        Ok(PutSolution::new(p1, p2, self.best_mechanism, method, None)?.with_provenance(provenance))
    }
}

/// Thread pool sized by [`THREADS_ENV`].
pub fn worker_pool() -> Result<rayon::ThreadPool> {
    let threads = match std::env::var(THREADS_ENV) {
        Ok(v) if !v.trim().is_empty() => v.trim().parse::<usize>().map_err(|_| {
            Error::InvalidArgument(format!("{THREADS_ENV}={v} is not a thread count"))
        })?,
        _ => 0,
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("cannot start worker pool: {e}")))
}

/// Keeps the larger value; equal values keep the lower index.
pub(crate) fn better(a: (f64, usize), b: (f64, usize)) -> (f64, usize) {
    if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) {
        b
    } else {
        a
    }
}

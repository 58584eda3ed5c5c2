//! Privacy mechanisms that keep a binary hypothesis test as powerful as
//! possible while bounding maximal leakage.
//!
//! A mechanism is a row-stochastic matrix `W` applied to each observation
//! before testing `p1` against `p2`. Its utility is the Chernoff–Stein
//! exponent `D(p1 W || p2 W)` and its privacy cost the maximal leakage
//! `log2 sum_j max_i W_ij`. The crate solves
//! `max D(p1 W || p2 W)` subject to leakage `<= l`:
//!
//! - [`binary`]: exact closed form for two-letter sources;
//! - [`eit`]: constructive optimum of the quadratic approximation for `l <= 1`;
//! - [`lp`]: linear approximation around the identity for `l >= log2(M - 1)`;
//! - [`oracle`]: brute-force and sampling cross-checks plus a Monte Carlo
//!   simulation of the test;
//! - [`cli`]: the `leakage-put` command-line front end.
//!
//! ```
//! use leakage_put::{binary, Distribution, LeakageBudget};
//!
//! let s = binary::solve_binary_budget(0.3, 0.7, &LeakageBudget::new(1.0)?)?;
//! let d = leakage_put::kl_divergence(
//!     &Distribution::bernoulli(0.3)?,
//!     &Distribution::bernoulli(0.7)?,
//! )?;
//! assert!((s.utility_bits - d).abs() < 1e-12);
//! # Ok::<(), leakage_put::Error>(())
//! ```
//!
//! Runnable walkthroughs live in `examples/`.

pub mod binary;
pub mod cli;
pub mod eit;
mod error;
pub mod leakage;
pub mod lp;
mod model;
pub mod oracle;

pub use error::{Error, Result};
pub use leakage::maximal_leakage;
pub use model::{
    is_feasible, kl_divergence, permute_columns, pushforward, utility, CurvePoint, Distribution,
    LeakageBudget, Mechanism, Method, Provenance, PutSolution, TradeoffCurve, CURVE_MONOTONE_TOL,
    DEFAULT_FEASIBILITY_TOL, NORMALIZATION_TOL, POSITIVITY_FLOOR,
};

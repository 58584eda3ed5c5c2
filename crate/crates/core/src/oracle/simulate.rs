use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Binomial, Distribution as _};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::worker_pool;
use crate::error::{Error, Result};
use crate::model::{pushforward, utility, Distribution, Mechanism};

/// Generator recorded in every report.
pub const RNG_NAME: &str = "ChaCha20 (rand_chacha), stream per trial";

/// Outcome of a simulated Neyman-Pearson test between `p1 W` and `p2 W`.
///
/// `type2_rate` is estimated from the H1 samples by likelihood-ratio
/// reweighting, which resolves rates far below `1 / trials`;
/// `type2_rate_direct` counts acceptances among independent H2 samples and is
/// only informative when the rate is not tiny.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub n: usize,
    pub trials: usize,
    pub alpha: f64,
    pub type1_rate: f64,
    pub type2_rate: f64,
    pub log2_type2_rate: f64,
    pub type2_rate_direct: f64,
    /// `-log2(type2_rate) / n`.
    pub empirical_exponent: f64,
    /// `D(p1 W || p2 W)`.
    pub theoretical_exponent: f64,
    /// Log-likelihood-ratio threshold in bits.
    pub threshold: f64,
    /// Probability of rejecting H1 when the statistic equals the threshold.
    pub randomization: f64,
    /// The two output laws coincide.
    pub degenerate: bool,
    pub rng: String,
    pub seed: u64,
}

/// Symbol counts of `n` i.i.d. draws from `q`, via a chain of binomials.
fn sample_counts(q: &[f64], n: usize, rng: &mut ChaCha20Rng) -> Vec<u64> {
    let mut counts = vec![0; q.len()];
    let mut left = n as u64;
    let mut mass = 1.0;
    for (j, &qj) in q.iter().enumerate() {
        if left == 0 {
            break;
        }
        if j + 1 == q.len() {
            counts[j] = left;
            break;
        }
        let p = if mass > 0.0 { (qj / mass).clamp(0.0, 1.0) } else { 0.0 };
        let c = Binomial::new(left, p).expect("p in [0, 1]").sample(rng);
        counts[j] = c;
        left -= c;
        mass -= qj;
    }
    counts
}

/// `log2(prod_j (q1_j / q2_j)^c_j)`; letters impossible under `q2` give `+inf`.
fn llr(counts: &[u64], per_letter: &[f64]) -> f64 {
    counts
        .iter()
        .zip(per_letter)
        .filter(|(&c, _)| c > 0)
        .map(|(&c, &r)| c as f64 * r)
        .sum()
}

fn log2_sum_exp2(terms: impl Iterator<Item = f64>) -> f64 {
    let terms: Vec<f64> = terms.filter(|t| *t > f64::NEG_INFINITY).collect();
    let top = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if top == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    top + terms.iter().map(|t| (t - top).exp2()).sum::<f64>().log2()
}

/// Simulates `trials` tests on `n` samples of the mechanism output. The test
/// accepts H1 when the log-likelihood ratio exceeds the empirical
/// `alpha`-quantile of its H1 distribution and randomizes at the quantile so
/// the empirical type-I rate is exactly `alpha`.
///
/// Trial `t` draws its H1 sample from ChaCha20 stream `2t` and its H2 sample
/// from stream `2t + 1`.
pub fn simulate_test(
    p1: &Distribution,
    p2: &Distribution,
    w: &Mechanism,
    n: usize,
    trials: usize,
    alpha: f64,
    seed: u64,
) -> Result<SimulationReport> {
    if n == 0 || trials == 0 {
        return Err(Error::InvalidArgument("n and trials must be at least 1".into()));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidArgument(format!("alpha = {alpha} must lie in (0, 1)")));
    }
    let theoretical_exponent = utility(p1, p2, w)?;
    let q1 = pushforward(p1, w)?;
    let q2 = pushforward(p2, w)?;
    let per_letter: Vec<f64> = q1
        .probs()
        .iter()
        .zip(q2.probs())
        .map(|(&a, &b)| match (a > 0.0, b > 0.0) {
            (true, true) => (a / b).log2(),
            (true, false) => f64::INFINITY,
            (false, true) => f64::NEG_INFINITY,
            (false, false) => 0.0,
        })
        .collect();
    let degenerate = q1.probs() == q2.probs();

    let draw = |q: &Distribution, stream: u64| {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        llr(&sample_counts(q.probs(), n, &mut rng), &per_letter)
    };
    let (h1, h2): (Vec<f64>, Vec<f64>) = worker_pool()?.install(|| {
        (0..trials as u64)
            .into_par_iter()
            .map(|t| (draw(&q1, 2 * t), draw(&q2, 2 * t + 1)))
            .unzip()
    });

    let mut sorted = h1.clone();
    sorted.sort_by(f64::total_cmp);
    let k = ((alpha * trials as f64).floor() as usize).min(trials - 1);
    let threshold = sorted[k];
    let below = sorted.iter().filter(|&&v| v < threshold).count() as f64 / trials as f64;
    let at = sorted.iter().filter(|&&v| v == threshold).count() as f64 / trials as f64;
    let randomization = ((alpha - below) / at).clamp(0.0, 1.0);
    let type1_rate = below + randomization * at;

    let accept = |v: f64| {
        if v > threshold {
            1.0
        } else if v == threshold {
            1.0 - randomization
        } else {
            0.0
        }
    };
    // Under H1 a sample with statistic L has H2 likelihood 2^-L times its H1
    // likelihood.
    let log2_type2_rate = log2_sum_exp2(h1.iter().map(|&v| {
        let a = accept(v);
        if a > 0.0 && v.is_finite() {
            a.log2() - v
        } else {
            f64::NEG_INFINITY
        }
    })) - (trials as f64).log2();
    let type2_rate = log2_type2_rate.exp2().clamp(0.0, 1.0);
    let type2_rate_direct = h2.iter().map(|&v| accept(v)).sum::<f64>() / trials as f64;
    let empirical_exponent = if log2_type2_rate == f64::NEG_INFINITY {
        f64::INFINITY
    } else {
        (-log2_type2_rate / n as f64).max(0.0)
    };

    Ok(SimulationReport {
        n,
        trials,
        alpha,
        type1_rate,
        type2_rate,
        log2_type2_rate,
        type2_rate_direct,
        empirical_exponent,
        theoretical_exponent,
        threshold,
        randomization,
        degenerate,
        rng: RNG_NAME.into(),
        seed,
    })
}

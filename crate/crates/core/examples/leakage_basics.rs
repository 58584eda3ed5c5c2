//! Maximal leakage of a few mechanisms, including two 4x4 channels that leak
//! the same single bit in very different ways.

use leakage_put::leakage::{is_permutation_matrix, is_rank_one};
use leakage_put::{maximal_leakage, Distribution, Mechanism};

fn show(name: &str, w: &Mechanism) {
    println!(
        "{name:>10}: {:.6} bits  rank-1={} permutation={}",
        maximal_leakage(w),
        is_rank_one(w, 1e-9),
        is_permutation_matrix(w, 1e-9)
    );
}

fn main() -> leakage_put::Result<()> {
    // One output reveals input 0; the others blur inputs 1..3 completely.
    let reveal = Mechanism::new(vec![
        vec![1.0, 0.0, 0.0, 0.0],
        vec![0.0, 0.3, 0.3, 0.4],
        vec![0.0, 0.3, 0.3, 0.4],
        vec![0.0, 0.3, 0.3, 0.4],
    ])?;
    // Every output narrows the input down to a pair.
    let pairs = Mechanism::new(vec![
        vec![0.5, 0.5, 0.0, 0.0],
        vec![0.5, 0.5, 0.0, 0.0],
        vec![0.0, 0.0, 0.5, 0.5],
        vec![0.0, 0.0, 0.5, 0.5],
    ])?;
    show("reveal", &reveal);
    show("pairs", &pairs);
    show("identity", &Mechanism::identity(4));
    show("constant", &Mechanism::rank_one(&Distribution::new(vec![0.1, 0.2, 0.3, 0.4])?));
    Ok(())
}

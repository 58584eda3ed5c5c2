//! Compares every solver with an independent search.

use leakage_put::binary::{solve_binary, BinaryParams};
use leakage_put::eit::solve_eit;
use leakage_put::lp::{build_lp, solve_lp};
use leakage_put::oracle::{grid_oracle_binary, vertex_sample_oracle};
use leakage_put::{Distribution, LeakageBudget};

fn main() -> leakage_put::Result<()> {
    for l in [0.1, 0.5, 0.9] {
        let exact = solve_binary(&BinaryParams::new(0.3, 0.7, l)?)?;
        let grid = grid_oracle_binary(0.3, 0.7, l, 2001)?;
        println!(
            "binary l = {l}: closed form {:.9}, grid {:.9} ({} points)",
            exact.utility_bits, grid.best_utility, grid.evaluations
        );
    }

    let p1 = Distribution::new(vec![0.5, 0.3, 0.2])?;
    let p2 = Distribution::new(vec![0.2, 0.3, 0.5])?;
    let budget = LeakageBudget::new(1.2)?;
    let bound = vertex_sample_oracle(&p1, &p2, &budget, 5000, 1)?;
    let eit = solve_eit(&p1, &p2, &LeakageBudget::new(1.0)?)?;
    let lp = solve_lp(&build_lp(&p1, &p2, &budget, true)?)?;
    println!("M = 3, l = 1.2:");
    println!("  sampled vertices (lower bound) {:.6}", bound.best_utility);
    println!("  construction at l = 1          {:.6}", eit.utility_bits);
    println!("  forced linear program          {:.6}", lp.utility_bits);
    Ok(())
}

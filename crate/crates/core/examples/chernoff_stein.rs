//! Monte Carlo check that the type-II error decays at rate D(p1 W || p2 W).

use leakage_put::eit::solve_eit;
use leakage_put::oracle::simulate_test;
use leakage_put::{Distribution, LeakageBudget, Mechanism};

fn main() -> leakage_put::Result<()> {
    let p1 = Distribution::new(vec![0.3, 0.7])?;
    let p2 = Distribution::new(vec![0.7, 0.3])?;
    for n in [250, 500, 1000, 2000] {
        let r = simulate_test(&p1, &p2, &Mechanism::identity(2), n, 10_000, 0.1, 1)?;
        println!(
            "n = {n:>4}: type-I {:.3}, log2 type-II {:>9.2}, exponent {:.4} (theory {:.4})",
            r.type1_rate, r.log2_type2_rate, r.empirical_exponent, r.theoretical_exponent
        );
    }

    // A privatized channel pays in exponent.
    let q1 = Distribution::new(vec![0.5, 0.3, 0.2])?;
    let q2 = Distribution::new(vec![0.2, 0.3, 0.5])?;
    let w = solve_eit(&q1, &q2, &LeakageBudget::new(0.5)?)?.mechanism;
    for (name, w) in [("identity", Mechanism::identity(3)), ("l = 0.5", w)] {
        let r = simulate_test(&q1, &q2, &w, 1000, 10_000, 0.1, 2)?;
        println!("{name:>8}: exponent {:.4} (theory {:.4})", r.empirical_exponent, r.theoretical_exponent);
    }
    Ok(())
}

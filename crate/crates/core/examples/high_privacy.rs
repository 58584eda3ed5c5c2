//! Small leakage budgets (l <= 1) on a larger alphabet: the two-subset
//! construction, its quadratic value and the exact divergence it achieves.

use leakage_put::eit::{eit_objective, sign_partition, solve_eit, ReferenceRow};
use leakage_put::{Distribution, LeakageBudget};

fn main() -> leakage_put::Result<()> {
    let p1 = Distribution::new(vec![0.5, 0.3, 0.2])?;
    let p2 = Distribution::new(vec![0.2, 0.3, 0.5])?;
    let part = sign_partition(&p1, &p2)?;
    println!("p1 > p2 on {:?}, p1 <= p2 on {:?}", part.plus, part.minus);

    for l in [0.1, 0.25, 0.5, 0.75, 1.0] {
        let s = solve_eit(&p1, &p2, &LeakageBudget::new(l)?)?;
        let anchor = ReferenceRow::row_average(&p1, &p2, &s.mechanism, &part)?;
        println!(
            "l = {l:.2}: quadratic {:.6} (anchor check {:.6}), exact {:.6} bits, delta {:.3}",
            s.surrogate_value.unwrap_or(f64::NAN),
            eit_objective(&p1, &p2, &s.mechanism, &anchor)?,
            s.utility_bits,
            anchor.delta
        );
    }
    let s = solve_eit(&p1, &p2, &LeakageBudget::new(0.5)?)?;
    println!("mechanism at l = 0.5:");
    for row in s.mechanism.rows() {
        println!("  {row:.6?}");
    }
    Ok(())
}

//! Builds a tradeoff curve for a four-letter source and prints it as CSV:
//! the quadratic construction up to 1 bit, vertex sampling between 1 and
//! log2 3 bits, the linear program above.

use leakage_put::eit::solve_eit;
use leakage_put::lp::{build_lp, solve_lp};
use leakage_put::oracle::vertex_sample_oracle;
use leakage_put::{Distribution, LeakageBudget, TradeoffCurve};

fn main() -> leakage_put::Result<()> {
    let p1 = Distribution::new(vec![0.4, 0.3, 0.2, 0.1])?;
    let p2 = Distribution::new(vec![0.15, 0.25, 0.25, 0.35])?;
    let top = 2.0;
    let mut curve = TradeoffCurve::new();
    for k in 0..=16 {
        let l = top * k as f64 / 16.0;
        let budget = LeakageBudget::for_alphabet(l, 4)?;
        let s = if l <= 1.0 {
            solve_eit(&p1, &p2, &budget)?
        } else if l >= 3f64.log2() {
            solve_lp(&build_lp(&p1, &p2, &budget, false)?)?
        } else {
            vertex_sample_oracle(&p1, &p2, &budget, 500, 0)?.into_solution(&p1, &p2)?
        };
        curve.push_with_carry_forward(budget, s)?;
    }
    println!("l_bits,utility_bits,method");
    for p in curve.points() {
        println!("{:.6},{:.6},{:?}", p.budget.bits(), p.solution.utility_bits, p.solution.method);
    }
    Ok(())
}

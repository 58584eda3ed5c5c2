//! Large leakage budgets (l >= log2(M - 1)): the linear program around the
//! identity and the sparsity of its vertex solutions.

use leakage_put::lp::{build_lp, check_vertex_structure, psi_matrix, solve_lp};
use leakage_put::{kl_divergence, Distribution, LeakageBudget};

fn main() -> leakage_put::Result<()> {
    let p1 = Distribution::new(vec![0.4, 0.3, 0.2, 0.1])?;
    let p2 = Distribution::new(vec![0.15, 0.25, 0.25, 0.35])?;
    let psi = psi_matrix(&p1, &p2)?;
    println!("D(p1 || p2) = {:.6} bits", kl_divergence(&p1, &p2)?);
    for i in 0..psi.size() {
        println!("  psi row {i}: {:.4?}  diagonal gap {:.4}", psi.row(i), psi.diagonal_gap(i));
    }

    let (lo, hi) = (3f64.log2(), 4f64.log2());
    for k in 0..=4 {
        let l = lo + (hi - lo) * k as f64 / 4.0;
        let problem = build_lp(&p1, &p2, &LeakageBudget::new(l)?, false)?;
        let s = solve_lp(&problem)?;
        let r = check_vertex_structure(&s.mechanism, 1e-9);
        println!(
            "l = {l:.4}: linear {:.6}, exact {:.6}, zeros {}/{} needed, diagonal positive {}",
            s.surrogate_value.unwrap_or(f64::NAN),
            s.utility_bits,
            r.zero_entries,
            r.required_zeros,
            r.diagonal_positive
        );
    }
    Ok(())
}

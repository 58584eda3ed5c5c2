//! Exact privacy-utility tradeoff for a binary source.
//!
//! Run: `cargo run --example binary_tradeoff -- 0.3 0.7`

use leakage_put::binary::{f1, f2, solve_binary, BinaryParams};

fn main() -> leakage_put::Result<()> {
    let args: Vec<f64> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let (p1, p2) = match args[..] {
        [a, b, ..] => (a, b),
        _ => (0.3, 0.7),
    };
    println!("{:>5} {:>10} {:>10} {:>10}  mechanism", "l", "f1", "f2", "utility");
    for k in 0..=10 {
        let l = k as f64 / 10.0;
        let params = BinaryParams::new(p1, p2, l)?;
        let s = solve_binary(&params)?;
        println!(
            "{l:>5.2} {:>10.6} {:>10.6} {:>10.6}  {:?}",
            f1(&params),
            f2(&params),
            s.utility_bits,
            s.mechanism.to_rows()
        );
    }
    Ok(())
}

//! Acceptance suite. Runs every criterion at its stated tolerance and prints
//! one PASS/FAIL line each; exits non-zero if any criterion fails.
//!
//! Run with `cargo test --test acceptance`.

use std::time::{Duration, Instant};

use leakage_put::binary::{f1, f2, solve_binary, BinaryParams};
use leakage_put::eit::{eit_objective, eit_optimal_value, sign_partition, solve_eit, ReferenceRow};
use leakage_put::leakage::{is_permutation_matrix, is_rank_one};
use leakage_put::lp::{build_lp, check_vertex_structure, psi_matrix, solve_lp, trace_objective};
use leakage_put::oracle::{grid_oracle_binary, simulate_test, vertex_sample_oracle};
use leakage_put::{
    kl_divergence, maximal_leakage, utility, Distribution, LeakageBudget, Mechanism,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

type Criterion = (&'static str, fn() -> Outcome, Option<Duration>);

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome { passed, detail: detail.into() }
}

fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

/// Strictly positive point of the simplex.
fn random_distribution(rng: &mut ChaCha20Rng, m: usize) -> Distribution {
    let v: Vec<f64> = (0..m).map(|_| rng.random_range(0.05..1.0)).collect();
    let s: f64 = v.iter().sum();
    Distribution::new(v.into_iter().map(|x| x / s).collect()).unwrap()
}

fn random_pair(rng: &mut ChaCha20Rng, m: usize) -> (Distribution, Distribution) {
    loop {
        let (a, b) = (random_distribution(rng, m), random_distribution(rng, m));
        if a.l1_distance(&b).unwrap() > 1e-3 {
            return (a, b);
        }
    }
}

/// Row-stochastic matrix whose rows mix dense and sparse draws.
fn random_mechanism(rng: &mut ChaCha20Rng, m: usize) -> Mechanism {
    let rows = (0..m)
        .map(|_| {
            let mut r: Vec<f64> = (0..m)
                .map(|_| if rng.random_bool(0.3) { 0.0 } else { rng.random::<f64>() })
                .collect();
            if r.iter().all(|&x| x == 0.0) {
                r[rng.random_range(0..m)] = 1.0;
            }
            let s: f64 = r.iter().sum();
            r.into_iter().map(|x| x / s).collect()
        })
        .collect();
    Mechanism::from_rows_normalized(rows, 1e-12).unwrap()
}

fn binary_param(rng: &mut ChaCha20Rng) -> f64 {
    rng.random_range(1e-3..1.0 - 1e-3)
}

fn equal_leakage_matrices() -> (Mechanism, Mechanism) {
    let w1 = Mechanism::new(vec![
        vec![1.0, 0.0, 0.0, 0.0],
        vec![0.0, 0.3, 0.3, 0.4],
        vec![0.0, 0.3, 0.3, 0.4],
        vec![0.0, 0.3, 0.3, 0.4],
    ])
    .unwrap();
    let w2 = Mechanism::new(vec![
        vec![0.5, 0.5, 0.0, 0.0],
        vec![0.5, 0.5, 0.0, 0.0],
        vec![0.0, 0.0, 0.5, 0.5],
        vec![0.0, 0.0, 0.5, 0.5],
    ])
    .unwrap();
    (w1, w2)
}

fn criterion_1() -> Outcome {
    let (w1, w2) = equal_leakage_matrices();
    let (a, b) = (maximal_leakage(&w1), maximal_leakage(&w2));
    outcome((a - 1.0).abs() <= 1e-12 && (b - 1.0).abs() <= 1e-12, format!("L(W1) = {a}, L(W2) = {b}"))
}

fn criterion_2() -> Outcome {
    let mut rng = rng(2);
    let mut failures = Vec::new();
    for m in [2usize, 3, 4, 8] {
        let log_m = (m as f64).log2();
        let check_biconditionals = |w: &Mechanism, label: &str, failures: &mut Vec<String>| {
            let l = maximal_leakage(w);
            if !(0.0..=log_m).contains(&l) {
                failures.push(format!("M={m} {label}: leakage {l} outside [0, log2 M]"));
            }
            if (l <= 1e-9) != is_rank_one(w, 1e-9) {
                failures.push(format!("M={m} {label}: zero-leakage biconditional broken at {l}"));
            }
            if ((l - log_m).abs() <= 1e-9) != is_permutation_matrix(w, 1e-9) {
                failures.push(format!("M={m} {label}: full-leakage biconditional broken at {l}"));
            }
        };
        for _ in 0..1000 {
            let w = random_mechanism(&mut rng, m);
            check_biconditionals(&w, "random", &mut failures);

            let row = random_distribution(&mut rng, m);
            let r1 = Mechanism::rank_one(&row);
            check_biconditionals(&r1, "rank-1", &mut failures);
            if maximal_leakage(&r1) >= 1e-12 {
                failures.push(format!("M={m}: rank-1 leakage {}", maximal_leakage(&r1)));
            }

            let mut perm: Vec<usize> = (0..m).collect();
            perm.shuffle(&mut rng);
            let rows = perm
                .iter()
                .map(|&k| (0..m).map(|j| if j == k { 1.0 } else { 0.0 }).collect())
                .collect();
            let p = Mechanism::new(rows).unwrap();
            check_biconditionals(&p, "permutation", &mut failures);
            if maximal_leakage(&p) != log_m {
                failures.push(format!("M={m}: permutation leakage {} != log2 M", maximal_leakage(&p)));
            }
        }
    }
    let n = failures.len();
    outcome(n == 0, if n == 0 { "3000 matrices per M, all checks hold".into() } else { failures[..n.min(3)].join("; ") })
}

fn criterion_3() -> Outcome {
    let mut rng = rng(3);
    let mut worst_gap: f64 = 0.0;
    let mut worst_excess = f64::NEG_INFINITY;
    let mut pairs = 0;
    while pairs < 100 {
        let p1: f64 = rng.random_range(0.05..0.95);
        let p2 = rng.random_range(0.05..0.95);
        if (p1 - p2).abs() < 0.1 {
            continue;
        }
        pairs += 1;
        for l in [0.1, 0.25, 0.5, 0.75, 0.9] {
            let exact = solve_binary(&BinaryParams::new(p1, p2, l).unwrap()).unwrap().utility_bits;
            let grid = grid_oracle_binary(p1, p2, l, 2001).unwrap().best_utility;
            worst_gap = worst_gap.max((grid - exact).abs());
            worst_excess = worst_excess.max(grid - exact);
        }
    }
    outcome(
        worst_gap <= 1e-3 && worst_excess <= 1e-9,
        format!("max |grid - closed form| = {worst_gap:.3e}, max excess = {worst_excess:.3e}"),
    )
}

fn criterion_4() -> Outcome {
    let mut rng = rng(4);
    let (mut at_zero, mut at_one): (f64, f64) = (0.0, 0.0);
    for _ in 0..1000 {
        let (p1, p2) = (binary_param(&mut rng), binary_param(&mut rng));
        let zero = BinaryParams::new(p1, p2, 0.0).unwrap();
        at_zero = at_zero.max(f1(&zero).abs()).max(f2(&zero).abs());
        let one = BinaryParams::new(p1, p2, 1.0).unwrap();
        let (d1, d2) = one.distributions().unwrap();
        let d = kl_divergence(&d1, &d2).unwrap();
        at_one = at_one.max((f1(&one).max(f2(&one)) - d).abs());
    }
    outcome(
        at_zero == 0.0 && at_one <= 1e-12,
        format!("max |f| at l=0: {at_zero:.3e}; max |max(f1,f2) - D| at l=1: {at_one:.3e}"),
    )
}

fn criterion_5() -> Outcome {
    let mut rng = rng(5);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let (p1, p2, l) = (binary_param(&mut rng), binary_param(&mut rng), rng.random::<f64>());
        let a = f1(&BinaryParams::new(p1, p2, l).unwrap());
        let b = f2(&BinaryParams::new(1.0 - p1, 1.0 - p2, l).unwrap());
        worst = worst.max((a - b).abs());
    }
    outcome(worst <= 1e-12, format!("max |f1(p1,p2,l) - f2(1-p1,1-p2,l)| = {worst:.3e}"))
}

fn criterion_6() -> Outcome {
    let mut rng = rng(6);
    let mut failures = Vec::new();
    let (mut obj_err, mut leak_err): (f64, f64) = (0.0, 0.0);
    for k in 0..100 {
        let m = rng.random_range(3..=6);
        let (p1, p2) = random_pair(&mut rng, m);
        for l in [0.1, 0.5, 1.0] {
            let budget = LeakageBudget::new(l).unwrap();
            let s = solve_eit(&p1, &p2, &budget).unwrap();
            let w = &s.mechanism;
            let part = sign_partition(&p1, &p2).unwrap();
            let anchor = ReferenceRow::row_average(&p1, &p2, w, &part).unwrap();
            let obj = eit_objective(&p1, &p2, w, &anchor).unwrap();
            obj_err = obj_err.max((obj - eit_optimal_value(&p1, &p2, &budget).unwrap()).abs());
            leak_err = leak_err.max((maximal_leakage(w) - l).abs());

            let mut distinct: Vec<&[f64]> = Vec::new();
            for r in w.rows() {
                if !distinct.contains(&r) {
                    distinct.push(r);
                }
            }
            if distinct.len() != 2 {
                failures.push(format!("instance {k} l={l}: {} distinct rows", distinct.len()));
            }
            if (0..m).any(|i| w.get(i, 0) > 0.0 && w.get(i, 1) > 0.0) {
                failures.push(format!("instance {k} l={l}: first two columns overlap"));
            }
        }
    }
    let passed = failures.is_empty() && obj_err <= 1e-12 && leak_err <= 1e-12;
    let mut detail = format!("max objective error {obj_err:.3e}, max leakage error {leak_err:.3e}");
    if let Some(f) = failures.first() {
        detail += &format!("; {f}");
    }
    outcome(passed, detail)
}

fn criterion_7() -> Outcome {
    let mut rng = rng(7);
    let mut worst_dominance = f64::NEG_INFINITY;
    let mut min_ratio = f64::INFINITY;
    let mut worst_fd: f64 = 0.0;
    for k in 0..1000 {
        let m = rng.random_range(2..=8);
        let (p1, p2) = random_pair(&mut rng, m);
        let psi = psi_matrix(&p1, &p2).unwrap();
        for i in 0..m {
            for j in 0..m {
                worst_dominance = worst_dominance.max(psi.get(i, j) - psi.get(i, i));
            }
        }
        if k % 10 != 0 {
            continue;
        }
        // Move from the identity towards a random mechanism V.
        let v = random_mechanism(&mut rng, m);
        let d = kl_divergence(&p1, &p2).unwrap();
        let point = |t: f64| {
            let rows = (0..m)
                .map(|i| (0..m).map(|j| (1.0 - t) * if i == j { 1.0 } else { 0.0 } + t * v.get(i, j)).collect())
                .collect();
            Mechanism::from_rows_normalized(rows, 1e-12).unwrap()
        };
        let slope = trace_objective(&psi, &v).unwrap() - d;
        let residual = |t: f64| (utility(&p1, &p2, &point(t)).unwrap() - (d + t * slope)).abs();
        let fd = (utility(&p1, &p2, &point(1e-5)).unwrap() - d) / 1e-5;
        worst_fd = worst_fd.max((fd - slope).abs() / slope.abs().max(1e-3));
        let (r1, r2) = (residual(1e-3), residual(1e-4));
        if r2 > 0.0 {
            min_ratio = min_ratio.min(r1 / r2);
        }
    }
    outcome(
        worst_dominance <= 1e-12 && min_ratio >= 8.0 && worst_fd <= 1e-3,
        format!(
            "max off-diagonal excess {worst_dominance:.3e}; min residual ratio {min_ratio:.1}; \
             max relative finite-difference error {worst_fd:.3e}"
        ),
    )
}

fn criterion_8() -> Outcome {
    let mut rng = rng(8);
    let mut identity_fail = Vec::new();
    let (mut structure_ok, mut total) = (0, 0);
    let mut first_failure = None;
    for m in [3usize, 4, 5] {
        for _ in 0..20 {
            let (p1, p2) = random_pair(&mut rng, m);
            let d = kl_divergence(&p1, &p2).unwrap();

            let full = LeakageBudget::new((m as f64).log2()).unwrap();
            let s = solve_lp(&build_lp(&p1, &p2, &full, false).unwrap()).unwrap();
            let lin = s.surrogate_value.unwrap();
            if !is_permutation_matrix(&s.mechanism, 1e-9) || (lin - d).abs() > 1e-9 {
                identity_fail.push(format!("M={m}: linear value {lin} vs D {d}"));
            }

            let edge = LeakageBudget::new(((m - 1) as f64).log2()).unwrap();
            let s = solve_lp(&build_lp(&p1, &p2, &edge, false).unwrap()).unwrap();
            let report = check_vertex_structure(&s.mechanism, 1e-9);
            total += 1;
            if report.passes() {
                structure_ok += 1;
            } else if first_failure.is_none() {
                first_failure = Some(format!("M={m}: {report:?}"));
            }
        }
    }
    let passed = identity_fail.is_empty() && structure_ok == total;
    let mut detail = format!(
        "l = log2 M: {}/{} identity checks; l = log2(M-1): {structure_ok}/{total} vertex solutions pass the structure check",
        60 - identity_fail.len(),
        60
    );
    if let Some(f) = identity_fail.first().or(first_failure.as_ref()) {
        detail += &format!("; first failure {f}");
    }
    outcome(passed, detail)
}

fn criterion_9() -> Outcome {
    let p1 = Distribution::new(vec![0.3, 0.7]).unwrap();
    let p2 = Distribution::new(vec![0.7, 0.3]).unwrap();
    let r = simulate_test(&p1, &p2, &Mechanism::identity(2), 2000, 10_000, 0.1, 20_240_901).unwrap();
    let d = kl_divergence(&p1, &p2).unwrap();
    let rel = (r.empirical_exponent - d).abs() / d;
    outcome(
        rel <= 0.10,
        format!(
            "empirical {:.5} vs D = {d:.5} bits ({:.1}% off); type-I rate {}",
            r.empirical_exponent,
            100.0 * rel,
            r.type1_rate
        ),
    )
}

fn criterion_10() -> Outcome {
    let mut rng = rng(10);
    let mut failures = Vec::new();
    let mut worst_binary: f64 = 0.0;
    for _ in 0..5 {
        let (a, b) = (rng.random_range(0.05..0.95), rng.random_range(0.05..0.95));
        let l = rng.random_range(0.05..0.95);
        let (p1, p2) = (Distribution::bernoulli(a).unwrap(), Distribution::bernoulli(b).unwrap());
        let r = vertex_sample_oracle(&p1, &p2, &LeakageBudget::new(l).unwrap(), 1000, 1).unwrap();
        let exact = solve_binary(&BinaryParams::new(a, b, l).unwrap()).unwrap().utility_bits;
        worst_binary = worst_binary.max((r.best_utility - exact).abs());
    }
    if worst_binary > 1e-9 {
        failures.push(format!("M=2 gap {worst_binary:.3e}"));
    }
    let budget = LeakageBudget::new(1.2).unwrap();
    let mut min_margin = f64::INFINITY;
    for k in 0..5 {
        let (p1, p2) = random_pair(&mut rng, 3);
        let bound = vertex_sample_oracle(&p1, &p2, &budget, 10_000, 2).unwrap().best_utility;
        let eit = solve_eit(&p1, &p2, &LeakageBudget::new(1.0).unwrap()).unwrap().utility_bits;
        let lp = solve_lp(&build_lp(&p1, &p2, &budget, true).unwrap()).unwrap().utility_bits;
        let margin = (bound - eit).min(bound - lp);
        min_margin = min_margin.min(margin);
        if margin < 0.0 {
            failures.push(format!("instance {k}: bound {bound} < eit {eit} or lp {lp}"));
        }
    }
    outcome(
        failures.is_empty(),
        format!(
            "M=2 max gap {worst_binary:.3e}; M=3 l=1.2 min (bound - construction) {min_margin:.3e}{}",
            failures.first().map(|f| format!("; {f}")).unwrap_or_default()
        ),
    )
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("1  leakage of the two 4x4 example matrices", criterion_1, None),
        ("2  leakage bounds and extremal cases", criterion_2, Some(Duration::from_secs(5))),
        ("3  binary closed form vs grid oracle", criterion_3, Some(Duration::from_secs(60))),
        ("4  binary endpoints", criterion_4, None),
        ("5  binary swap symmetry", criterion_5, None),
        ("6  high-privacy construction", criterion_6, Some(Duration::from_secs(5))),
        ("7  linearization matrix", criterion_7, Some(Duration::from_secs(10))),
        ("8  high-utility linear program", criterion_8, Some(Duration::from_secs(10))),
        ("9  Chernoff-Stein simulation", criterion_9, Some(Duration::from_secs(120))),
        ("10 oracle brackets", criterion_10, None),
    ];
    let mut failed = 0;
    for (name, run, limit) in criteria {
        let start = Instant::now();
        let mut o = run();
        let elapsed = start.elapsed();
        if let Some(limit) = limit {
            if elapsed > limit {
                o.passed = false;
                o.detail += &format!("; runtime {elapsed:.1?} over {limit:?}");
            }
        }
        if !o.passed {
            failed += 1;
        }
        println!(
            "{} criterion {name} [{elapsed:.2?}]: {}",
            if o.passed { "PASS" } else { "FAIL" },
            o.detail
        );
    }
    println!("acceptance: {} passed, {failed} failed", 10 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}

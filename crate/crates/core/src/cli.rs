//! The `leakage-put` command line.
//!
//! Distributions are JSON arrays (a bare number `p` is the two-letter law
//! `[1 - p, p]`); mechanisms are `{"rows": [[...], ...]}` or a bare array of
//! rows. Either can be given inline or as `@path`. Scalars are printed with
//! 12 significant digits, mechanism entries losslessly.
//!
//! Exit codes: 0 success, 2 input or domain error, 3 solver limit, 4
//! internal consistency failure.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::binary::{solve_binary, BinaryParams};
use crate::eit::solve_eit;
use crate::error::Error;
use crate::leakage::{is_permutation_matrix, is_rank_one, maximal_leakage, EQUIVALENCE_TOL};
use crate::lp::{build_lp, regime_threshold, solve_lp};
use crate::model::{
    is_feasible, Distribution, LeakageBudget, Mechanism, PutSolution, TradeoffCurve,
    DEFAULT_FEASIBILITY_TOL,
};
use crate::oracle::{grid_oracle_binary, simulate_test, vertex_sample_oracle};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_SOLVER_LIMIT: i32 = 3;
pub const EXIT_CONSISTENCY: i32 = 4;

const DEFAULT_RESOLUTION: usize = 2001;
const DEFAULT_SAMPLES: usize = 1000;

#[derive(Debug, Parser)]
#[command(name = "leakage-put", version, about = "Leakage-constrained mechanisms for hypothesis testing")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Maximal leakage of a mechanism.
    Leakage(LeakageArgs),
    /// Best mechanism for one leakage budget.
    Solve(SolveArgs),
    /// Tradeoff curve over a range of budgets, as CSV.
    Sweep(SweepArgs),
    /// Monte Carlo run of the likelihood-ratio test through a mechanism.
    Simulate(SimulateArgs),
    /// Brute-force (M = 2) or vertex-sampling (M >= 3) search.
    Oracle(OracleArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Auto,
    Binary,
    Eit,
    Lp,
    Oracle,
}

#[derive(Debug, Args)]
struct Hypotheses {
    /// Null hypothesis: JSON array, bare Bernoulli parameter, or @path.
    #[arg(long, allow_hyphen_values = true)]
    p1: String,
    /// Alternative hypothesis, same formats as --p1.
    #[arg(long, allow_hyphen_values = true)]
    p2: String,
}

#[derive(Debug, Args)]
struct SearchArgs {
    /// Grid resolution for the binary oracle.
    #[arg(long)]
    resolution: Option<usize>,
    /// Random objectives for the vertex-sampling oracle.
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Run the linear program below its regime.
    #[arg(long)]
    force_regime: bool,
}

#[derive(Debug, Args)]
struct LeakageArgs {
    /// Mechanism JSON or @path.
    #[arg(long)]
    mechanism: String,
    /// Row-sum tolerance when parsing the mechanism.
    #[arg(long, default_value_t = DEFAULT_FEASIBILITY_TOL)]
    tol: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SolveArgs {
    #[command(flatten)]
    hyp: Hypotheses,
    /// Leakage budget in bits.
    #[arg(long, allow_hyphen_values = true)]
    l: f64,
    #[arg(long, value_enum, default_value_t = MethodArg::Auto)]
    method: MethodArg,
    #[command(flatten)]
    search: SearchArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    hyp: Hypotheses,
    #[arg(long, allow_hyphen_values = true)]
    l_min: f64,
    #[arg(long, allow_hyphen_values = true)]
    l_max: f64,
    #[arg(long, default_value_t = 11)]
    steps: usize,
    #[arg(long, value_enum, default_value_t = MethodArg::Auto)]
    method: MethodArg,
    #[command(flatten)]
    search: SearchArgs,
    /// CSV destination; mechanisms go to `<out>.mechanisms.json`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[command(flatten)]
    hyp: Hypotheses,
    /// Mechanism JSON or @path; otherwise solved from --method and --l.
    #[arg(long)]
    mechanism: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    l: Option<f64>,
    #[arg(long, value_enum, default_value_t = MethodArg::Auto)]
    method: MethodArg,
    #[command(flatten)]
    search: SearchArgs,
    #[arg(long, default_value_t = 2000)]
    n: usize,
    #[arg(long, default_value_t = 10_000)]
    trials: usize,
    #[arg(long, default_value_t = 0.1)]
    alpha: f64,
    #[arg(long, default_value_t = DEFAULT_FEASIBILITY_TOL)]
    tol: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct OracleArgs {
    #[command(flatten)]
    hyp: Hypotheses,
    #[arg(long, allow_hyphen_values = true)]
    l: f64,
    #[command(flatten)]
    search: SearchArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// A failure with its exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn input(message: impl Into<String>) -> Self {
        Self { code: EXIT_INPUT, message: message.into() }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::IterationLimitExceeded(_) | Error::Infeasible | Error::Unbounded => EXIT_SOLVER_LIMIT,
            Error::Consistency(_) => EXIT_CONSISTENCY,
            _ => EXIT_INPUT,
        };
        Self { code, message: e.to_string() }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(stderr, "{text}");
                EXIT_INPUT
            } else {
                let _ = write!(stdout, "{text}");
                EXIT_OK
            };
        }
    };
    match execute(cli.command, stdout, stderr) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: {}", e.message);
            e.code
        }
    }
}

fn execute(command: Command, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CliResult<()> {
    match command {
        Command::Leakage(a) => cmd_leakage(a, stdout),
        Command::Solve(a) => cmd_solve(a, stdout, stderr),
        Command::Sweep(a) => cmd_sweep(a, stdout, stderr),
        Command::Simulate(a) => cmd_simulate(a, stdout, stderr),
        Command::Oracle(a) => cmd_oracle(a, stdout),
    }
}

fn read_source(arg: &str) -> CliResult<String> {
    match arg.strip_prefix('@') {
        Some(path) => std::fs::read_to_string(path).map_err(|e| CliError::input(format!("{path}: {e}"))),
        None => Ok(arg.to_string()),
    }
}

fn parse_json(arg: &str) -> CliResult<Value> {
    let text = read_source(arg)?;
    serde_json::from_str(&text).map_err(|e| CliError::input(format!("malformed JSON: {e}")))
}

fn parse_distribution(arg: &str) -> CliResult<Distribution> {
    match parse_json(arg)? {
        Value::Number(p) => Ok(Distribution::bernoulli(p.as_f64().unwrap_or(f64::NAN))?),
        v @ Value::Array(_) => {
            let probs: Vec<f64> = serde_json::from_value(v)
                .map_err(|e| CliError::input(format!("distribution must be numbers: {e}")))?;
            Ok(Distribution::new(probs)?)
        }
        _ => Err(CliError::input("distribution must be a JSON array or a number")),
    }
}

fn parse_mechanism(arg: &str, tol: f64) -> CliResult<Mechanism> {
    let v = parse_json(arg)?;
    let rows = match v {
        Value::Object(mut o) => o.remove("rows").ok_or_else(|| CliError::input("mechanism object needs \"rows\""))?,
        v => v,
    };
    let rows: Vec<Vec<f64>> = serde_json::from_value(rows)
        .map_err(|e| CliError::input(format!("mechanism rows must be arrays of numbers: {e}")))?;
    Ok(Mechanism::from_rows_normalized(rows, tol)?)
}

fn hypotheses(h: &Hypotheses) -> CliResult<(Distribution, Distribution)> {
    let p1 = parse_distribution(&h.p1)?;
    let p2 = parse_distribution(&h.p2)?;
    if p1.len() != p2.len() {
        return Err(Error::DimensionMismatch { expected: p1.len(), actual: p2.len() }.into());
    }
    Ok((p1, p2))
}

/// Rounds to 12 significant digits.
pub fn round12(x: f64) -> f64 {
    if !x.is_finite() {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

fn fmt12(x: f64) -> String {
    round12(x).to_string()
}

const LOSSLESS_KEYS: [&str; 3] = ["mechanism", "best_mechanism", "alternatives"];

fn round_scalars(v: &mut Value) {
    match v {
        Value::Number(n) => {
            if let Some(x) = n.as_f64().filter(|_| n.is_f64()) {
                *v = json!(round12(x));
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_scalars),
        Value::Object(map) => {
            for (k, item) in map.iter_mut() {
                if !LOSSLESS_KEYS.contains(&k.as_str()) {
                    round_scalars(item);
                }
            }
        }
        _ => {}
    }
}

fn open_output<'a>(out: &Option<PathBuf>, stdout: &'a mut dyn Write) -> CliResult<Box<dyn Write + 'a>> {
    match out {
        Some(path) => {
            let f = File::create(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
            Ok(Box::new(BufWriter::new(f)))
        }
        None => Ok(Box::new(stdout)),
    }
}

fn io_err(e: io::Error) -> CliError {
    CliError::input(format!("write failed: {e}"))
}

fn emit_json<T: Serialize>(value: &T, out: &Option<PathBuf>, stdout: &mut dyn Write) -> CliResult<()> {
    let mut v = serde_json::to_value(value).map_err(|e| CliError::input(e.to_string()))?;
    round_scalars(&mut v);
    let mut w = open_output(out, stdout)?;
    let text = serde_json::to_string_pretty(&v).map_err(|e| CliError::input(e.to_string()))?;
    writeln!(w, "{text}").map_err(io_err)?;
    w.flush().map_err(io_err)
}

fn cmd_leakage(a: LeakageArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let w = parse_mechanism(&a.mechanism, a.tol)?;
    let report = json!({
        "leakage_bits": maximal_leakage(&w),
        "is_rank_one": is_rank_one(&w, EQUIVALENCE_TOL),
        "is_permutation": is_permutation_matrix(&w, EQUIVALENCE_TOL),
    });
    emit_json(&report, &a.out, stdout)
}

/// Solves one budget, resolving `auto`. Returns the solution and, when auto
/// fell back to sampling, a notice for stderr.
fn solve_point(
    p1: &Distribution,
    p2: &Distribution,
    l: f64,
    method: MethodArg,
    search: &SearchArgs,
) -> CliResult<(PutSolution, Option<String>)> {
    let m = p1.len();
    let budget = LeakageBudget::for_alphabet(l, m)?;
    let mut notice = None;
    let method = match method {
        MethodArg::Auto if m == 2 => MethodArg::Binary,
        MethodArg::Auto if budget.bits() <= 1.0 => MethodArg::Eit,
        MethodArg::Auto if budget.bits() >= regime_threshold(m) - 1e-12 => MethodArg::Lp,
        MethodArg::Auto => {
            notice = Some(format!(
                "l = {} lies between 1 and log2(M-1) = {}; no closed form is available, \
                 reporting the vertex-sampling lower bound",
                budget.bits(),
                regime_threshold(m)
            ));
            MethodArg::Oracle
        }
        other => other,
    };
    let solution = match method {
        MethodArg::Binary => {
            if m != 2 {
                return Err(CliError::input(format!("binary method needs M = 2, got M = {m}")));
            }
            solve_binary(&BinaryParams::new(p1.probs()[1], p2.probs()[1], budget.bits())?)?
        }
        MethodArg::Eit => solve_eit(p1, p2, &budget)?,
        MethodArg::Lp => solve_lp(&build_lp(p1, p2, &budget, search.force_regime)?)?,
        MethodArg::Oracle if m == 2 && search.samples.is_none() => {
            let res = search.resolution.unwrap_or(DEFAULT_RESOLUTION);
            grid_oracle_binary(p1.probs()[1], p2.probs()[1], budget.bits(), res)?.into_solution(p1, p2)?
        }
        MethodArg::Oracle => {
            let samples = search.samples.unwrap_or(DEFAULT_SAMPLES);
            vertex_sample_oracle(p1, p2, &budget, samples, search.seed)?.into_solution(p1, p2)?
        }
        MethodArg::Auto => unreachable!("auto resolved above"),
    };
    check_solution(p1, p2, &budget, &solution)?;
    Ok((solution, notice))
}

/// Recomputes utility and leakage before anything is printed.
fn check_solution(p1: &Distribution, p2: &Distribution, budget: &LeakageBudget, s: &PutSolution) -> CliResult<()> {
    s.revalidate(p1, p2)?;
    if !is_feasible(&s.mechanism, budget, DEFAULT_FEASIBILITY_TOL) {
        return Err(Error::Consistency(format!(
            "mechanism leaks {} bits, over the {} bit budget",
            s.leakage_bits,
            budget.bits()
        ))
        .into());
    }
    Ok(())
}

fn cmd_solve(a: SolveArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CliResult<()> {
    let (p1, p2) = hypotheses(&a.hyp)?;
    let (solution, notice) = solve_point(&p1, &p2, a.l, a.method, &a.search)?;
    if let Some(n) = notice {
        let _ = writeln!(stderr, "notice: {n}");
    }
    emit_json(&solution, &a.out, stdout)
}

/// Sidecar path for sweep mechanisms.
pub fn sidecar_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".mechanisms.json");
    PathBuf::from(s)
}

#[derive(Serialize)]
struct SidecarEntry<'a> {
    id: usize,
    l_bits: f64,
    method: crate::model::Method,
    mechanism: &'a Mechanism,
}

fn sweep_budgets(l_min: f64, l_max: f64, steps: usize) -> CliResult<Vec<f64>> {
    if steps == 0 {
        return Err(CliError::input("steps must be at least 1"));
    }
    if l_min.is_nan() || l_max.is_nan() || l_min > l_max || (steps > 1 && l_min == l_max) {
        return Err(CliError::input(format!("need l_min < l_max, got {l_min} and {l_max}")));
    }
    if steps == 1 {
        return Ok(vec![l_min]);
    }
    let h = (l_max - l_min) / (steps - 1) as f64;
    Ok((0..steps).map(|k| if k + 1 == steps { l_max } else { l_min + k as f64 * h }).collect())
}

fn cmd_sweep(a: SweepArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CliResult<()> {
    let (p1, p2) = hypotheses(&a.hyp)?;
    let budgets = sweep_budgets(a.l_min, a.l_max, a.steps)?;
    let mut w = open_output(&a.out, stdout)?;
    writeln!(w, "l_bits,utility_bits,surrogate_value,mechanism_id").map_err(io_err)?;

    let mut curve = TradeoffCurve::new();
    let mut ids: Vec<usize> = Vec::new();
    let mut notified = false;
    let mut failure = None;
    for &l in &budgets {
        let point = solve_point(&p1, &p2, l, a.method, &a.search).and_then(|(s, notice)| {
            let budget = LeakageBudget::for_alphabet(l, p1.len())?;
            let carried = curve.push_with_carry_forward(budget, s)?;
            Ok((carried, notice))
        });
        let (carried, notice) = match point {
            Ok(p) => p,
            Err(e) => {
                failure = Some(e);
                break;
            }
        };
        if let (Some(n), false) = (notice, notified) {
            let _ = writeln!(stderr, "notice: {n}");
            notified = true;
        }
        let last = curve.points().last().expect("just pushed");
        let id = match last.carried_from {
            Some(src) => ids[src],
            None => ids.iter().max().map_or(0, |m| m + 1),
        };
        if carried {
            let _ = writeln!(stderr, "notice: l = {l} reuses the mechanism of an earlier budget");
        }
        ids.push(id);
        let surrogate = last.solution.surrogate_value.map(fmt12).unwrap_or_default();
        writeln!(w, "{},{},{},{}", fmt12(l), fmt12(last.solution.utility_bits), surrogate, id)
            .map_err(io_err)?;
    }
    w.flush().map_err(io_err)?;
    drop(w);

    match &a.out {
        Some(out) => {
            let entries: Vec<SidecarEntry> = curve
                .points()
                .iter()
                .zip(&ids)
                .filter(|(p, _)| p.carried_from.is_none())
                .map(|(p, &id)| SidecarEntry {
                    id,
                    l_bits: round12(p.budget.bits()),
                    method: p.solution.method,
                    mechanism: &p.solution.mechanism,
                })
                .collect();
            let text = serde_json::to_string_pretty(&entries).map_err(|e| CliError::input(e.to_string()))?;
            let path = sidecar_path(out);
            std::fs::write(&path, text + "\n").map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
        }
        None => {
            let _ = writeln!(stderr, "notice: no --out given; mechanism sidecar not written");
        }
    }
    failure.map_or(Ok(()), Err)
}

fn cmd_simulate(a: SimulateArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CliResult<()> {
    let (p1, p2) = hypotheses(&a.hyp)?;
    let w = match (&a.mechanism, a.l) {
        (Some(m), _) => parse_mechanism(m, a.tol)?,
        (None, Some(l)) => {
            let (s, notice) = solve_point(&p1, &p2, l, a.method, &a.search)?;
            if let Some(n) = notice {
                let _ = writeln!(stderr, "notice: {n}");
            }
            s.mechanism
        }
        (None, None) => return Err(CliError::input("simulate needs --mechanism or --l")),
    };
    if w.size() != p1.len() {
        return Err(Error::DimensionMismatch { expected: p1.len(), actual: w.size() }.into());
    }
    let report = simulate_test(&p1, &p2, &w, a.n, a.trials, a.alpha, a.search.seed)?;
    emit_json(&report, &a.out, stdout)
}

fn cmd_oracle(a: OracleArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let (p1, p2) = hypotheses(&a.hyp)?;
    let budget = LeakageBudget::for_alphabet(a.l, p1.len())?;
    let report = if p1.len() == 2 && a.search.samples.is_none() {
        let res = a.search.resolution.unwrap_or(DEFAULT_RESOLUTION);
        grid_oracle_binary(p1.probs()[1], p2.probs()[1], budget.bits(), res)?
    } else {
        let samples = a.search.samples.unwrap_or(DEFAULT_SAMPLES);
        vertex_sample_oracle(&p1, &p2, &budget, samples, a.search.seed)?
    };
    if !is_feasible(&report.best_mechanism, &budget, DEFAULT_FEASIBILITY_TOL) {
        return Err(Error::Consistency("oracle returned an infeasible mechanism".into()).into());
    }
    emit_json(&report, &a.out, stdout)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_capture(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let argv = std::iter::once("leakage-put").chain(args.iter().copied());
        let code = run(argv, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn rounding_keeps_twelve_digits() {
        assert_eq!(round12(0.48902811478830195), 0.489028114788);
        assert_eq!(round12(1.0), 1.0);
        assert_eq!(fmt12(2f64.sqrt()), "1.41421356237");
    }

    #[test]
    fn sweep_grid() {
        assert_eq!(sweep_budgets(0.0, 1.0, 3).unwrap(), vec![0.0, 0.5, 1.0]);
        assert_eq!(sweep_budgets(0.3, 0.3, 1).unwrap(), vec![0.3]);
        assert!(sweep_budgets(0.3, 0.3, 2).is_err());
        assert!(sweep_budgets(1.0, 0.0, 2).is_err());
        assert!(sweep_budgets(0.0, 1.0, 0).is_err());
    }

    #[test]
    fn bare_number_is_bernoulli() {
        assert_eq!(parse_distribution("0.3").unwrap().probs(), &[0.7, 0.3]);
        assert!(parse_distribution("[0.5, 0.4]").is_err());
        assert!(parse_distribution("\"x\"").is_err());
    }

    #[test]
    fn mechanism_forms() {
        let a = parse_mechanism("{\"rows\": [[1, 0], [0, 1]]}", 1e-9).unwrap();
        let b = parse_mechanism("[[1, 0], [0, 1]]", 1e-9).unwrap();
        assert_eq!(a, b);
        let e = parse_mechanism("[[1, 0], [0.5, 0.47]]", 1e-9).unwrap_err();
        assert_eq!(e.code, EXIT_INPUT);
        assert!(e.message.contains("row 2 sums to 0.97"), "{}", e.message);
    }

    #[test]
    fn error_codes() {
        assert_eq!(CliError::from(Error::IterationLimitExceeded(3)).code, EXIT_SOLVER_LIMIT);
        assert_eq!(CliError::from(Error::Consistency("x".into())).code, EXIT_CONSISTENCY);
        assert_eq!(CliError::from(Error::Domain("x".into())).code, EXIT_INPUT);
    }

    #[test]
    fn help_and_bad_flags() {
        assert_eq!(run_capture(&["--help"]).0, EXIT_OK);
        assert_eq!(run_capture(&["solve", "--bogus"]).0, EXIT_INPUT);
    }

    #[test]
    fn auto_mid_regime_prints_notice() {
        let (code, out, err) = run_capture(&[
            "solve", "--p1", "[0.4,0.3,0.2,0.1]", "--p2", "[0.1,0.2,0.3,0.4]", "--l", "1.3", "--samples", "20",
        ]);
        assert_eq!(code, EXIT_OK, "{err}");
        assert!(err.contains("lower bound"));
        assert!(out.contains("oracle_vertex_sample"));
    }
}

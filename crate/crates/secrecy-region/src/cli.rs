//! Command-line surface: JSON problem files in, rates, covariance files,
//! and region bundles out.
//!
//! Exit codes: 0 success, 2 unreadable or malformed input files and flags,
//! 3 solver non-convergence, 4 structurally infeasible configuration
//! (dimension mismatches, invalid weights or order or power, too many
//! users, no protected directions).

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use serde_json::json;

use crate::baselines::zf_project;
use crate::channel::{
    secrecy_rates, ChannelSet, CovarianceSet, EncodingOrder, PowerConstraint, RateTuple, Side,
    WeightVector,
};
use crate::error::Error;
use crate::numerics::{self, HermitianMatrix};
use crate::ordering::{enumerate_orders, optimal_order};
use crate::region::{delta_family_sweep, sweep_weights, RegionSweep};
use crate::solver::{solve_wsr, InitMode, SolverConfig, SolverResult};

/// Weighted rates this close to the best count as tied in order reports.
const ORDER_TIE_TOL: f64 = 1e-4;

#[derive(Parser)]
#[command(
    name = "secrecy-region",
    version,
    about = "Transmit covariance design and secrecy rate regions for multi-receiver Gaussian MIMO wiretap channels"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Evaluate per-user secrecy rates for stored covariances.
    Rates(RatesArgs),
    /// Maximize the weighted sum rate and emit the covariances.
    Solve(SolveArgs),
    /// Sweep weight vectors and emit rate-region data.
    Region(RegionArgs),
    /// Compare every encoding order against the descending-weight rule.
    OrderCheck(OrderCheckArgs),
}

#[derive(Args)]
struct RatesArgs {
    /// Problem file (channels, power).
    problem: PathBuf,
    /// Covariance file, typically the output of `solve`.
    covariances: PathBuf,
    /// Encoding order: `auto` or a one-based comma list like `2,1`.
    #[arg(long)]
    order: Option<String>,
    /// Weights for the reported weighted sum, `0.5 0.5` or `1/3 1/3 1/3`.
    #[arg(long, num_args = 1.., value_name = "W")]
    weights: Vec<String>,
    /// Also print the rates in bits.
    #[arg(long)]
    bits: bool,
}

#[derive(Args)]
struct SolveArgs {
    /// Problem file (channels, power, optional weights and order).
    problem: PathBuf,
    /// Weights, `0.5 0.5` or `1/3 1/3 1/3`; default from the file or uniform.
    #[arg(long, num_args = 1.., value_name = "W")]
    weights: Vec<String>,
    /// Encoding order: `auto` (descending weights) or a one-based comma list.
    #[arg(long)]
    order: Option<String>,
    /// Power budget override.
    #[arg(long)]
    power: Option<f64>,
    /// Bisection bracket-width stop.
    #[arg(long)]
    eps1: Option<f64>,
    /// Block-sweep rate-change stop.
    #[arg(long)]
    eps2: Option<f64>,
    /// Covariance initialization at each price probe.
    #[arg(long, value_enum)]
    init: Option<InitArg>,
    /// Write the result JSON here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RegionArgs {
    /// Problem file (channels, power, optional delta list).
    problem: PathBuf,
    /// Weight grid step, interpreted as 1/n with n = round(1/step).
    #[arg(long, default_value_t = 0.01)]
    grid_step: f64,
    /// Comma list of reference sweeps to add: `zf`, `bc`, or `zf,bc`.
    #[arg(long)]
    baselines: Option<String>,
    /// Power budget override.
    #[arg(long)]
    power: Option<f64>,
    /// Bisection bracket-width stop.
    #[arg(long)]
    eps1: Option<f64>,
    /// Block-sweep rate-change stop.
    #[arg(long)]
    eps2: Option<f64>,
    /// Covariance initialization at each price probe.
    #[arg(long, value_enum)]
    init: Option<InitArg>,
    /// Output prefix: writes `<out>.csv` and `<out>.json` per sweep.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct OrderCheckArgs {
    /// Problem file (channels, power, optional weights).
    problem: PathBuf,
    /// Weights, `0.15 0.2 0.65`; default from the file or uniform.
    #[arg(long, num_args = 1.., value_name = "W")]
    weights: Vec<String>,
    /// Power budget override.
    #[arg(long)]
    power: Option<f64>,
    /// Bisection bracket-width stop.
    #[arg(long)]
    eps1: Option<f64>,
    /// Block-sweep rate-change stop.
    #[arg(long)]
    eps2: Option<f64>,
    /// Covariance initialization at each price probe.
    #[arg(long, value_enum)]
    init: Option<InitArg>,
}

#[derive(ValueEnum, Clone, Copy)]
enum InitArg {
    Uniform,
    Zero,
}

impl From<InitArg> for InitMode {
    fn from(a: InitArg) -> Self {
        match a {
            InitArg::Uniform => InitMode::Uniform,
            InitArg::Zero => InitMode::Zero,
        }
    }
}

/// A command failure carrying its exit code.
#[derive(Debug)]
enum Failure {
    Parse(String),
    Run(Error),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Parse(_) => 2,
            Failure::Run(e) => match e {
                Error::BoundsExhausted { .. }
                | Error::SubproblemDivergence { .. }
                | Error::ConvergenceFailure(_)
                | Error::NoConvergedSamples => 3,
                _ => 4,
            },
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Parse(m) => m.clone(),
            Failure::Run(e) => e.to_string(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Run(e)
    }
}

type CmdResult<T> = std::result::Result<T, Failure>;

/// Parses the process arguments, runs the selected command, and returns
/// the process exit code.
pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let outcome = match cli.cmd {
        Cmd::Rates(a) => cmd_rates(&a),
        Cmd::Solve(a) => cmd_solve(&a),
        Cmd::Region(a) => cmd_region(&a),
        Cmd::OrderCheck(a) => cmd_order_check(&a),
    };
    match outcome {
        Ok(()) => 0,
        Err(f) => {
            eprintln!("error: {}", f.message());
            f.code()
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ProblemFile {
    schema_version: u32,
    channels: ChannelsFile,
    power: f64,
    #[serde(default)]
    weights: Option<Vec<f64>>,
    #[serde(default)]
    order: Option<Vec<usize>>,
    #[serde(default)]
    solver: Option<SolverFile>,
    #[serde(default)]
    deltas: Option<Vec<f64>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ChannelsFile {
    users: Vec<Vec<Vec<[f64; 2]>>>,
    eavesdropper: Vec<Vec<[f64; 2]>>,
}

#[derive(Debug, Deserialize, Default, Clone)]
#[serde(deny_unknown_fields)]
struct SolverFile {
    lambda_min: Option<f64>,
    lambda_max: Option<f64>,
    eps1: Option<f64>,
    eps2: Option<f64>,
    max_outer: Option<usize>,
    max_inner: Option<usize>,
    max_subproblem_iters: Option<usize>,
    init: Option<String>,
}

/// Covariance input: either a bare covariance list or a full solve output,
/// whose extra fields are ignored.
#[derive(Deserialize)]
struct CovarianceFile {
    covariances: Vec<Vec<Vec<[f64; 2]>>>,
    #[serde(default)]
    order: Option<Vec<usize>>,
}

/// A loaded problem: validated channels plus the raw optional fields the
/// commands resolve against their flags.
#[derive(Debug)]
struct Problem {
    ch: ChannelSet,
    power: f64,
    weights: Option<Vec<f64>>,
    order: Option<Vec<usize>>,
    solver: SolverFile,
    deltas: Option<Vec<f64>>,
}

fn parse_failure(path: &Path, what: impl std::fmt::Display) -> Failure {
    Failure::Parse(format!("{}: {what}", path.display()))
}

fn load_problem(path: &Path) -> CmdResult<Problem> {
    let text = fs::read_to_string(path).map_err(|e| parse_failure(path, e))?;
    let file: ProblemFile =
        serde_json::from_str(&text).map_err(|e| parse_failure(path, e))?;
    if file.schema_version != 1 {
        return Err(parse_failure(
            path,
            format!("unsupported schema_version {}", file.schema_version),
        ));
    }
    let users = file
        .channels
        .users
        .iter()
        .map(|m| numerics::from_pairs(m))
        .collect::<crate::error::Result<Vec<_>>>()
        .map_err(|e| parse_failure(path, e))?;
    let g = numerics::from_pairs(&file.channels.eavesdropper)
        .map_err(|e| parse_failure(path, e))?;
    let ch = ChannelSet::new(users, g).map_err(|e| parse_failure(path, e))?;
    Ok(Problem {
        ch,
        power: file.power,
        weights: file.weights,
        order: file.order,
        solver: file.solver.unwrap_or_default(),
        deltas: file.deltas,
    })
}

fn load_covariances(path: &Path) -> CmdResult<(CovarianceSet, Option<Vec<usize>>)> {
    let text = fs::read_to_string(path).map_err(|e| parse_failure(path, e))?;
    let file: CovarianceFile =
        serde_json::from_str(&text).map_err(|e| parse_failure(path, e))?;
    let mats = file
        .covariances
        .iter()
        .map(|m| HermitianMatrix::new(numerics::from_pairs(m)?))
        .collect::<crate::error::Result<Vec<_>>>()
        .map_err(Failure::Run)?;
    let q = CovarianceSet::new(Side::Broadcast, mats).map_err(Failure::Run)?;
    Ok((q, file.order))
}

/// Accepts plain decimals and `a/b` fractions, so thirds stay exact.
fn parse_weight_token(tok: &str) -> CmdResult<f64> {
    let bad = || Failure::Parse(format!("invalid weight {tok:?}"));
    if let Some((num, den)) = tok.split_once('/') {
        let n: f64 = num.trim().parse().map_err(|_| bad())?;
        let d: f64 = den.trim().parse().map_err(|_| bad())?;
        if d == 0.0 {
            return Err(bad());
        }
        Ok(n / d)
    } else {
        tok.trim().parse().map_err(|_| bad())
    }
}

/// Flag weights win over file weights; the fallback is uniform. The bool
/// reports whether weights were given anywhere.
fn resolve_weights(
    flag: &[String],
    file: &Option<Vec<f64>>,
    k: usize,
) -> CmdResult<(WeightVector, bool)> {
    if !flag.is_empty() {
        let vals = flag.iter().map(|t| parse_weight_token(t)).collect::<CmdResult<Vec<_>>>()?;
        return Ok((WeightVector::new(vals).map_err(Failure::Run)?, true));
    }
    if let Some(vals) = file {
        return Ok((WeightVector::new(vals.clone()).map_err(Failure::Run)?, true));
    }
    Ok((WeightVector::uniform(k), false))
}

/// Flag order wins over the stored order; `auto` and the fallback apply
/// the descending-weight rule.
fn resolve_order(
    flag: Option<&str>,
    file: &Option<Vec<usize>>,
    w: &WeightVector,
) -> CmdResult<EncodingOrder> {
    match flag {
        Some("auto") => Ok(optimal_order(w)),
        Some(list) => {
            let labels = list
                .split(',')
                .map(|t| {
                    t.trim()
                        .parse::<usize>()
                        .map_err(|_| Failure::Parse(format!("invalid order entry {t:?}")))
                })
                .collect::<CmdResult<Vec<_>>>()?;
            EncodingOrder::from_one_based(&labels).map_err(Failure::Run)
        }
        None => match file {
            Some(labels) => EncodingOrder::from_one_based(labels).map_err(Failure::Run),
            None => Ok(optimal_order(w)),
        },
    }
}

fn resolve_power(flag: Option<f64>, file: f64) -> CmdResult<PowerConstraint> {
    PowerConstraint::new(flag.unwrap_or(file)).map_err(Failure::Run)
}

fn resolve_config(
    file: &SolverFile,
    eps1: Option<f64>,
    eps2: Option<f64>,
    init: Option<InitArg>,
) -> CmdResult<SolverConfig> {
    let mut cfg = SolverConfig::default();
    if let Some(v) = file.lambda_min {
        cfg.lambda_min = v;
    }
    if let Some(v) = file.lambda_max {
        cfg.lambda_max = v;
    }
    if let Some(v) = file.eps1 {
        cfg.eps1 = v;
    }
    if let Some(v) = file.eps2 {
        cfg.eps2 = v;
    }
    if let Some(v) = file.max_outer {
        cfg.max_outer = v;
    }
    if let Some(v) = file.max_inner {
        cfg.max_inner = v;
    }
    if let Some(v) = file.max_subproblem_iters {
        cfg.max_subproblem_iters = v;
    }
    match file.init.as_deref() {
        None => {}
        Some("uniform") => cfg.init_mode = InitMode::Uniform,
        Some("zero") => cfg.init_mode = InitMode::Zero,
        Some(other) => {
            return Err(Failure::Parse(format!(
                "solver init must be \"uniform\" or \"zero\", got {other:?}"
            )))
        }
    }
    if let Some(v) = eps1 {
        cfg.eps1 = v;
    }
    if let Some(v) = eps2 {
        cfg.eps2 = v;
    }
    if let Some(v) = init {
        cfg.init_mode = v.into();
    }
    cfg.validate().map_err(Failure::Run)?;
    Ok(cfg)
}

fn format_rates(r: &RateTuple) -> String {
    r.as_slice().iter().map(|v| format!("{v:.9}")).collect::<Vec<_>>().join(" ")
}

fn result_to_json(res: &SolverResult, order: &EncodingOrder) -> serde_json::Value {
    let d = &res.diagnostics;
    json!({
        "schema_version": 1,
        "order": order.one_based(),
        "rates": res.rates.as_slice(),
        "wsr": res.wsr,
        "lambda": res.lambda_star,
        "power": res.power_used,
        "converged": res.converged,
        "hermitian_violation": res.covariances.hermitian_violation(),
        "covariances": res.covariances.matrices().iter()
            .map(|m| numerics::to_pairs(m.matrix()))
            .collect::<Vec<_>>(),
        "diagnostics": {
            "outer_iterations": d.outer_iterations,
            "total_sweeps": d.total_sweeps,
            "final_sweeps": d.final_sweeps,
            "max_wsr_decrease": d.max_wsr_decrease,
            "max_lagrangian_decrease": d.max_lagrangian_decrease,
            "kkt_residual": d.kkt_residual,
            "inner_cap_hit": d.inner_cap_hit,
            "power_slack": d.power_slack,
            "lambda_bracket": [d.lambda_bracket.0, d.lambda_bracket.1],
        },
    })
}

fn write_text(path: &Path, text: &str) -> CmdResult<()> {
    fs::write(path, text).map_err(|e| parse_failure(path, e))?;
    println!("wrote {}", path.display());
    Ok(())
}

fn cmd_rates(args: &RatesArgs) -> CmdResult<()> {
    let prob = load_problem(&args.problem)?;
    let (q, stored_order) = load_covariances(&args.covariances)?;
    let (w, weighted) = resolve_weights(&args.weights, &prob.weights, prob.ch.num_users())?;
    let order = match (args.order.as_deref(), &stored_order) {
        (None, Some(labels)) => EncodingOrder::from_one_based(labels).map_err(Failure::Run)?,
        (flag, _) => resolve_order(flag, &prob.order, &w)?,
    };
    let rates = secrecy_rates(&prob.ch, &q, &order).map_err(Failure::Run)?;
    println!("order: {order}");
    println!("rates (nats): {}", format_rates(&rates));
    if args.bits {
        let bits = rates.to_bits().iter().map(|v| format!("{v:.9}")).collect::<Vec<_>>().join(" ");
        println!("rates (bits): {bits}");
    }
    if weighted {
        println!("wsr (nats): {:.9}", rates.weighted(&w));
    }
    Ok(())
}

fn cmd_solve(args: &SolveArgs) -> CmdResult<()> {
    let prob = load_problem(&args.problem)?;
    let (w, _) = resolve_weights(&args.weights, &prob.weights, prob.ch.num_users())?;
    let order = resolve_order(args.order.as_deref(), &prob.order, &w)?;
    let p = resolve_power(args.power, prob.power)?;
    let cfg = resolve_config(&prob.solver, args.eps1, args.eps2, args.init)?;
    let res = solve_wsr(&prob.ch, &w, &order, p, &cfg).map_err(Failure::Run)?;
    let doc = serde_json::to_string_pretty(&result_to_json(&res, &order)).unwrap();
    match &args.out {
        Some(path) => {
            write_text(path, &doc)?;
            println!("order: {order}");
            println!("rates (nats): {}", format_rates(&res.rates));
            println!(
                "wsr: {:.6}  lambda: {:.6}  power: {:.6}  converged: {}",
                res.wsr, res.lambda_star, res.power_used, res.converged
            );
        }
        None => println!("{doc}"),
    }
    if !res.converged {
        let d = &res.diagnostics;
        return Err(Failure::Run(Error::ConvergenceFailure(format!(
            "block sweeps did not settle: kkt residual {:.3e}, sweep cap hit {}, bracket ({:.6}, {:.6})",
            d.kkt_residual, d.inner_cap_hit, d.lambda_bracket.0, d.lambda_bracket.1
        ))));
    }
    Ok(())
}

/// Zero-forcing region: sweep over the protected directions, then expand
/// the stored covariances so they apply to the original channels.
fn zf_sweep(
    ch: &ChannelSet,
    p: PowerConstraint,
    cfg: &SolverConfig,
    grid_step: f64,
) -> crate::error::Result<RegionSweep> {
    let projected = zf_project(ch)?;
    let mut sweep = sweep_weights(projected.channels(), p, cfg, grid_step)?;
    for s in &mut sweep.samples {
        s.covariances = projected.lift(&s.covariances)?;
    }
    Ok(sweep)
}

fn parse_baselines(flag: &Option<String>) -> CmdResult<(bool, bool)> {
    let mut zf = false;
    let mut bc = false;
    if let Some(list) = flag {
        for tok in list.split(',') {
            match tok.trim() {
                "zf" => zf = true,
                "bc" => bc = true,
                other => {
                    return Err(Failure::Parse(format!(
                        "unknown baseline {other:?}, expected zf or bc"
                    )))
                }
            }
        }
    }
    Ok((zf, bc))
}

fn cmd_region(args: &RegionArgs) -> CmdResult<()> {
    let prob = load_problem(&args.problem)?;
    let p = resolve_power(args.power, prob.power)?;
    let cfg = resolve_config(&prob.solver, args.eps1, args.eps2, args.init)?;
    let (want_zf, want_bc) = parse_baselines(&args.baselines)?;

    // Everything is computed before any file is written.
    let mut sweeps: Vec<(String, RegionSweep)> = Vec::new();
    match &prob.deltas {
        Some(deltas) => {
            let family = delta_family_sweep(&prob.ch, deltas, p, &cfg, args.grid_step)
                .map_err(Failure::Run)?;
            for (d, sweep) in deltas.iter().zip(family) {
                sweeps.push((format!("_delta_{d}"), sweep));
            }
        }
        None => {
            let sweep =
                sweep_weights(&prob.ch, p, &cfg, args.grid_step).map_err(Failure::Run)?;
            sweeps.push((String::new(), sweep));
        }
    }
    if want_zf {
        let sweep = zf_sweep(&prob.ch, p, &cfg, args.grid_step).map_err(Failure::Run)?;
        sweeps.push(("_zf".into(), sweep));
    }
    if want_bc {
        let sweep = sweep_weights(&prob.ch.without_eavesdropper(), p, &cfg, args.grid_step)
            .map_err(Failure::Run)?;
        sweeps.push(("_bc".into(), sweep));
    }

    match &args.out {
        Some(prefix) => {
            for (suffix, sweep) in &sweeps {
                let base = format!("{}{suffix}", prefix.display());
                write_text(Path::new(&format!("{base}.csv")), &sweep.to_csv())?;
                let doc = serde_json::to_string_pretty(&sweep.to_json()).unwrap();
                write_text(Path::new(&format!("{base}.json")), &doc)?;
            }
        }
        None => {
            let mut out = String::new();
            for (suffix, sweep) in &sweeps {
                if !suffix.is_empty() {
                    let _ = writeln!(out, "# sweep{suffix}");
                }
                out.push_str(&sweep.to_csv());
            }
            print!("{out}");
        }
    }
    Ok(())
}

fn cmd_order_check(args: &OrderCheckArgs) -> CmdResult<()> {
    let prob = load_problem(&args.problem)?;
    let (w, _) = resolve_weights(&args.weights, &prob.weights, prob.ch.num_users())?;
    let p = resolve_power(args.power, prob.power)?;
    let cfg = resolve_config(&prob.solver, args.eps1, args.eps2, args.init)?;
    let report = enumerate_orders(&prob.ch, &w, p, &cfg).map_err(Failure::Run)?;
    println!("{:<12} {:<12} converged", "order", "wsr");
    for entry in &report.entries {
        println!("{:<12} {:<12.6} {}", entry.order.to_string(), entry.wsr, entry.converged);
    }
    let best = report.best();
    let rule = report.rule();
    println!("best order: {} (wsr {:.6})", best.order, best.wsr);
    println!(
        "rule order: {} (wsr {:.6}, gap {:.2e})",
        rule.order, rule.wsr, report.rule_gap
    );
    let tied = report
        .entries
        .iter()
        .filter(|e| (best.wsr - e.wsr).abs() <= ORDER_TIE_TOL)
        .count();
    if tied > 1 {
        println!("tie: {tied} orders within {ORDER_TIE_TOL:.0e} of the best");
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn problem_json() -> String {
        json!({
            "schema_version": 1,
            "channels": {
                "users": [
                    [[[1.0, 0.0], [-0.5, 0.0]], [[0.5, 0.0], [2.0, 0.0]]],
                    [[[-0.3, 0.0], [1.0, 0.0]], [[2.0, 0.0], [-0.4, 0.0]]],
                ],
                "eavesdropper": [[[0.8, 0.0], [-1.6, 0.0]]],
            },
            "power": 1.0,
        })
        .to_string()
    }

    fn write_temp(name: &str, text: &str) -> PathBuf {
        let path = std::env::temp_dir().join(format!("secrecy-region-cli-{name}-{}", std::process::id()));
        fs::write(&path, text).unwrap();
        path
    }

    #[test]
    fn weight_tokens_accept_fractions() {
        assert_eq!(parse_weight_token("0.25").unwrap(), 0.25);
        assert!((parse_weight_token("1/3").unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!(parse_weight_token("1/0").is_err());
        assert!(parse_weight_token("abc").is_err());
    }

    #[test]
    fn orders_resolve_by_priority() {
        let w = WeightVector::new(vec![0.3, 0.7]).unwrap();
        let stored = Some(vec![1usize, 2]);
        let auto = resolve_order(Some("auto"), &stored, &w).unwrap();
        assert_eq!(auto.one_based(), vec![2, 1]);
        let flagged = resolve_order(Some("1,2"), &stored, &w).unwrap();
        assert_eq!(flagged.one_based(), vec![1, 2]);
        let from_file = resolve_order(None, &stored, &w).unwrap();
        assert_eq!(from_file.one_based(), vec![1, 2]);
        let fallback = resolve_order(None, &None, &w).unwrap();
        assert_eq!(fallback.one_based(), vec![2, 1]);
        assert!(resolve_order(Some("1,x"), &None, &w).is_err());
    }

    #[test]
    fn problem_files_parse_and_validate() {
        let path = write_temp("ok", &problem_json());
        let prob = load_problem(&path).unwrap();
        assert_eq!(prob.ch.num_users(), 2);
        assert_eq!(prob.ch.n_t(), 2);
        assert_eq!(prob.power, 1.0);
        fs::remove_file(&path).unwrap();

        let bad_version = problem_json().replace("\"schema_version\":1", "\"schema_version\":9");
        let path = write_temp("version", &bad_version);
        assert_eq!(load_problem(&path).unwrap_err().code(), 2);
        fs::remove_file(&path).unwrap();

        let path = write_temp("syntax", "{ not json");
        assert_eq!(load_problem(&path).unwrap_err().code(), 2);
        fs::remove_file(&path).unwrap();
    }

    #[test]
    fn exit_codes_map_by_failure_class() {
        assert_eq!(Failure::Parse("x".into()).code(), 2);
        let nc = Failure::Run(Error::BoundsExhausted { lambda_max: 1.0, power: 2.0 });
        assert_eq!(nc.code(), 3);
        assert_eq!(Failure::Run(Error::NoConvergedSamples).code(), 3);
        assert_eq!(Failure::Run(Error::EmptyNullSpace).code(), 4);
        assert_eq!(
            Failure::Run(Error::TooManyUsers { count: 9, max: 5 }).code(),
            4
        );
        assert_eq!(Failure::Run(Error::InvalidInput("w".into())).code(), 4);
    }

    #[test]
    fn solver_overrides_layer_in_order() {
        let file = SolverFile {
            eps1: Some(1e-4),
            eps2: Some(1e-4),
            init: Some("zero".into()),
            ..SolverFile::default()
        };
        let cfg = resolve_config(&file, Some(1e-3), None, None).unwrap();
        assert_eq!(cfg.eps1, 1e-3);
        assert_eq!(cfg.eps2, 1e-4);
        assert!(matches!(cfg.init_mode, InitMode::Zero));
        let bad = SolverFile { init: Some("warm".into()), ..SolverFile::default() };
        assert_eq!(resolve_config(&bad, None, None, None).unwrap_err().code(), 2);
    }
}

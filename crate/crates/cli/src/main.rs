//! `khier`: build and evaluate key hierarchies from the command line.
//!
//! Exit codes: 0 success, 1 usage, 2 unreadable or malformed input,
//! 3 infeasible request or validation failure.

use std::fs;
use std::io::Write as _;
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_rational::Ratio;

use khier::bench::{ratio_sweep, solve, to_csv, Algorithm, Baseline, RatioSweep, SolveParams};
use khier::exact::BruteForceConfig;
use khier::instances::{
    gen_3dmatching, gen_3partition, gen_random, parse_hierarchy_for, parse_instance, write_hierarchy, write_instance,
    GenKind, GenSpec, Reduction, ThreeDMatchingSpec, ThreePartitionSpec,
};
use khier::model::{eval_cost_total, Instance};
use khier::{Error, Exec};

#[derive(Parser, Debug)]
#[command(name = "khier", version, about = "Key hierarchies for secure multicast")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build a hierarchy for an instance and print its cost.
    Solve(SolveArgs),
    /// Print the cost breakdown of a hierarchy.
    Eval(EvalArgs),
    /// Write a generated instance.
    Generate(GenerateArgs),
    /// Run a ratio sweep and print CSV.
    Ratio(RatioArgs),
}

#[derive(Args, Debug)]
struct Tuning {
    /// Accuracy parameter, as a decimal or a fraction.
    #[arg(long, default_value = "1/2", value_parser = parse_ratio)]
    eps: Ratio<u64>,
    /// Shallow-light trade-off for graph networks.
    #[arg(long, default_value = "7", value_parser = parse_ratio)]
    gamma: Ratio<u64>,
    /// Score every subset with multicast cost 1.
    #[arg(long)]
    uniform_oracle: bool,
    /// Run on one thread.
    #[arg(long)]
    sequential: bool,
}

impl Tuning {
    fn params(&self) -> SolveParams {
        SolveParams {
            epsilon: self.eps,
            gamma: self.gamma,
            brute_force: BruteForceConfig::from_env(),
            exec: if self.sequential { Exec::Sequential } else { Exec::Parallel },
            uniform_oracle: self.uniform_oracle,
        }
    }
}

#[derive(Args, Debug)]
struct SolveArgs {
    #[arg(long, value_parser = parse_alg)]
    alg: Algorithm,
    #[arg(long)]
    instance: PathBuf,
    /// Hierarchy destination; printed to standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    tuning: Tuning,
}

#[derive(Args, Debug)]
struct EvalArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long)]
    hierarchy: PathBuf,
    #[arg(long)]
    uniform_oracle: bool,
}

#[derive(Args, Debug)]
struct GenerateArgs {
    /// random-tree, random-graph, 3partition or 3dmatching.
    #[arg(long)]
    kind: String,
    #[arg(long, default_value_t = 5)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 10)]
    max_weight: u64,
    #[arg(long, default_value_t = 10)]
    max_edge_cost: u64,
    #[arg(long, default_value = "1/2", value_parser = parse_ratio)]
    extra_edge_factor: Ratio<u64>,
    /// Element sizes for 3partition, comma separated.
    #[arg(long, value_delimiter = ',')]
    sizes: Vec<u64>,
    /// Triple sum for 3partition.
    #[arg(long)]
    bound: Option<u64>,
    /// Weight added to every size for 3partition.
    #[arg(long)]
    base_weight: Option<u64>,
    /// Controller edge cost for the reductions.
    #[arg(long)]
    root_cost: Option<u64>,
    /// Element count per set for 3dmatching.
    #[arg(long)]
    q: Option<usize>,
    /// Triples `w:u:v` for 3dmatching, comma separated.
    #[arg(long, value_delimiter = ',', value_parser = parse_triple)]
    triples: Vec<(usize, usize, usize)>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct RatioArgs {
    #[arg(long, value_parser = parse_alg)]
    alg: Algorithm,
    #[arg(long, default_value = "random-tree", value_parser = parse_kind)]
    kind: GenKind,
    /// Inclusive member-count range such as `3..7`.
    #[arg(long, default_value = "2..6", value_parser = parse_range)]
    n_range: RangeInclusive<usize>,
    #[arg(long, default_value_t = 10)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "brute-opt", value_parser = parse_baseline)]
    baseline: Baseline,
    #[arg(long, default_value_t = 10)]
    max_weight: u64,
    #[arg(long, default_value_t = 10)]
    max_edge_cost: u64,
    /// Shorthand for `--max-weight 1`.
    #[arg(long)]
    unit_weights: bool,
    #[command(flatten)]
    tuning: Tuning,
}

fn parse_alg(s: &str) -> Result<Algorithm, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_kind(s: &str) -> Result<GenKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_baseline(s: &str) -> Result<Baseline, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// `a/b`, an integer, or a decimal like `0.25`.
fn parse_ratio(s: &str) -> Result<Ratio<u64>, String> {
    let bad = || format!("`{s}` is not a non-negative fraction or decimal");
    if let Some((n, d)) = s.split_once('/') {
        let n: u64 = n.trim().parse().map_err(|_| bad())?;
        let d: u64 = d.trim().parse().map_err(|_| bad())?;
        if d == 0 {
            return Err(bad());
        }
        return Ok(Ratio::new(n, d));
    }
    let (int, frac) = s.split_once('.').unwrap_or((s, ""));
    if frac.len() > 18 || (int.is_empty() && frac.is_empty()) {
        return Err(bad());
    }
    let digits = |t: &str| t.is_empty() || t.bytes().all(|b| b.is_ascii_digit());
    if !digits(int) || !digits(frac) {
        return Err(bad());
    }
    let scale = 10u64.pow(frac.len() as u32);
    let int: u64 = if int.is_empty() { 0 } else { int.parse().map_err(|_| bad())? };
    let frac: u64 = if frac.is_empty() { 0 } else { frac.parse().map_err(|_| bad())? };
    let numer = int.checked_mul(scale).and_then(|v| v.checked_add(frac)).ok_or_else(bad)?;
    Ok(Ratio::new(numer, scale))
}

fn parse_range(s: &str) -> Result<RangeInclusive<usize>, String> {
    let bad = || format!("`{s}` is not a range like 3..7");
    let (a, b) = s.split_once("..").ok_or_else(bad)?;
    let b = b.strip_prefix('=').unwrap_or(b);
    let a: usize = a.parse().map_err(|_| bad())?;
    let b: usize = b.parse().map_err(|_| bad())?;
    if a > b {
        return Err(bad());
    }
    Ok(a..=b)
}

fn parse_triple(s: &str) -> Result<(usize, usize, usize), String> {
    let parts: Vec<&str> = s.split(':').collect();
    let bad = || format!("`{s}` is not a triple like 1:2:3");
    let [a, b, c] = parts[..] else { return Err(bad()) };
    Ok((a.parse().map_err(|_| bad())?, b.parse().map_err(|_| bad())?, c.parse().map_err(|_| bad())?))
}

/// A failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: 1,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Parse(_) => 2,
            Error::InvalidParams(_) => 1,
            _ => 3,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

/// Parameters that parsed but describe an impossible request.
fn infeasible(e: Error) -> Failure {
    match e {
        Error::InvalidParams(message) => Failure { code: 3, message },
        other => Failure::from(other),
    }
}

type CliResult<T = ()> = Result<T, Failure>;

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| Failure {
        code: 2,
        message: format!("{}: {e}", path.display()),
    })
}

fn load_instance(path: &Path) -> CliResult<Instance> {
    let text = read(path)?;
    parse_instance(&text).map_err(|e| {
        let mut f = Failure::from(e);
        f.message = format!("{}: {}", path.display(), f.message);
        f
    })
}

fn write_out(path: &Path, text: &str) -> CliResult {
    fs::write(path, text).map_err(|e| Failure {
        code: 3,
        message: format!("{}: {e}", path.display()),
    })
}

fn emit(out: &mut impl std::io::Write, text: &str) -> CliResult {
    out.write_all(text.as_bytes()).map_err(|e| Failure {
        code: 3,
        message: format!("writing output: {e}"),
    })
}

fn cmd_solve(args: &SolveArgs) -> CliResult<String> {
    let instance = load_instance(&args.instance)?;
    let solution = solve(&instance, args.alg, &args.tuning.params())?;
    let text = write_hierarchy(&solution.hierarchy)?;
    let mut out = String::new();
    match &args.out {
        Some(path) => write_out(path, &text)?,
        None => out.push_str(&text),
    }
    out.push_str(&format!("cost {}\n", solution.cost));
    Ok(out)
}

fn cmd_eval(args: &EvalArgs) -> CliResult<String> {
    let instance = load_instance(&args.instance)?;
    let text = read(&args.hierarchy)?;
    let hierarchy = parse_hierarchy_for(&text, &instance).map_err(|e| {
        let mut f = Failure::from(e);
        f.message = format!("{}: {}", args.hierarchy.display(), f.message);
        f
    })?;
    let params = SolveParams {
        uniform_oracle: args.uniform_oracle,
        ..SolveParams::default()
    };
    let oracle = params.oracle(&instance)?;
    let breakdown = eval_cost_total(&hierarchy, instance.weights(), &oracle)?;
    let mut out = format!("total {}\n", breakdown.total);
    for (m, c) in &breakdown.per_member {
        out.push_str(&format!("member {m} {c}\n"));
    }
    Ok(out)
}

fn cmd_generate(args: &GenerateArgs) -> CliResult<String> {
    let reduction = match args.kind.as_str() {
        "random-tree" | "random-graph" => {
            let spec = GenSpec {
                max_weight: args.max_weight,
                max_edge_cost: args.max_edge_cost,
                extra_edge_factor: args.extra_edge_factor,
                ..GenSpec::new(args.kind.parse()?, args.n, args.seed)
            };
            Reduction {
                instance: gen_random(&spec)?,
                warnings: Vec::new(),
            }
        }
        "3partition" => {
            let need = |v: Option<u64>, flag: &str| v.ok_or_else(|| Failure::usage(format!("3partition needs --{flag}")));
            gen_3partition(&ThreePartitionSpec {
                sizes: args.sizes.clone(),
                bound: need(args.bound, "bound")?,
                base_weight: need(args.base_weight, "base-weight")?,
                root_cost: need(args.root_cost, "root-cost")?,
            })
            .map_err(infeasible)?
        }
        "3dmatching" => gen_3dmatching(&ThreeDMatchingSpec {
            q: args.q.ok_or_else(|| Failure::usage("3dmatching needs --q"))?,
            triples: args.triples.clone(),
            root_cost: args.root_cost.ok_or_else(|| Failure::usage("3dmatching needs --root-cost"))?,
        })
        .map_err(infeasible)?,
        other => return Err(Failure::usage(format!("unknown kind `{other}`"))),
    };
    for w in &reduction.warnings {
        eprintln!("warning: {w}");
    }
    let text = write_instance(&reduction.instance);
    match &args.out {
        Some(path) => {
            write_out(path, &text)?;
            Ok(String::new())
        }
        None => Ok(text),
    }
}

fn cmd_ratio(args: &RatioArgs) -> CliResult<String> {
    let sweep = RatioSweep {
        baseline: args.baseline,
        max_weight: if args.unit_weights { 1 } else { args.max_weight },
        max_edge_cost: args.max_edge_cost,
        params: args.tuning.params(),
        ..RatioSweep::new(args.alg, args.kind, args.n_range.clone(), args.trials, args.seed)
    };
    let records = ratio_sweep(&sweep).map_err(infeasible)?;
    Ok(to_csv(&records))
}

fn run(cli: &Cli) -> CliResult<String> {
    match &cli.command {
        Command::Solve(a) => cmd_solve(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Generate(a) => cmd_generate(a),
        Command::Ratio(a) => cmd_ratio(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(text) => match emit(&mut std::io::stdout().lock(), &text) {
            Ok(()) => ExitCode::SUCCESS,
            Err(f) => {
                eprintln!("khier: {}", f.message);
                ExitCode::from(f.code)
            }
        },
        Err(f) => {
            eprintln!("khier: {}", f.message);
            let _ = std::io::stderr().flush();
            ExitCode::from(f.code)
        }
    }
}

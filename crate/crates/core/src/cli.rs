//! Command-line front end: `generate`, `compose` and `experiment`.
//!
//! Exit codes: 0 success, 1 other failure, 2 bad configuration or input,
//! 3 no feasible composition, 4 experiment failure rate above threshold.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::assessment::AgrVariant;
use crate::composer::{compose, Algorithm, ComposeConfig, DEFAULT_CAP, DEFAULT_K};
use crate::error::{Error, Result};
use crate::io;
use crate::model::{validate_query, EnergyQuery, PreferenceStrategy, QueryRecord};
use crate::reliability::{apply_profiles, build_profiles, DEFAULT_BINS};
use crate::simulator::{
    generate_environment, run_experiment, EnvironmentConfig, ExperimentConfig, RiskStrategy, Suite,
};
use crate::timeline::{chunk_window, select_nearby, DEFAULT_MIN_LCH};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_INFEASIBLE: i32 = 3;
pub const EXIT_SUITE: i32 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "energy-compose",
    version,
    about = "Reliability-aware composition of crowdsourced wireless energy services"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic environment (services.csv, queries.csv, env-summary.json).
    Generate(GenerateArgs),
    /// Compose one query and print the results as JSON.
    Compose(ComposeArgs),
    /// Run an experiment suite and write report.csv, aggregate.csv and summary.json.
    Experiment(ExperimentArgs),
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// JSON environment config; missing fields take defaults.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory, created when missing.
    #[arg(long)]
    pub out: PathBuf,
    /// Overrides the config seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Overrides the number of queries.
    #[arg(long)]
    pub queries: Option<usize>,
    /// Overrides the services-per-query ratio.
    #[arg(long)]
    pub ratio: Option<f64>,
}

/// Compose settings that may come from a JSON file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ComposeFile {
    pub algorithms: Vec<Algorithm>,
    pub w_r: f64,
    pub k: usize,
    pub min_lch: i64,
    pub cap: u128,
    pub agr_variant: AgrVariant,
    pub bins: usize,
}

impl Default for ComposeFile {
    fn default() -> Self {
        ComposeFile {
            algorithms: vec![Algorithm::Brute, Algorithm::Heuristic],
            w_r: 0.5,
            k: DEFAULT_K,
            min_lch: DEFAULT_MIN_LCH,
            cap: DEFAULT_CAP,
            agr_variant: AgrVariant::Mean,
            bins: DEFAULT_BINS,
        }
    }
}

#[derive(Debug, Args)]
pub struct ComposeArgs {
    /// JSON compose settings; flags override.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Services file (CSV, or JSON by extension).
    #[arg(long)]
    pub services: PathBuf,
    /// Queries file, used with --query-id.
    #[arg(long, requires = "query_id")]
    pub queries: Option<PathBuf>,
    /// Query to compose from --queries.
    #[arg(long, requires = "queries")]
    pub query_id: Option<String>,
    /// Inline query as a JSON object in the queries schema.
    #[arg(long, conflicts_with_all = ["queries", "query_id"])]
    pub query_json: Option<String>,
    /// Comma-separated algorithms: brute, heuristic, greedy, knapsack.
    #[arg(long, value_delimiter = ',', value_parser = parse_algorithm)]
    pub algo: Option<Vec<Algorithm>>,
    /// Reliability weight in [0, 1]; the energy weight is 1 - w_r.
    #[arg(long)]
    pub w_r: Option<f64>,
    /// Partials kept per chunk by the heuristic.
    #[arg(long)]
    pub k: Option<usize>,
    /// Minimum chunk length in minutes.
    #[arg(long)]
    pub min_lch: Option<i64>,
    /// Largest search space the exhaustive search will enumerate.
    #[arg(long)]
    pub cap: Option<u128>,
    /// Aggregate reliability formula: mean or normalized.
    #[arg(long, value_parser = parse_from_str::<AgrVariant>)]
    pub agr_variant: Option<AgrVariant>,
    /// Include the chunk layout in the output.
    #[arg(long)]
    pub dump_chunks: bool,
    /// SoC traces (owner_id,time_min,soc) to recompute reliabilities; needs --history.
    #[arg(long, requires = "history")]
    pub soc: Option<PathBuf>,
    /// Provision history (owner_id,ss,tps).
    #[arg(long, requires = "soc")]
    pub history: Option<PathBuf>,
    /// Histogram bins for the entropy score.
    #[arg(long)]
    pub bins: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    /// scalability, efficiency or effectiveness.
    #[arg(value_parser = parse_from_str::<Suite>)]
    pub suite: Suite,
    /// JSON experiment config; flags override.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory, created when missing.
    #[arg(long)]
    pub out: PathBuf,
    /// Number of seeds, starting at the config seed.
    #[arg(long)]
    pub seeds: Option<u64>,
    /// Base seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Failures per area, as `a..b` (inclusive) or a comma list.
    #[arg(long, value_parser = parse_usize_list)]
    pub failures: Option<UsizeList>,
    /// Services-per-query ratios, as `a..b` (inclusive) or a comma list.
    #[arg(long, value_parser = parse_usize_list)]
    pub ratios: Option<UsizeList>,
    /// Reliability weight levels on the 1..9 scale.
    #[arg(long, value_parser = parse_usize_list)]
    pub weights: Option<UsizeList>,
    /// Comma-separated risk strategies.
    #[arg(long, value_delimiter = ',', value_parser = parse_from_str::<RiskStrategy>)]
    pub strategies: Option<Vec<RiskStrategy>>,
    /// Comma-separated algorithms.
    #[arg(long, value_delimiter = ',', value_parser = parse_algorithm)]
    pub algo: Option<Vec<Algorithm>>,
    /// Queries per environment.
    #[arg(long)]
    pub queries: Option<usize>,
    /// Worker threads (0 = all cores).
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Largest search space the exhaustive search will enumerate.
    #[arg(long)]
    pub cap: Option<u128>,
    /// Partials kept per chunk by the heuristic.
    #[arg(long)]
    pub k: Option<usize>,
    /// Exit with code 4 when the share of failed rows exceeds this.
    #[arg(long)]
    pub max_failure_rate: Option<f64>,
}

/// Inclusive range or comma list of non-negative integers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UsizeList(pub Vec<usize>);

fn parse_usize_list(s: &str) -> std::result::Result<UsizeList, String> {
    let num = |t: &str| t.trim().parse::<usize>().map_err(|e| format!("`{t}`: {e}"));
    if let Some((a, b)) = s.split_once("..") {
        let (a, b) = (num(a)?, num(b.trim_start_matches('='))?);
        if a > b {
            return Err(format!("empty range {s}"));
        }
        return Ok(UsizeList((a..=b).collect()));
    }
    s.split(',')
        .map(num)
        .collect::<std::result::Result<_, _>>()
        .map(UsizeList)
}

fn parse_from_str<T: std::str::FromStr<Err = Error>>(s: &str) -> std::result::Result<T, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_algorithm(s: &str) -> std::result::Result<Algorithm, String> {
    parse_from_str(s)
}

fn read_json<T: DeserializeOwned + Default>(path: Option<&Path>) -> Result<T> {
    let Some(path) = path else {
        return Ok(T::default());
    };
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text)
        .map_err(|e| Error::config(path.display().to_string(), e.to_string()))
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let text = serde_json::to_string_pretty(value)? + "\n";
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config { .. }
        | Error::InvalidField { .. }
        | Error::EmptyInterval { .. }
        | Error::Io { .. }
        | Error::Csv(_)
        | Error::Json(_) => EXIT_CONFIG,
        Error::NoFeasibleComposition { .. } => EXIT_INFEASIBLE,
        _ => EXIT_FAILURE,
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let outcome = match cli.command {
        Command::Generate(a) => cmd_generate(&a),
        Command::Compose(a) => cmd_compose(&a),
        Command::Experiment(a) => cmd_experiment(&a),
    };
    outcome.unwrap_or_else(|e| {
        eprintln!("error: {e}");
        exit_code(&e)
    })
}

pub fn cmd_generate(args: &GenerateArgs) -> Result<i32> {
    let mut cfg: EnvironmentConfig = read_json(args.config.as_deref())?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(n) = args.queries {
        cfg.num_queries = n;
    }
    if let Some(r) = args.ratio {
        cfg.ratio_services_per_query = r;
    }
    let env = generate_environment(&cfg)?;
    std::fs::create_dir_all(&args.out).map_err(|e| Error::io(&args.out, e))?;
    io::write_services(args.out.join("services.csv"), &env.services)?;
    io::write_queries(args.out.join("queries.csv"), &env.queries)?;
    let summary = json!({
        "services": env.services.len(),
        "queries": env.queries.len(),
        "areas": cfg.num_areas,
        "seed": cfg.seed,
        "config": cfg,
    });
    write_json(&args.out.join("env-summary.json"), &summary)?;
    println!(
        "wrote {} services and {} queries to {}",
        env.services.len(),
        env.queries.len(),
        args.out.display()
    );
    Ok(EXIT_OK)
}

fn load_query(args: &ComposeArgs) -> Result<EnergyQuery> {
    if let Some(text) = &args.query_json {
        let raw: QueryRecord =
            serde_json::from_str(text).map_err(|e| Error::config("query-json", e.to_string()))?;
        return validate_query(raw);
    }
    let (Some(path), Some(id)) = (&args.queries, &args.query_id) else {
        return Err(Error::config(
            "query",
            "pass --query-json or --queries with --query-id",
        ));
    };
    io::read_queries(path)?
        .into_iter()
        .find(|q| q.query_id() == id)
        .ok_or_else(|| Error::config("query-id", format!("no query `{id}` in {}", path.display())))
}

pub fn cmd_compose(args: &ComposeArgs) -> Result<i32> {
    let mut file: ComposeFile = read_json(args.config.as_deref())?;
    if let Some(a) = &args.algo {
        file.algorithms = a.clone();
    }
    file.w_r = args.w_r.unwrap_or(file.w_r);
    file.k = args.k.unwrap_or(file.k);
    file.min_lch = args.min_lch.unwrap_or(file.min_lch);
    file.cap = args.cap.unwrap_or(file.cap);
    file.agr_variant = args.agr_variant.unwrap_or(file.agr_variant);
    file.bins = args.bins.unwrap_or(file.bins);
    if file.algorithms.is_empty() {
        return Err(Error::config("algo", "at least one algorithm is required"));
    }
    if file.k == 0 {
        return Err(Error::config("k", "must be at least 1"));
    }
    if file.bins < 2 {
        return Err(Error::config("bins", "must be at least 2"));
    }
    let cfg = ComposeConfig {
        strategy: PreferenceStrategy::from_reliability_weight(file.w_r)
            .map_err(|e| Error::config("w-r", e.to_string()))?,
        k: file.k,
        min_lch: file.min_lch,
        cap: file.cap,
        agr_variant: file.agr_variant,
    };

    let mut services = io::read_services(&args.services)?;
    if let (Some(soc), Some(history)) = (&args.soc, &args.history) {
        let profiles = build_profiles(
            &io::read_soc_series(soc)?,
            &io::read_provision_history(history)?,
            file.bins,
        )?;
        services = apply_profiles(&services, &profiles)?;
    }
    let q = load_query(args)?;

    let mut results = Vec::new();
    let mut code = EXIT_OK;
    for &algorithm in &file.algorithms {
        match compose(algorithm, &services, &q, &cfg) {
            Ok(r) => results.push(serde_json::to_value(&r)?),
            Err(e) => {
                eprintln!("{algorithm}: {e}");
                let c = exit_code(&e);
                code = code.max(c);
                let nearest = match &e {
                    Error::NoFeasibleComposition { nearest_miss, .. } => {
                        serde_json::to_value(nearest_miss)?
                    }
                    _ => serde_json::Value::Null,
                };
                results.push(json!({
                    "algorithm": algorithm,
                    "query_id": q.query_id(),
                    "error": e.to_string(),
                    "nearest_miss": nearest,
                }));
            }
        }
    }
    let mut out = json!({ "query_id": q.query_id(), "results": results });
    if args.dump_chunks {
        let tl = chunk_window(&select_nearby(&services, &q), &q, cfg.min_lch);
        out["chunks"] = tl.to_json();
    }
    emit(&serde_json::to_string_pretty(&out)?)?;
    Ok(code)
}

/// Writes to stdout; a closed pipe (`| head`) is not an error.
fn emit(text: &str) -> Result<()> {
    use std::io::Write;
    match writeln!(std::io::stdout().lock(), "{text}") {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(Error::io("<stdout>", e)),
        _ => Ok(()),
    }
}

pub fn cmd_experiment(args: &ExperimentArgs) -> Result<i32> {
    let mut cfg: ExperimentConfig = read_json(args.config.as_deref())?;
    if let Some(n) = args.seeds {
        cfg.seeds = n;
    }
    if let Some(s) = args.seed {
        cfg.env.seed = s;
    }
    if let Some(UsizeList(f)) = &args.failures {
        cfg.failures = f.clone();
    }
    if let Some(UsizeList(r)) = &args.ratios {
        cfg.ratios = r.iter().map(|&x| x as f64).collect();
    }
    if let Some(UsizeList(w)) = &args.weights {
        cfg.weights = w
            .iter()
            .map(|&x| {
                u8::try_from(x).map_err(|_| Error::config("weights", format!("{x} outside 1..=9")))
            })
            .collect::<Result<_>>()?;
    }
    if let Some(s) = &args.strategies {
        cfg.strategies = s.clone();
    }
    if let Some(a) = &args.algo {
        cfg.algorithms = a.clone();
    }
    if let Some(n) = args.queries {
        cfg.env.num_queries = n;
    }
    if let Some(j) = args.jobs {
        cfg.jobs = j;
    }
    if let Some(c) = args.cap {
        cfg.cap = c;
    }
    if let Some(k) = args.k {
        cfg.k = k;
    }
    if let Some(m) = args.max_failure_rate {
        cfg.max_failure_rate = m;
    }

    let report = run_experiment(args.suite, &cfg)?;
    report.write(&args.out)?;
    print_aggregates(&report.aggregates);
    let rate = report.summary.failure_rate;
    if rate > cfg.max_failure_rate {
        eprintln!(
            "error: {} of {} rows failed ({:.1}%), above the {:.1}% threshold",
            report.summary.failed_rows,
            report.summary.rows,
            rate * 100.0,
            cfg.max_failure_rate * 100.0
        );
        return Ok(EXIT_SUITE);
    }
    Ok(EXIT_OK)
}

fn print_aggregates(rows: &[crate::simulator::AggregateRow]) {
    let opt = |v: Option<f64>| v.map_or_else(|| "-".to_owned(), |x| format!("{x:.3}"));
    println!(
        "{:<8} {:>5} {:>5} {:<13} {:>4} {:<10} {:>6} {:>6} {:>9} {:>8} {:>7} {:>12}",
        "regime",
        "ratio",
        "w_r",
        "strategy",
        "fail",
        "algorithm",
        "rows",
        "failed",
        "ext_q",
        "front",
        "exer",
        "mean_cpu_us"
    );
    for r in rows {
        println!(
            "{:<8} {:>5} {:>5} {:<13} {:>4} {:<10} {:>6} {:>6} {:>9} {:>8} {:>7} {:>12.1}",
            r.regime.as_deref().unwrap_or("-"),
            r.ratio.map_or_else(|| "-".to_owned(), |x| x.to_string()),
            r.w_r.map_or_else(|| "-".to_owned(), |x| format!("{x:.1}")),
            r.strategy.as_deref().unwrap_or("-"),
            r.failures.map_or_else(|| "-".to_owned(), |x| x.to_string()),
            r.algorithm,
            r.queries,
            r.failed,
            opt(r.mean_ext_q),
            opt(r.mean_front_size),
            opt(r.exer_ratio),
            r.mean_cpu_us
        );
    }
}

//! Scalability, efficiency and effectiveness suites.
//!
//! Every suite is deterministic per seed: environments come from the seeded
//! generator, per-query randomness from `(seed, query index)` streams, and
//! rows are emitted in a fixed order whatever the thread count. Only the
//! `*_us` columns carry wall-clock measurements.

use std::collections::HashMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::assessment::AgrVariant;
use crate::composer::{
    compose, Algorithm, ComposeConfig, CompositionResult, DEFAULT_CAP, DEFAULT_K,
};
use crate::error::{Error, Result};
use crate::model::{EnergyQuery, EnergyService, PreferenceStrategy};
use crate::simulator::env::{generate_environment, EnvironmentConfig};
use crate::simulator::failure::{FailureOrder, DEFAULT_EPSILON};
use crate::simulator::replay::{effective_extension, ReplacementPolicy};
use crate::simulator::stream_rng;
use crate::timeline::DEFAULT_MIN_LCH;

const STRATEGY_STREAM_BASE: u64 = 1 << 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Scalability,
    Efficiency,
    Effectiveness,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::Scalability => "scalability",
            Suite::Efficiency => "efficiency",
            Suite::Effectiveness => "effectiveness",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [Suite::Scalability, Suite::Efficiency, Suite::Effectiveness]
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::config("suite", format!("unknown suite `{s}`")))
    }
}

/// Consumer attitude towards failures: a band of reliability weights on the 1..=9 scale.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RiskStrategy {
    RiskTaker,
    RiskNeutral,
    RiskAverse,
}

impl RiskStrategy {
    pub const ALL: [RiskStrategy; 3] = [
        RiskStrategy::RiskTaker,
        RiskStrategy::RiskNeutral,
        RiskStrategy::RiskAverse,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RiskStrategy::RiskTaker => "risk-taker",
            RiskStrategy::RiskNeutral => "risk-neutral",
            RiskStrategy::RiskAverse => "risk-averse",
        }
    }

    pub fn levels(self) -> std::ops::RangeInclusive<u8> {
        match self {
            RiskStrategy::RiskTaker => 1..=3,
            RiskStrategy::RiskNeutral => 4..=6,
            RiskStrategy::RiskAverse => 7..=9,
        }
    }

    pub fn sample(self, rng: &mut impl Rng) -> PreferenceStrategy {
        let level = rng.random_range(self.levels());
        PreferenceStrategy::from_scale(level).expect("band levels are on the scale")
    }
}

impl FromStr for RiskStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        RiskStrategy::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::config("strategies", format!("unknown strategy `{s}`")))
    }
}

/// Service-duration regimes of the scalability sweep.
const REGIMES: [(&str, Option<(i64, i64)>); 3] = [
    ("short", Some((10, 30))),
    ("long", Some((20, 50))),
    ("all", None),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub env: EnvironmentConfig,
    pub algorithms: Vec<Algorithm>,
    /// Number of seeds; seed `i` is `env.seed + i`.
    pub seeds: u64,
    pub k: usize,
    pub min_lch: i64,
    pub cap: u128,
    pub agr_variant: AgrVariant,
    pub ratios: Vec<f64>,
    pub weights: Vec<u8>,
    pub failures: Vec<usize>,
    pub strategies: Vec<RiskStrategy>,
    pub epsilon: f64,
    pub replacement: ReplacementPolicy,
    /// Worker threads; 0 lets the runtime decide.
    pub jobs: usize,
    pub max_failure_rate: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            env: EnvironmentConfig::default(),
            algorithms: Algorithm::ALL.to_vec(),
            seeds: 1,
            k: DEFAULT_K,
            min_lch: DEFAULT_MIN_LCH,
            cap: DEFAULT_CAP,
            agr_variant: AgrVariant::Mean,
            ratios: (1..=9).map(f64::from).collect(),
            weights: (1..=9).collect(),
            failures: (0..=10).collect(),
            strategies: RiskStrategy::ALL.to_vec(),
            epsilon: DEFAULT_EPSILON,
            replacement: ReplacementPolicy::BestAvailable,
            jobs: 0,
            max_failure_rate: 0.5,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.env.validate()?;
        if self.algorithms.is_empty() {
            return Err(Error::config(
                "algorithms",
                "at least one algorithm is required",
            ));
        }
        if self.seeds == 0 {
            return Err(Error::config("seeds", "must be at least 1"));
        }
        if self.k == 0 {
            return Err(Error::config("k", "must be at least 1"));
        }
        if self.min_lch < 0 {
            return Err(Error::config("min_lch", "must be non-negative"));
        }
        if let Some(w) = self.weights.iter().find(|w| !(1..=9).contains(*w)) {
            return Err(Error::config("weights", format!("{w} outside 1..=9")));
        }
        if let Some(r) = self.ratios.iter().find(|r| !(**r >= 1.0)) {
            return Err(Error::config("ratios", format!("{r} must be at least 1")));
        }
        if !(0.0..=1.0).contains(&self.max_failure_rate) {
            return Err(Error::config("max_failure_rate", "must lie in [0, 1]"));
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::config("epsilon", "must be positive"));
        }
        Ok(())
    }

    fn compose_config(&self, strategy: PreferenceStrategy) -> ComposeConfig {
        ComposeConfig {
            strategy,
            k: self.k,
            min_lch: self.min_lch,
            cap: self.cap,
            agr_variant: self.agr_variant,
        }
    }

    fn seed_values(&self) -> impl Iterator<Item = u64> + '_ {
        (0..self.seeds).map(|i| self.env.seed.wrapping_add(i))
    }
}

/// One query × algorithm (× strategy × failure count) outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub suite: String,
    pub seed: u64,
    pub regime: Option<String>,
    pub ratio: Option<f64>,
    pub strategy: Option<String>,
    pub w_r: f64,
    pub failures: Option<usize>,
    pub query_id: String,
    pub algorithm: Algorithm,
    pub status: String,
    pub chunks: Option<usize>,
    pub candidates: Option<u64>,
    pub front_size: Option<usize>,
    pub tec: Option<f64>,
    pub agr: Option<f64>,
    pub ext_q: Option<f64>,
    pub eff_q: Option<f64>,
    pub budget: i64,
    pub exer: Option<bool>,
    pub cpu_us: f64,
}

impl ReportRow {
    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub suite: String,
    pub regime: Option<String>,
    pub ratio: Option<f64>,
    pub w_r: Option<f64>,
    pub strategy: Option<String>,
    pub failures: Option<usize>,
    pub algorithm: Algorithm,
    pub queries: usize,
    pub failed: usize,
    pub mean_ext_q: Option<f64>,
    pub mean_front_size: Option<f64>,
    pub mean_candidates: Option<f64>,
    pub exer_ratio: Option<f64>,
    pub mean_cpu_us: f64,
    pub total_cpu_us: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub suite: Suite,
    pub seeds: Vec<u64>,
    pub rows: usize,
    pub failed_rows: usize,
    pub failure_rate: f64,
    pub aggregates: Vec<AggregateRow>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub suite: Suite,
    pub rows: Vec<ReportRow>,
    pub aggregates: Vec<AggregateRow>,
    pub summary: Summary,
}

impl ExperimentReport {
    /// Writes `report.csv`, `aggregate.csv` and `summary.json` into `dir`.
    pub fn write(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        crate::io::write_records(dir.join("report.csv"), &self.rows)?;
        crate::io::write_records(dir.join("aggregate.csv"), &self.aggregates)?;
        let path = dir.join("summary.json");
        let text = serde_json::to_string_pretty(&self.summary)? + "\n";
        std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
        Ok(())
    }
}

/// Expected extension within the budget while the actual one overruns it.
pub fn exer_flag(ext_q: f64, eff_q: f64, budget: i64) -> bool {
    let budget = budget as f64;
    ext_q <= budget && eff_q > budget
}

/// Share of rows flagged with an extension estimation error. Rows without a
/// composition count as not flagged.
pub fn exer_ratio(rows: &[ReportRow]) -> Result<f64> {
    if rows.is_empty() {
        return Err(Error::UndefinedMetric("EXER ratio of an empty row set"));
    }
    let flagged = rows.iter().filter(|r| r.exer == Some(true)).count();
    Ok(flagged as f64 / rows.len() as f64)
}

struct Outcome {
    result: Result<CompositionResult>,
    cpu_us: f64,
}

fn run_one(
    algorithm: Algorithm,
    services: &[EnergyService],
    q: &EnergyQuery,
    cfg: &ComposeConfig,
) -> Outcome {
    let started = Instant::now();
    let result = compose(algorithm, services, q, cfg);
    let cpu_us = match &result {
        Ok(r) => r.elapsed.as_secs_f64() * 1e6,
        Err(_) => started.elapsed().as_secs_f64() * 1e6,
    };
    Outcome { result, cpu_us }
}

/// Services grouped by area. Composition and replay only look at the query's
/// area, so handing them the area's slice gives the same results with less scanning.
struct AreaIndex(HashMap<String, Vec<EnergyService>>);

impl AreaIndex {
    fn new(services: &[EnergyService]) -> Self {
        let mut map: HashMap<String, Vec<EnergyService>> = HashMap::new();
        for s in services {
            map.entry(s.area_id().to_owned())
                .or_default()
                .push(s.clone());
        }
        AreaIndex(map)
    }

    fn of(&self, q: &EnergyQuery) -> &[EnergyService] {
        self.0.get(q.area_id()).map_or(&[], Vec::as_slice)
    }
}

fn status_of(err: &Error) -> &'static str {
    match err {
        Error::NoFeasibleComposition { .. } => "infeasible",
        Error::SearchSpaceOverflow { .. } => "overflow",
        _ => "error",
    }
}

struct RowContext<'a> {
    suite: Suite,
    seed: u64,
    regime: Option<&'a str>,
    ratio: Option<f64>,
    strategy: Option<RiskStrategy>,
}

fn base_row(
    ctx: &RowContext<'_>,
    q: &EnergyQuery,
    algorithm: Algorithm,
    w_r: f64,
    out: &Outcome,
) -> ReportRow {
    let mut row = ReportRow {
        suite: ctx.suite.name().to_owned(),
        seed: ctx.seed,
        regime: ctx.regime.map(str::to_owned),
        ratio: ctx.ratio,
        strategy: ctx.strategy.map(|s| s.name().to_owned()),
        w_r,
        failures: None,
        query_id: q.query_id().to_owned(),
        algorithm,
        status: "ok".to_owned(),
        chunks: None,
        candidates: None,
        front_size: None,
        tec: None,
        agr: None,
        ext_q: None,
        eff_q: None,
        budget: q.extension_budget(),
        exer: None,
        cpu_us: out.cpu_us,
    };
    match &out.result {
        Ok(r) => {
            row.chunks = Some(r.chunks);
            row.candidates = Some(r.candidates_examined);
            row.front_size = r.front.as_ref().map(Vec::len);
            row.tec = Some(r.selected.tec);
            row.agr = Some(r.selected.agr);
            row.ext_q = Some(r.selected.ext_q);
        }
        Err(e) => row.status = status_of(e).to_owned(),
    }
    row
}

fn with_pool<T: Send>(jobs: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::config("jobs", e.to_string()))?;
    Ok(pool.install(f))
}

pub fn run_experiment(suite: Suite, cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let rows = with_pool(cfg.jobs, || match suite {
        Suite::Scalability => scalability_rows(cfg),
        Suite::Efficiency => efficiency_rows(cfg),
        Suite::Effectiveness => effectiveness_rows(cfg),
    })??;
    let aggregates = match suite {
        Suite::Scalability => aggregate_scalability(cfg, &rows),
        Suite::Efficiency => aggregate_efficiency(cfg, &rows),
        Suite::Effectiveness => aggregate_effectiveness(cfg, &rows),
    };
    let failed_rows = rows.iter().filter(|r| !r.is_ok()).count();
    let summary = Summary {
        suite,
        seeds: cfg.seed_values().collect(),
        rows: rows.len(),
        failed_rows,
        failure_rate: if rows.is_empty() {
            0.0
        } else {
            failed_rows as f64 / rows.len() as f64
        },
        aggregates: aggregates.clone(),
    };
    Ok(ExperimentReport {
        suite,
        rows,
        aggregates,
        summary,
    })
}

fn scalability_rows(cfg: &ExperimentConfig) -> Result<Vec<ReportRow>> {
    let compose_cfg = cfg.compose_config(PreferenceStrategy::neutral());
    let mut rows = Vec::new();
    for (regime, durations) in REGIMES {
        for &ratio in &cfg.ratios {
            for seed in cfg.seed_values() {
                let env_cfg = EnvironmentConfig {
                    ratio_services_per_query: ratio,
                    service_duration: durations.unwrap_or(cfg.env.service_duration),
                    seed,
                    ..cfg.env.clone()
                };
                let env = generate_environment(&env_cfg)?;
                let areas = AreaIndex::new(&env.services);
                let ctx = RowContext {
                    suite: Suite::Scalability,
                    seed,
                    regime: Some(regime),
                    ratio: Some(ratio),
                    strategy: None,
                };
                let per_query: Vec<Vec<ReportRow>> = env
                    .queries
                    .par_iter()
                    .map(|q| {
                        cfg.algorithms
                            .iter()
                            .map(|&a| {
                                let out = run_one(a, areas.of(q), q, &compose_cfg);
                                base_row(&ctx, q, a, compose_cfg.strategy.w_r(), &out)
                            })
                            .collect()
                    })
                    .collect();
                rows.extend(per_query.into_iter().flatten());
            }
        }
    }
    Ok(rows)
}

fn efficiency_rows(cfg: &ExperimentConfig) -> Result<Vec<ReportRow>> {
    let mut rows = Vec::new();
    for seed in cfg.seed_values() {
        let env = generate_environment(&EnvironmentConfig {
            seed,
            ..cfg.env.clone()
        })?;
        let areas = AreaIndex::new(&env.services);
        let ctx = RowContext {
            suite: Suite::Efficiency,
            seed,
            regime: None,
            ratio: Some(cfg.env.ratio_services_per_query),
            strategy: None,
        };
        for &level in &cfg.weights {
            let compose_cfg = cfg.compose_config(PreferenceStrategy::from_scale(level)?);
            let per_query: Vec<Vec<ReportRow>> = env
                .queries
                .par_iter()
                .map(|q| {
                    cfg.algorithms
                        .iter()
                        .map(|&a| {
                            let out = run_one(a, areas.of(q), q, &compose_cfg);
                            base_row(&ctx, q, a, compose_cfg.strategy.w_r(), &out)
                        })
                        .collect()
                })
                .collect();
            rows.extend(per_query.into_iter().flatten());
        }
    }
    Ok(rows)
}

fn effectiveness_rows(cfg: &ExperimentConfig) -> Result<Vec<ReportRow>> {
    let mut rows = Vec::new();
    for seed in cfg.seed_values() {
        let env = generate_environment(&EnvironmentConfig {
            seed,
            ..cfg.env.clone()
        })?;
        let areas = AreaIndex::new(&env.services);
        let order = FailureOrder::new(&env.services, cfg.epsilon, seed);
        let scenarios: Vec<_> = cfg.failures.iter().map(|&c| order.scenario(c)).collect();
        for (si, &strategy) in cfg.strategies.iter().enumerate() {
            let ctx = RowContext {
                suite: Suite::Effectiveness,
                seed,
                regime: None,
                ratio: Some(cfg.env.ratio_services_per_query),
                strategy: Some(strategy),
            };
            let per_query: Vec<Vec<ReportRow>> = env
                .queries
                .par_iter()
                .enumerate()
                .map(|(j, q)| {
                    let stream = STRATEGY_STREAM_BASE
                        + (j as u64) * RiskStrategy::ALL.len() as u64
                        + si as u64;
                    let preference = strategy.sample(&mut stream_rng(seed, stream));
                    let compose_cfg = cfg.compose_config(preference);
                    let mut out_rows = Vec::new();
                    for &a in &cfg.algorithms {
                        let out = run_one(a, areas.of(q), q, &compose_cfg);
                        let row = base_row(&ctx, q, a, preference.w_r(), &out);
                        for (sc, &count) in scenarios.iter().zip(&cfg.failures) {
                            let mut r = row.clone();
                            r.failures = Some(count);
                            if let Ok(res) = &out.result {
                                let eff = effective_extension(
                                    &res.selected,
                                    sc,
                                    q,
                                    areas.of(q),
                                    cfg.replacement,
                                );
                                r.eff_q = Some(eff);
                                r.exer =
                                    Some(exer_flag(res.selected.ext_q, eff, q.extension_budget()));
                            }
                            out_rows.push(r);
                        }
                    }
                    out_rows
                })
                .collect();
            rows.extend(per_query.into_iter().flatten());
        }
    }
    Ok(rows)
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

fn aggregate(suite: Suite, group: &[&ReportRow], algorithm: Algorithm, exer: bool) -> AggregateRow {
    let ok = || group.iter().filter(|r| r.is_ok());
    let total_cpu: f64 = group.iter().map(|r| r.cpu_us).sum();
    let owned: Vec<ReportRow> = if exer {
        group.iter().map(|r| (*r).clone()).collect()
    } else {
        Vec::new()
    };
    AggregateRow {
        suite: suite.name().to_owned(),
        regime: None,
        ratio: None,
        w_r: None,
        strategy: None,
        failures: None,
        algorithm,
        queries: group.len(),
        failed: group.len() - ok().count(),
        mean_ext_q: mean(ok().filter_map(|r| r.ext_q)),
        mean_front_size: if algorithm.is_elastic() {
            mean(ok().filter_map(|r| r.front_size.map(|f| f as f64)))
        } else {
            None
        },
        mean_candidates: mean(ok().filter_map(|r| r.candidates.map(|c| c as f64))),
        exer_ratio: if exer { exer_ratio(&owned).ok() } else { None },
        mean_cpu_us: if group.is_empty() {
            0.0
        } else {
            total_cpu / group.len() as f64
        },
        total_cpu_us: total_cpu,
    }
}

fn aggregate_scalability(cfg: &ExperimentConfig, rows: &[ReportRow]) -> Vec<AggregateRow> {
    let mut out = Vec::new();
    for (regime, _) in REGIMES {
        for &ratio in &cfg.ratios {
            for &a in &cfg.algorithms {
                let group: Vec<&ReportRow> = rows
                    .iter()
                    .filter(|r| {
                        r.regime.as_deref() == Some(regime)
                            && r.ratio == Some(ratio)
                            && r.algorithm == a
                    })
                    .collect();
                let mut agg = aggregate(Suite::Scalability, &group, a, false);
                agg.regime = Some(regime.to_owned());
                agg.ratio = Some(ratio);
                out.push(agg);
            }
        }
    }
    out
}

fn aggregate_efficiency(cfg: &ExperimentConfig, rows: &[ReportRow]) -> Vec<AggregateRow> {
    let mut out = Vec::new();
    for &level in &cfg.weights {
        let w_r = f64::from(level) / 10.0;
        for &a in &cfg.algorithms {
            let group: Vec<&ReportRow> = rows
                .iter()
                .filter(|r| r.w_r == w_r && r.algorithm == a)
                .collect();
            let mut agg = aggregate(Suite::Efficiency, &group, a, false);
            agg.w_r = Some(w_r);
            agg.ratio = Some(cfg.env.ratio_services_per_query);
            out.push(agg);
        }
    }
    out
}

fn aggregate_effectiveness(cfg: &ExperimentConfig, rows: &[ReportRow]) -> Vec<AggregateRow> {
    let mut out = Vec::new();
    for &count in &cfg.failures {
        for &strategy in &cfg.strategies {
            for &a in &cfg.algorithms {
                let group: Vec<&ReportRow> = rows
                    .iter()
                    .filter(|r| {
                        r.failures == Some(count)
                            && r.strategy.as_deref() == Some(strategy.name())
                            && r.algorithm == a
                    })
                    .collect();
                let mut agg = aggregate(Suite::Effectiveness, &group, a, true);
                agg.failures = Some(count);
                agg.strategy = Some(strategy.name().to_owned());
                out.push(agg);
            }
        }
    }
    out
}

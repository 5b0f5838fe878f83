//! Acceptance checks, one line per criterion. Runs without the libtest
//! harness so the verdicts are always printed; exits non-zero on any failure.

mod common;

use std::collections::BTreeMap;
use std::panic::{self, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use energy_compose::assessment::{assess, AgrVariant, ExtensionPool};
use energy_compose::composer::{
    compose, compose_brute, compose_heuristic, enumerate_all, reduce_space, Algorithm,
    ComposeConfig,
};
use energy_compose::model::{EnergyQuery, EnergyService, PartialService, PreferenceStrategy};
use energy_compose::simulator::{
    generate_environment, run_experiment, EnvironmentConfig, ExperimentConfig, ReportRow,
    RiskStrategy, Suite,
};
use energy_compose::timeline::{chunk_window, merge_chunks_by_max, select_nearby, DEFAULT_MIN_LCH};

use common::*;

type Verdict = Result<String, String>;
type Criterion = (&'static str, fn() -> Verdict);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn timeline(
    services: &[EnergyService],
    q: &EnergyQuery,
) -> energy_compose::timeline::ChunkedTimeline {
    chunk_window(&select_nearby(services, q), q, DEFAULT_MIN_LCH)
}

fn combination_counting() -> Verdict {
    let (services, q) = fig3();
    let started = Instant::now();
    let tl = timeline(&services, &q);
    let counts = tl.partial_counts();
    ensure(counts == [2, 3, 4, 3, 2, 3, 2], || {
        format!("per-chunk counts {counts:?}")
    })?;
    let n = enumerate_all(&tl, 10_000_000)
        .map_err(|e| e.to_string())?
        .count();
    let elapsed = started.elapsed();
    ensure(n == 864, || format!("enumerated {n}"))?;
    ensure(elapsed < Duration::from_secs(1), || {
        format!("took {elapsed:?}")
    })?;
    Ok(format!(
        "864 candidates in {:.1} ms",
        elapsed.as_secs_f64() * 1e3
    ))
}

fn heuristic_reduction() -> Verdict {
    let (services, q) = six_chunk();
    let tl = timeline(&services, &q);
    let counts = tl.partial_counts();
    ensure(counts.len() == 6 && counts.iter().all(|&c| c >= 4), || {
        format!("raw counts {counts:?}")
    })?;
    let all = tl.combination_count();
    let merged = merge_chunks_by_max(&tl);
    let space = reduce_space(&tl, &PreferenceStrategy::neutral(), 3);
    let prom = space.combination_count();
    ensure(merged.chunks.len() == 4, || {
        format!("{} merged chunks", merged.chunks.len())
    })?;
    ensure(all == 4096 && prom == 81, || {
        format!("|AllComp| {all}, |PromComp| {prom}")
    })?;
    Ok(format!("|AllComp| {all} -> |PromComp| {prom}"))
}

fn assessment_oracle() -> Verdict {
    let (services, q) = s1();
    let a = &services[0];
    let b = &services[1];
    let partials = [
        PartialService::of(a, 0, 0, 10),
        PartialService::of(b, 1, 10, 30),
    ];
    let pool = ExtensionPool::for_query(&services, &q);
    let got = assess(&partials, &q, &pool, AgrVariant::Mean).map_err(|e| e.to_string())?;

    // hand evaluation: A gives 10 min at 300 mA, B 20 min at 600 mA
    let dec_a = 10.0 / 60.0 * 300.0;
    let dec_b = 20.0 / 60.0 * 600.0;
    let tec = dec_a + dec_b;
    let agr = 0.5 * (dec_a / tec * (10.0 / 30.0) * 0.9 + dec_b / tec * (20.0 / 30.0) * 0.5);
    let rem = 200.0 - tec * agr;
    let ext = rem / 300.0 * 60.0;
    let close = |x: f64, y: f64| ((x - y) / y).abs() <= 1e-6;
    for (name, g, want) in [
        ("TEC", got.tec, tec),
        ("AgR", got.agr, agr),
        ("RemRE", got.rem_re, rem),
        ("ExtQ", got.ext_q, ext),
    ] {
        ensure(close(g, want), || format!("{name} {g} vs {want}"))?;
    }
    ensure(
        (tec - 250.0).abs() < 1e-9 && (agr - 0.163333).abs() < 1e-6 && (ext - 31.83).abs() < 0.01,
        || format!("hand values drifted: {tec} {agr} {ext}"),
    )?;
    Ok(format!(
        "TEC {:.2}, AgR {:.5}, RemRE {:.2}, ExtQ {:.2}",
        got.tec, got.agr, got.rem_re, got.ext_q
    ))
}

/// A random single-area instance whose search space holds at most `limit` compositions.
fn random_instance(rng: &mut ChaCha8Rng, limit: u128) -> (Vec<EnergyService>, EnergyQuery) {
    loop {
        let du = rng.random_range(10..=60);
        let q = EnergyQuery::new(
            "r",
            0,
            "a",
            rng.random_range(100.0..600.0),
            2000.0,
            du,
            du + rng.random_range(0..=du),
        )
        .unwrap();
        let n = rng.random_range(1..=7);
        let mut services: Vec<EnergyService> = (0..n)
            .map(|i| {
                let st = rng.random_range(-20..du);
                let et = (st + rng.random_range(5..=60)).max(1);
                svc(
                    &format!("s{i}"),
                    st,
                    et,
                    rng.random_range(50.0..1500.0),
                    rng.random_range(0.0..1.0),
                )
            })
            .collect();
        // replacements live after the soft deadline
        for i in 0..rng.random_range(0..3) {
            services.push(svc(
                &format!("x{i}"),
                du,
                3 * du,
                rng.random_range(100.0..1500.0),
                0.5,
            ));
        }
        if timeline(&services, &q).combination_count() <= limit {
            return (services, q);
        }
    }
}

fn pareto_correctness() -> Verdict {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let cfg = ComposeConfig::default();
    let mut fronts = 0;
    let mut infeasible = 0;
    for instance in 0..100 {
        let (services, q) = random_instance(&mut rng, 5000);
        let tl = timeline(&services, &q);
        let pool = ExtensionPool::for_query(&services, &q);

        let feasible = oracle_feasible(&tl, &full_options(&tl), &q, &pool);
        let mut want: Vec<Vec<String>> = oracle_front(&feasible)
            .iter()
            .map(|c| labels(&tl, &c.choice))
            .collect();
        want.sort();
        match compose_brute(&tl, &q, &pool, &cfg) {
            Ok(r) => {
                let mut got: Vec<Vec<String>> = r
                    .front
                    .unwrap()
                    .iter()
                    .map(|c| {
                        c.partials
                            .iter()
                            .map(|p| p.parent_label().to_owned())
                            .collect()
                    })
                    .collect();
                got.sort();
                ensure(got == want, || {
                    format!("instance {instance}: brute {got:?} vs oracle {want:?}")
                })?;
                fronts += 1;
            }
            Err(_) => {
                ensure(want.is_empty(), || {
                    format!("instance {instance}: brute failed, oracle front {want:?}")
                })?;
                infeasible += 1;
            }
        }

        let space = reduce_space(&tl, &cfg.strategy, cfg.k);
        let prom = oracle_feasible(&space.timeline, &space.kept, &q, &pool);
        if let Ok(r) = compose_heuristic(&tl, &q, &pool, &cfg) {
            for member in r.front.unwrap() {
                let beaten = prom.iter().any(|c| {
                    let s = &c.scores;
                    s.agr >= member.agr
                        && s.ext_q <= member.ext_q
                        && (s.agr > member.agr || s.ext_q < member.ext_q)
                });
                ensure(!beaten, || {
                    format!("instance {instance}: heuristic member dominated")
                })?;
            }
        } else {
            ensure(prom.is_empty(), || {
                format!("instance {instance}: heuristic failed with feasible PromComp")
            })?;
        }
    }
    let elapsed = started.elapsed();
    ensure(elapsed < Duration::from_secs(60), || {
        format!("took {elapsed:?}")
    })?;
    Ok(format!(
        "100 instances ({fronts} fronts, {infeasible} infeasible) match the pairwise oracle in {:.1} s",
        elapsed.as_secs_f64()
    ))
}

/// Front sizes of brute force and heuristic on the queries where both succeed.
fn front_sizes(env_cfg: &EnvironmentConfig, cfg: &ComposeConfig) -> (Vec<f64>, Vec<f64>) {
    let env = generate_environment(env_cfg).unwrap();
    let mut brute = Vec::new();
    let mut heur = Vec::new();
    for q in &env.queries {
        let b = compose(Algorithm::Brute, &env.services, q, cfg);
        let h = compose(Algorithm::Heuristic, &env.services, q, cfg);
        if let (Ok(b), Ok(h)) = (b, h) {
            brute.push(b.front_len() as f64);
            heur.push(h.front_len() as f64);
        }
    }
    (brute, heur)
}

fn front_cardinality() -> Verdict {
    let cfg = ComposeConfig {
        cap: 100_000,
        ..ComposeConfig::default()
    };
    let mut line = Vec::new();
    for ratio in 1..=9 {
        let mut brute = Vec::new();
        let mut heur = Vec::new();
        for seed in 0..50 {
            let env_cfg = EnvironmentConfig {
                num_areas: 10,
                num_queries: 20,
                ratio_services_per_query: ratio as f64,
                seed,
                ..EnvironmentConfig::default()
            };
            let (b, h) = front_sizes(&env_cfg, &cfg);
            brute.extend(b);
            heur.extend(h);
        }
        ensure(!brute.is_empty(), || {
            format!("ratio {ratio}: no instance solved by both")
        })?;
        let (mb, mh) = (median(&mut brute), median(&mut heur));
        ensure(mh <= mb, || {
            format!("ratio {ratio}: heuristic median {mh} > brute median {mb}")
        })?;
        line.push(format!("{ratio}:{mh}/{mb}"));
    }
    Ok(format!(
        "median |front| heuristic/brute per ratio {}",
        line.join(" ")
    ))
}

type Pair<'a> = (Option<&'a ReportRow>, Option<&'a ReportRow>);

fn paired_ok(rows: &[ReportRow]) -> Vec<(&ReportRow, &ReportRow)> {
    let mut by_key: BTreeMap<(u64, String, String), Pair> = BTreeMap::new();
    for r in rows.iter().filter(|r| r.is_ok()) {
        let e = by_key
            .entry((r.seed, format!("{:.1}", r.w_r), r.query_id.clone()))
            .or_default();
        match r.algorithm {
            Algorithm::Brute => e.0 = Some(r),
            Algorithm::Heuristic => e.1 = Some(r),
            _ => {}
        }
    }
    by_key
        .into_values()
        .filter_map(|(b, h)| Some((b?, h?)))
        .collect()
}

fn extension_agreement() -> Verdict {
    let cfg = ExperimentConfig {
        env: EnvironmentConfig {
            num_areas: 20,
            num_queries: 40,
            ..EnvironmentConfig::default()
        },
        algorithms: vec![Algorithm::Brute, Algorithm::Heuristic],
        seeds: 50,
        cap: 200_000,
        ..ExperimentConfig::default()
    };
    let report = run_experiment(Suite::Efficiency, &cfg).map_err(|e| e.to_string())?;
    let pairs = paired_ok(&report.rows);
    let mut worst: f64 = 0.0;
    let mut line = Vec::new();
    let mut prev = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    for level in 1..=9u8 {
        let w = f64::from(level) / 10.0;
        let at: Vec<_> = pairs
            .iter()
            .filter(|(b, _)| (b.w_r - w).abs() < 1e-9)
            .collect();
        ensure(!at.is_empty(), || format!("w_r {w}: no paired rows"))?;
        let n = at.len() as f64;
        let mb = at.iter().map(|(b, _)| b.ext_q.unwrap()).sum::<f64>() / n;
        let mh = at.iter().map(|(_, h)| h.ext_q.unwrap()).sum::<f64>() / n;
        let gap = (mh - mb).abs() / mb;
        worst = worst.max(gap);
        ensure(gap <= 0.15, || {
            format!(
                "w_r {w}: heuristic {mh:.3} vs brute {mb:.3} ({:.1}%)",
                gap * 100.0
            )
        })?;
        ensure(mb >= prev.0 - 1e-9 && mh >= prev.1 - 1e-9, || {
            format!(
                "w_r {w}: mean ExtQ decreased ({:.4},{:.4}) -> ({mb:.4},{mh:.4})",
                prev.0, prev.1
            )
        })?;
        prev = (mb, mh);
        line.push(format!("{w}:{mh:.2}/{mb:.2}"));
    }
    Ok(format!(
        "{} paired selections, worst gap {:.1}%, mean ExtQ heuristic/brute {}",
        pairs.len(),
        worst * 100.0,
        line.join(" ")
    ))
}

fn exer_effectiveness() -> Verdict {
    let started = Instant::now();
    let cfg = ExperimentConfig {
        env: EnvironmentConfig {
            num_areas: 20,
            num_queries: 100,
            ..EnvironmentConfig::default()
        },
        seeds: 20,
        cap: 1_000_000,
        ..ExperimentConfig::default()
    };
    let report = run_experiment(Suite::Effectiveness, &cfg).map_err(|e| e.to_string())?;
    let exer = |strategy: RiskStrategy, algo: Algorithm, failures: usize| -> f64 {
        report
            .aggregates
            .iter()
            .find(|a| {
                a.strategy.as_deref() == Some(strategy.name())
                    && a.algorithm == algo
                    && a.failures == Some(failures)
            })
            .and_then(|a| a.exer_ratio)
            .unwrap()
    };
    let mut max_gap: f64 = 0.0;
    for strategy in RiskStrategy::ALL {
        for algo in Algorithm::ALL {
            ensure(exer(strategy, algo, 0) == 0.0, || {
                format!("{} {algo}: EXER at 0 failures", strategy.name())
            })?;
            for f in 1..=10 {
                ensure(
                    exer(strategy, algo, f) >= exer(strategy, algo, f - 1),
                    || format!("{} {algo}: EXER drops at {f} failures", strategy.name()),
                )?;
            }
        }
        for f in 0..=10 {
            let gap = (exer(strategy, Algorithm::Heuristic, f)
                - exer(strategy, Algorithm::Brute, f))
            .abs();
            max_gap = max_gap.max(gap);
            ensure(gap <= 0.05, || {
                format!(
                    "{} at {f} failures: heuristic/brute gap {gap:.3}",
                    strategy.name()
                )
            })?;
        }
    }
    for algo in [Algorithm::Brute, Algorithm::Heuristic] {
        for f in 5..=10 {
            let (averse, taker) = (
                exer(RiskStrategy::RiskAverse, algo, f),
                exer(RiskStrategy::RiskTaker, algo, f),
            );
            ensure(averse <= taker, || {
                format!("{algo} at {f} failures: risk-averse {averse:.3} > risk-taker {taker:.3}")
            })?;
        }
    }
    let elapsed = started.elapsed();
    ensure(elapsed < Duration::from_secs(600), || {
        format!("took {elapsed:?}")
    })?;
    Ok(format!(
        "EXER at 10 failures brute {:.3} heuristic {:.3}; max heuristic/brute gap {max_gap:.3}; {:.1} s",
        exer(RiskStrategy::RiskNeutral, Algorithm::Brute, 10),
        exer(RiskStrategy::RiskNeutral, Algorithm::Heuristic, 10),
        elapsed.as_secs_f64()
    ))
}

/// `p` long services plus one short service per chunk: six chunks of `p + 1` partials.
fn layered(p: usize) -> (Vec<EnergyService>, EnergyQuery) {
    let mut services: Vec<EnergyService> = (0..p)
        .map(|i| {
            svc(
                &format!("L{i}"),
                0,
                60,
                200.0 + 50.0 * i as f64,
                0.2 + 0.1 * i as f64,
            )
        })
        .collect();
    for j in 0..6i64 {
        services.push(svc(&format!("C{j}"), 10 * j, 10 * j + 10, 900.0, 0.5));
    }
    services.push(svc("X", 60, 200, 600.0, 0.5));
    (
        services,
        EnergyQuery::new("layered", 0, "a", 500.0, 2000.0, 60, 120).unwrap(),
    )
}

fn min_time(reps: usize, mut f: impl FnMut()) -> f64 {
    (0..reps)
        .map(|_| {
            let t = Instant::now();
            f();
            t.elapsed().as_secs_f64()
        })
        .fold(f64::INFINITY, f64::min)
}

fn scalability_shape() -> Verdict {
    let cfg = ExperimentConfig {
        env: EnvironmentConfig {
            num_areas: 10,
            num_queries: 100,
            ..EnvironmentConfig::default()
        },
        algorithms: vec![Algorithm::Brute, Algorithm::Heuristic],
        seeds: 3,
        cap: 1_000_000,
        jobs: 1,
        ..ExperimentConfig::default()
    };
    let report = run_experiment(Suite::Scalability, &cfg).map_err(|e| e.to_string())?;
    let mut totals: BTreeMap<(String, u64), (f64, f64)> = BTreeMap::new();
    let row_key = |r: &ReportRow| {
        (
            r.regime.clone().unwrap(),
            r.ratio.unwrap() as u64,
            r.seed,
            r.query_id.clone(),
        )
    };
    let brute_rows: BTreeMap<_, &ReportRow> = report
        .rows
        .iter()
        .filter(|r| r.algorithm == Algorithm::Brute)
        .map(|r| (row_key(r), r))
        .collect();
    for r in report
        .rows
        .iter()
        .filter(|r| r.algorithm == Algorithm::Heuristic)
    {
        let b = brute_rows[&row_key(r)];
        let key = (r.regime.clone().unwrap(), r.ratio.unwrap() as u64);
        if b.status == "overflow" {
            continue;
        }
        let e = totals.entry(key).or_default();
        e.0 += b.cpu_us;
        e.1 += r.cpu_us;
    }
    ensure(totals.len() == 27, || {
        format!("{} regime/ratio points", totals.len())
    })?;
    let mut worst: (f64, String) = (0.0, String::new());
    for ((regime, ratio), (b, h)) in &totals {
        if h / b > worst.0 {
            worst = (h / b, format!("{regime} ratio {ratio}"));
        }
        ensure(h < b, || {
            format!("{regime} ratio {ratio}: heuristic {h:.0} us >= brute {b:.0} us")
        })?;
    }

    let cfg = ComposeConfig {
        cap: u128::MAX,
        ..ComposeConfig::default()
    };
    let mut times = Vec::new();
    for p in 1..=5 {
        let (services, q) = layered(p);
        let tl = timeline(&services, &q);
        let counts = tl.partial_counts();
        ensure(counts == vec![p + 1; 6], || {
            format!("layered({p}) counts {counts:?}")
        })?;
        let pool = ExtensionPool::for_query(&services, &q);
        let reps = if p <= 3 { 15 } else { 3 };
        times.push(min_time(reps, || {
            compose_brute(&tl, &q, &pool, &cfg).unwrap();
        }));
    }
    for w in times.windows(2) {
        ensure(w[1] > w[0], || {
            format!("brute time not increasing: {times:?}")
        })?;
    }
    // partial counts go from 2 to 6; linear growth would be a factor of 3
    let growth = times[4] / times[0];
    ensure(growth > 9.0, || {
        format!("brute time grew only {growth:.1}x from 2 to 6 partials per chunk")
    })?;
    Ok(format!(
        "heuristic faster at all 27 points (closest {:.2} at {}); brute grows {growth:.0}x from 2 to 6 partials per chunk",
        worst.0, worst.1
    ))
}

/// Drops CSV columns ending in `_us` and JSON keys ending in `_us` or `_ms`.
fn strip_timing(path: &Path) -> String {
    let text = std::fs::read_to_string(path).unwrap();
    if path.extension().is_some_and(|e| e == "csv") {
        let mut reader = csv::Reader::from_reader(text.as_bytes());
        let headers = reader.headers().unwrap().clone();
        let keep: Vec<usize> = (0..headers.len())
            .filter(|&i| !headers[i].ends_with("_us"))
            .collect();
        let mut out = keep
            .iter()
            .map(|&i| &headers[i])
            .collect::<Vec<_>>()
            .join(",");
        for rec in reader.records() {
            let rec = rec.unwrap();
            out.push('\n');
            out.push_str(&keep.iter().map(|&i| &rec[i]).collect::<Vec<_>>().join(","));
        }
        out
    } else {
        strip_json(&text)
    }
}

fn strip_json(text: &str) -> String {
    fn walk(v: &mut serde_json::Value) {
        match v {
            serde_json::Value::Object(map) => {
                map.retain(|k, _| !k.ends_with("_us") && !k.ends_with("_ms"));
                map.values_mut().for_each(walk);
            }
            serde_json::Value::Array(items) => items.iter_mut().for_each(walk),
            _ => {}
        }
    }
    let mut v: serde_json::Value = serde_json::from_str(text).unwrap();
    walk(&mut v);
    v.to_string()
}

fn run_cli(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_energy-compose"))
        .args(args)
        .output()
        .unwrap();
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8(out.stdout).unwrap(),
    )
}

fn determinism() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let d = |name: &str| dir.path().join(name).display().to_string();
    let mut compared = 0;
    for run in ["a", "b"] {
        let (code, _) = run_cli(&[
            "generate",
            "--out",
            &d(&format!("gen-{run}")),
            "--queries",
            "30",
            "--seed",
            "7",
        ]);
        ensure(code == 0, || format!("generate exited {code}"))?;
        for suite in ["scalability", "efficiency", "effectiveness"] {
            let (code, _) = run_cli(&[
                "experiment",
                suite,
                "--out",
                &d(&format!("{suite}-{run}")),
                "--queries",
                "12",
                "--seeds",
                "2",
                "--ratios",
                "1..3",
                "--weights",
                "1,5,9",
                "--failures",
                "0..4",
                "--cap",
                "100000",
                "--max-failure-rate",
                "1",
            ]);
            ensure(code == 0, || format!("experiment {suite} exited {code}"))?;
        }
    }
    let services = d("gen-a/services.csv");
    let queries = d("gen-a/queries.csv");
    let q_id = "q000003";
    let compose_args = [
        "compose",
        "--services",
        &services,
        "--queries",
        &queries,
        "--query-id",
        q_id,
        "--algo",
        "brute,heuristic,greedy,knapsack",
        "--dump-chunks",
    ];
    let (c1, o1) = run_cli(&compose_args);
    let (c2, o2) = run_cli(&compose_args);
    ensure(c1 == c2 && strip_json(&o1) == strip_json(&o2), || {
        "compose output differs between runs".into()
    })?;
    compared += 1;

    let mut files = vec!["services.csv", "queries.csv", "env-summary.json"]
        .into_iter()
        .map(|f| (format!("gen-a/{f}"), format!("gen-b/{f}")))
        .collect::<Vec<_>>();
    for suite in ["scalability", "efficiency", "effectiveness"] {
        for f in ["report.csv", "aggregate.csv", "summary.json"] {
            files.push((format!("{suite}-a/{f}"), format!("{suite}-b/{f}")));
        }
    }
    for (a, b) in &files {
        let (x, y) = (
            strip_timing(&dir.path().join(a)),
            strip_timing(&dir.path().join(b)),
        );
        ensure(x == y, || format!("{a} differs from {b}"))?;
        compared += 1;
    }
    Ok(format!("{compared} outputs identical across repeated runs"))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("combination counting", combination_counting),
        ("heuristic reduction", heuristic_reduction),
        ("assessment oracle", assessment_oracle),
        ("pareto correctness", pareto_correctness),
        ("front cardinality trend", front_cardinality),
        ("extension-estimate agreement", extension_agreement),
        (
            "EXER monotonicity and strategy ordering",
            exer_effectiveness,
        ),
        ("scalability shape", scalability_shape),
        ("determinism", determinism),
    ];
    let filter: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let started = Instant::now();
        let verdict = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            Err(e
                .downcast_ref::<String>()
                .cloned()
                .unwrap_or_else(|| "panicked".into()))
        });
        let secs = started.elapsed().as_secs_f64();
        match verdict {
            Ok(detail) => println!("criterion {} {name}: PASS ({detail}) [{secs:.1}s]", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {} {name}: FAIL ({why}) [{secs:.1}s]", i + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}

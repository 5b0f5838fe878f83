//! Candidate enumeration, Pareto selection and the four composition algorithms.

mod heuristic;
pub mod pareto;

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize, Serializer};

use crate::assessment::{AgrVariant, Assessment, ExtensionPool, PartialTerms, TermSums};
use crate::error::{Error, Result};
use crate::model::{CompositeService, EnergyQuery, EnergyService, PreferenceStrategy};
use crate::timeline::{chunk_window, into_merged, select_nearby, ChunkedTimeline};

pub use heuristic::{partial_utilities, reduce_owned, reduce_space, top_k_partials, ReducedSpace};
pub use pareto::{dominates, non_dominated, FrontBuilder, Objectives};

pub const DEFAULT_K: usize = 3;
pub const DEFAULT_CAP: u128 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Brute,
    Heuristic,
    Greedy,
    Knapsack,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [
        Algorithm::Brute,
        Algorithm::Heuristic,
        Algorithm::Greedy,
        Algorithm::Knapsack,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Brute => "brute",
            Algorithm::Heuristic => "heuristic",
            Algorithm::Greedy => "greedy",
            Algorithm::Knapsack => "knapsack",
        }
    }

    /// Elastic algorithms build a Pareto front and honour the deadline constraints.
    pub fn is_elastic(self) -> bool {
        matches!(self, Algorithm::Brute | Algorithm::Heuristic)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| {
                Error::config(
                    "algo",
                    format!(
                        "unknown algorithm `{s}` (expected brute, heuristic, greedy or knapsack)"
                    ),
                )
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComposeConfig {
    pub strategy: PreferenceStrategy,
    pub k: usize,
    pub min_lch: i64,
    pub cap: u128,
    pub agr_variant: AgrVariant,
}

impl Default for ComposeConfig {
    fn default() -> Self {
        ComposeConfig {
            strategy: PreferenceStrategy::neutral(),
            k: DEFAULT_K,
            min_lch: crate::timeline::DEFAULT_MIN_LCH,
            cap: DEFAULT_CAP,
            agr_variant: AgrVariant::Mean,
        }
    }
}

/// A candidate in index form: `choice[i]` picks a partial of chunk `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct AssessedComposite {
    pub choice: Vec<usize>,
    pub scores: Assessment,
}

impl Objectives for AssessedComposite {
    fn agr(&self) -> f64 {
        self.scores.agr
    }
    fn ext_q(&self) -> f64 {
        self.scores.ext_q
    }
}

/// Odometer over every one-option-per-slot combination.
#[derive(Debug, Clone)]
pub struct CombinationIter {
    counts: Vec<usize>,
    next: Option<Vec<usize>>,
}

impl CombinationIter {
    pub fn new(counts: Vec<usize>) -> Self {
        let next = if counts.iter().all(|&c| c > 0) {
            Some(vec![0; counts.len()])
        } else {
            None
        };
        CombinationIter { counts, next }
    }
}

fn advance(choice: &mut [usize], counts: &[usize]) -> bool {
    for i in (0..choice.len()).rev() {
        choice[i] += 1;
        if choice[i] < counts[i] {
            return true;
        }
        choice[i] = 0;
    }
    false
}

impl Iterator for CombinationIter {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let current = self.next.take()?;
        let mut following = current.clone();
        if advance(&mut following, &self.counts) {
            self.next = Some(following);
        }
        Some(current)
    }
}

fn check_cap(count: u128, cap: u128) -> Result<()> {
    if count > cap {
        return Err(Error::SearchSpaceOverflow { count, cap });
    }
    Ok(())
}

/// Lazily yields every composition of the timeline; fails when `|AllComp|` exceeds `cap`.
pub fn enumerate_all(tl: &ChunkedTimeline, cap: u128) -> Result<CombinationIter> {
    check_cap(tl.combination_count(), cap)?;
    Ok(CombinationIter::new(tl.partial_counts()))
}

pub fn assess_choice(
    tl: &ChunkedTimeline,
    choice: &[usize],
    q: &EnergyQuery,
    pool: &ExtensionPool,
    variant: AgrVariant,
) -> Result<AssessedComposite> {
    let terms: Vec<PartialTerms> = choice
        .iter()
        .enumerate()
        .map(|(c, &i)| PartialTerms::of(&tl.partials_by_chunk[c][i]))
        .collect();
    let scores = Assessment::from_sums(&TermSums::from_terms(&terms), q, pool, variant)?;
    Ok(AssessedComposite {
        choice: choice.to_vec(),
        scores,
    })
}

fn meets_deadline(scores: &Assessment, q: &EnergyQuery) -> bool {
    scores.ext_q <= q.extension_budget() as f64
}

fn meets_energy(scores: &Assessment, q: &EnergyQuery) -> bool {
    scores.tec >= q.required_energy()
}

/// Nearest miss among infeasible candidates: smallest ExtQ, then largest TEC.
fn closer_miss(a: &Assessment, b: &Assessment) -> bool {
    a.ext_q < b.ext_q || (a.ext_q == b.ext_q && a.tec > b.tec)
}

/// Keeps candidates within the extension budget; of those, keeps the ones
/// meeting the energy requirement when at least one does.
pub fn apply_constraints(
    cands: Vec<AssessedComposite>,
    q: &EnergyQuery,
    tl: &ChunkedTimeline,
) -> Result<Vec<AssessedComposite>> {
    let nearest = cands
        .iter()
        .reduce(|best, c| {
            if closer_miss(&c.scores, &best.scores) {
                c
            } else {
                best
            }
        })
        .map(|c| Box::new(materialize(tl, c, f64::NAN)));
    let within: Vec<AssessedComposite> = cands
        .into_iter()
        .filter(|c| meets_deadline(&c.scores, q))
        .collect();
    if within.is_empty() {
        return Err(Error::NoFeasibleComposition {
            query_id: q.query_id().to_owned(),
            nearest_miss: nearest,
        });
    }
    if within.iter().any(|c| meets_energy(&c.scores, q)) {
        Ok(within
            .into_iter()
            .filter(|c| meets_energy(&c.scores, q))
            .collect())
    } else {
        Ok(within)
    }
}

fn cmp_parent_ids(tl: &ChunkedTimeline, a: &[usize], b: &[usize]) -> Ordering {
    a.iter()
        .zip(b)
        .enumerate()
        .map(|(c, (&i, &j))| {
            let chunk = &tl.partials_by_chunk[c];
            chunk[i].parent_label().cmp(chunk[j].parent_label())
        })
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

/// ExtQ ascending, AgR descending, then parent ids lexicographically.
fn front_order(tl: &ChunkedTimeline, a: &AssessedComposite, b: &AssessedComposite) -> Ordering {
    a.scores
        .ext_q
        .total_cmp(&b.scores.ext_q)
        .then_with(|| b.scores.agr.total_cmp(&a.scores.agr))
        .then_with(|| cmp_parent_ids(tl, &a.choice, &b.choice))
}

fn sort_front(tl: &ChunkedTimeline, front: &mut [AssessedComposite]) {
    front.sort_by(|a, b| front_order(tl, a, b));
}

/// Non-dominated subset of `cands` in deterministic order.
pub fn pareto_front(cands: &[AssessedComposite], tl: &ChunkedTimeline) -> Vec<AssessedComposite> {
    let mut front: Vec<AssessedComposite> = non_dominated(cands)
        .into_iter()
        .map(|i| cands[i].clone())
        .collect();
    sort_front(tl, &mut front);
    front
}

fn tec_range(cohort: &[Assessment]) -> (f64, f64) {
    cohort
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), a| {
            (lo.min(a.tec), hi.max(a.tec))
        })
}

fn utility_in_range(
    scores: &Assessment,
    strategy: &PreferenceStrategy,
    (lo, hi): (f64, f64),
) -> f64 {
    let norm = if hi > lo {
        (scores.tec - lo) / (hi - lo)
    } else {
        1.0
    };
    strategy.w_e() * norm + strategy.w_r() * scores.agr
}

/// `w_e * norm(TEC) + w_r * AgR`, TEC min-max normalized over `cohort`.
pub fn utility(scores: &Assessment, strategy: &PreferenceStrategy, cohort: &[Assessment]) -> f64 {
    utility_in_range(scores, strategy, tec_range(cohort))
}

/// Utilities of the front members (the normalization cohort) and the index of
/// the best one. The front must already be in `front_order`, so the first
/// maximum also wins every tie-break.
fn select(front: &[AssessedComposite], strategy: &PreferenceStrategy) -> (usize, Vec<f64>) {
    let cohort: Vec<Assessment> = front.iter().map(|c| c.scores).collect();
    let range = tec_range(&cohort);
    let utilities: Vec<f64> = cohort
        .iter()
        .map(|s| utility_in_range(s, strategy, range))
        .collect();
    let best = utilities.iter().enumerate().fold(
        0,
        |best, (i, &u)| if u > utilities[best] { i } else { best },
    );
    (best, utilities)
}

pub fn materialize(
    tl: &ChunkedTimeline,
    cand: &AssessedComposite,
    utility: f64,
) -> CompositeService {
    CompositeService {
        partials: cand
            .choice
            .iter()
            .enumerate()
            .map(|(c, &i)| tl.partials_by_chunk[c][i].clone())
            .collect(),
        tec: cand.scores.tec,
        agr: cand.scores.agr,
        rem_re: cand.scores.rem_re,
        ext_q: cand.scores.ext_q,
        utility,
    }
}

fn serialize_ms<S: Serializer>(d: &Duration, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_f64(d.as_secs_f64() * 1e3)
}

#[derive(Debug, Clone, Serialize)]
pub struct CompositionResult {
    pub algorithm: Algorithm,
    pub query_id: String,
    pub w_r: f64,
    pub selected: CompositeService,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub front: Option<Vec<CompositeService>>,
    pub chunks: usize,
    pub candidates_examined: u64,
    #[serde(rename = "elapsed_ms", serialize_with = "serialize_ms")]
    pub elapsed: Duration,
}

impl CompositionResult {
    pub fn front_len(&self) -> usize {
        self.front.as_ref().map_or(0, Vec::len)
    }
}

/// Exhaustive search over the combinations of `options` (partial indices per
/// chunk of `tl`): constraints, then the Pareto front, streamed so memory
/// stays proportional to the front.
fn search(
    tl: &ChunkedTimeline,
    options: &[Vec<usize>],
    q: &EnergyQuery,
    pool: &ExtensionPool,
    cfg: &ComposeConfig,
) -> Result<(Vec<AssessedComposite>, u64)> {
    let counts: Vec<usize> = options.iter().map(Vec::len).collect();
    let total = counts
        .iter()
        .fold(1u128, |acc, &c| acc.saturating_mul(c as u128));
    check_cap(total, cfg.cap)?;

    let terms: Vec<Vec<PartialTerms>> = options
        .iter()
        .enumerate()
        .map(|(c, opts)| {
            opts.iter()
                .map(|&i| PartialTerms::of(&tl.partials_by_chunk[c][i]))
                .collect()
        })
        .collect();

    let mut energy_ok: FrontBuilder<AssessedComposite> = FrontBuilder::new();
    let mut energy_short: FrontBuilder<AssessedComposite> = FrontBuilder::new();
    let mut nearest: Option<AssessedComposite> = None;
    let mut examined = 0u64;
    let mut pick = vec![0usize; counts.len()];
    let to_choice = |pick: &[usize]| -> Vec<usize> {
        pick.iter()
            .enumerate()
            .map(|(c, &o)| options[c][o])
            .collect()
    };

    loop {
        examined += 1;
        let mut sums = TermSums::default();
        for (c, &o) in pick.iter().enumerate() {
            sums.add(&terms[c][o]);
        }
        if let Ok(scores) = Assessment::from_sums(&sums, q, pool, cfg.agr_variant) {
            if !meets_deadline(&scores, q) {
                if nearest
                    .as_ref()
                    .is_none_or(|n| closer_miss(&scores, &n.scores))
                {
                    nearest = Some(AssessedComposite {
                        choice: to_choice(&pick),
                        scores,
                    });
                }
            } else {
                let target = if meets_energy(&scores, q) {
                    &mut energy_ok
                } else {
                    &mut energy_short
                };
                if !target.rejects(&scores) {
                    target.insert(AssessedComposite {
                        choice: to_choice(&pick),
                        scores,
                    });
                }
            }
        }
        if !advance(&mut pick, &counts) {
            break;
        }
    }

    let mut front = if energy_ok.is_empty() {
        energy_short.into_members()
    } else {
        energy_ok.into_members()
    };
    if front.is_empty() {
        return Err(Error::NoFeasibleComposition {
            query_id: q.query_id().to_owned(),
            nearest_miss: nearest.map(|n| Box::new(materialize(tl, &n, f64::NAN))),
        });
    }
    sort_front(tl, &mut front);
    Ok((front, examined))
}

fn elastic_result(
    algorithm: Algorithm,
    tl: &ChunkedTimeline,
    front: Vec<AssessedComposite>,
    examined: u64,
    cfg: &ComposeConfig,
    started: Instant,
) -> CompositionResult {
    let (best, utilities) = select(&front, &cfg.strategy);
    let members: Vec<CompositeService> = front
        .iter()
        .zip(&utilities)
        .map(|(c, &u)| materialize(tl, c, u))
        .collect();
    CompositionResult {
        algorithm,
        query_id: tl.query_id.clone(),
        w_r: cfg.strategy.w_r(),
        selected: members[best].clone(),
        front: Some(members),
        chunks: tl.chunks.len(),
        candidates_examined: examined,
        elapsed: started.elapsed(),
    }
}

/// Exact front over every composition of the timeline.
pub fn compose_brute(
    tl: &ChunkedTimeline,
    q: &EnergyQuery,
    pool: &ExtensionPool,
    cfg: &ComposeConfig,
) -> Result<CompositionResult> {
    let started = Instant::now();
    let options: Vec<Vec<usize>> = tl
        .partial_counts()
        .into_iter()
        .map(|n| (0..n).collect())
        .collect();
    let (front, examined) = search(tl, &options, q, pool, cfg)?;
    Ok(elastic_result(
        Algorithm::Brute,
        tl,
        front,
        examined,
        cfg,
        started,
    ))
}

/// Front over the reduced space: merged chunks, top-k partials per chunk.
pub fn compose_heuristic(
    tl: &ChunkedTimeline,
    q: &EnergyQuery,
    pool: &ExtensionPool,
    cfg: &ComposeConfig,
) -> Result<CompositionResult> {
    heuristic_on(
        reduce_space(tl, &cfg.strategy, cfg.k),
        q,
        pool,
        cfg,
        Instant::now(),
    )
}

fn heuristic_on(
    space: ReducedSpace,
    q: &EnergyQuery,
    pool: &ExtensionPool,
    cfg: &ComposeConfig,
    started: Instant,
) -> Result<CompositionResult> {
    let (front, examined) = search(&space.timeline, &space.kept, q, pool, cfg)?;
    Ok(elastic_result(
        Algorithm::Heuristic,
        &space.timeline,
        front,
        examined,
        cfg,
        started,
    ))
}

/// Index of the maximum-energy partial of every chunk; ties go to the smallest id.
pub fn max_energy_choice(tl: &ChunkedTimeline) -> Vec<usize> {
    tl.partials_by_chunk
        .iter()
        .map(|partials| {
            (0..partials.len())
                .reduce(|best, i| {
                    let (p, b) = (&partials[i], &partials[best]);
                    if p.dec > b.dec || (p.dec == b.dec && p.parent_label() < b.parent_label()) {
                        i
                    } else {
                        best
                    }
                })
                .unwrap_or(0)
        })
        .collect()
}

fn single_choice_result(
    algorithm: Algorithm,
    tl: &ChunkedTimeline,
    q: &EnergyQuery,
    pool: &ExtensionPool,
    cfg: &ComposeConfig,
    started: Instant,
) -> CompositionResult {
    let choice = max_energy_choice(tl);
    let scores = match assess_choice(tl, &choice, q, pool, cfg.agr_variant) {
        Ok(c) => c.scores,
        // nothing to collect: no reliability to aggregate
        Err(_) => {
            let rem = q.required_energy();
            Assessment {
                tec: 0.0,
                agr: 0.0,
                rem_re: rem,
                ext_q: crate::assessment::ext_q(rem, q, pool),
            }
        }
    };
    let cand = AssessedComposite { choice, scores };
    let u = utility(&scores, &cfg.strategy, &[scores]);
    CompositionResult {
        algorithm,
        query_id: tl.query_id.clone(),
        w_r: cfg.strategy.w_r(),
        selected: materialize(tl, &cand, u),
        front: None,
        chunks: tl.chunks.len(),
        candidates_examined: 1,
        elapsed: started.elapsed(),
    }
}

/// Per chunk, the partial with the most deliverable energy.
pub fn compose_greedy(
    tl: &ChunkedTimeline,
    q: &EnergyQuery,
    pool: &ExtensionPool,
    cfg: &ComposeConfig,
) -> CompositionResult {
    single_choice_result(Algorithm::Greedy, tl, q, pool, cfg, Instant::now())
}

/// Same rule as greedy, tagged separately; run on the unmerged timeline.
pub fn compose_knapsack(
    tl: &ChunkedTimeline,
    q: &EnergyQuery,
    pool: &ExtensionPool,
    cfg: &ComposeConfig,
) -> CompositionResult {
    single_choice_result(Algorithm::Knapsack, tl, q, pool, cfg, Instant::now())
}

/// Full pipeline for one query: nearby selection, chunking, composition.
/// Greedy runs on the max-merged timeline, knapsack on the raw chunking.
/// `elapsed` covers the whole pipeline.
pub fn compose(
    algorithm: Algorithm,
    services: &[EnergyService],
    q: &EnergyQuery,
    cfg: &ComposeConfig,
) -> Result<CompositionResult> {
    let started = Instant::now();
    let nearby = select_nearby(services, q);
    let tl = chunk_window(&nearby, q, cfg.min_lch);
    let pool = ExtensionPool::for_query(services, q);
    let mut result = match algorithm {
        Algorithm::Brute => compose_brute(&tl, q, &pool, cfg)?,
        Algorithm::Heuristic => heuristic_on(
            reduce_owned(tl, &cfg.strategy, cfg.k),
            q,
            &pool,
            cfg,
            started,
        )?,
        Algorithm::Greedy => compose_greedy(&into_merged(tl), q, &pool, cfg),
        Algorithm::Knapsack => compose_knapsack(&tl, q, &pool, cfg),
    };
    result.elapsed = started.elapsed();
    Ok(result)
}

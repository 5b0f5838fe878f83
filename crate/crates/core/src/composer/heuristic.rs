use crate::composer::pareto::{non_dominated, Objectives};
use crate::model::{PartialService, PreferenceStrategy};
use crate::timeline::{into_merged, ChunkedTimeline};

/// The promising search space: merged chunks and, per chunk, the indices of
/// the partials kept for enumeration.
#[derive(Debug, Clone)]
pub struct ReducedSpace {
    pub timeline: ChunkedTimeline,
    pub kept: Vec<Vec<usize>>,
}

impl ReducedSpace {
    /// `|PromComp|`, saturating.
    pub fn combination_count(&self) -> u128 {
        self.kept
            .iter()
            .fold(1u128, |acc, k| acc.saturating_mul(k.len() as u128))
    }

    pub fn counts(&self) -> Vec<usize> {
        self.kept.iter().map(Vec::len).collect()
    }
}

struct PartialScore {
    dec: f64,
    rel: f64,
}

impl Objectives for PartialScore {
    // both objectives maximized: reuse the (max, min) machinery on (rel, -dec)
    fn agr(&self) -> f64 {
        self.rel
    }
    fn ext_q(&self) -> f64 {
        -self.dec
    }
}

/// Per-partial utility within one chunk, with deliverable energy min-max
/// normalized over the chunk.
pub fn partial_utilities(partials: &[PartialService], strategy: &PreferenceStrategy) -> Vec<f64> {
    let lo = partials.iter().map(|p| p.dec).fold(f64::INFINITY, f64::min);
    let hi = partials
        .iter()
        .map(|p| p.dec)
        .fold(f64::NEG_INFINITY, f64::max);
    partials
        .iter()
        .map(|p| {
            let norm = if hi > lo {
                (p.dec - lo) / (hi - lo)
            } else {
                1.0
            };
            strategy.w_e() * norm + strategy.w_r() * p.reliability
        })
        .collect()
}

/// Indices of the `k` partials kept for a chunk. Partials are ranked by
/// utility; when the non-dominated partials (on energy and reliability) fit
/// within `k` they are all kept and the remaining slots go by rank.
pub fn top_k_partials(
    partials: &[PartialService],
    strategy: &PreferenceStrategy,
    k: usize,
) -> Vec<usize> {
    let k = k.max(1);
    if partials.len() <= k {
        return (0..partials.len()).collect();
    }
    let utilities = partial_utilities(partials, strategy);
    let mut ranked: Vec<usize> = (0..partials.len()).collect();
    ranked.sort_by(|&a, &b| {
        utilities[b]
            .total_cmp(&utilities[a])
            .then_with(|| partials[b].dec.total_cmp(&partials[a].dec))
            .then_with(|| partials[a].parent_label().cmp(partials[b].parent_label()))
    });

    let scores: Vec<PartialScore> = partials
        .iter()
        .map(|p| PartialScore {
            dec: p.dec,
            rel: p.reliability,
        })
        .collect();
    let front = non_dominated(&scores);

    let mut kept: Vec<usize> = if front.len() <= k {
        let mut kept = front.clone();
        kept.extend(
            ranked
                .iter()
                .copied()
                .filter(|i| !front.contains(i))
                .take(k - front.len()),
        );
        kept
    } else {
        ranked
            .iter()
            .copied()
            .filter(|i| front.contains(i))
            .take(k)
            .collect()
    };
    kept.sort_unstable();
    kept
}

/// Merges chunks sharing a maximum-energy service, then keeps the top `k`
/// partials of every merged chunk.
pub fn reduce_space(tl: &ChunkedTimeline, strategy: &PreferenceStrategy, k: usize) -> ReducedSpace {
    reduce_owned(tl.clone(), strategy, k)
}

/// Owning form of [`reduce_space`].
pub fn reduce_owned(tl: ChunkedTimeline, strategy: &PreferenceStrategy, k: usize) -> ReducedSpace {
    let timeline = into_merged(tl);
    let kept = timeline
        .partials_by_chunk
        .iter()
        .map(|p| top_k_partials(p, strategy, k))
        .collect();
    ReducedSpace { timeline, kept }
}

//! Candidate selection and chunking of a query window at service switch points.

use serde::Serialize;

use crate::model::{deliverable_energy, Chunk, EnergyQuery, EnergyService, PartialService};

pub const DEFAULT_MIN_LCH: i64 = 2;

/// The query window cut into chunks, with the partial services live in each.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChunkedTimeline {
    pub query_id: String,
    pub window: (i64, i64),
    pub chunks: Vec<Chunk>,
    pub partials_by_chunk: Vec<Vec<PartialService>>,
    #[serde(skip)]
    services: Vec<EnergyService>,
}

impl ChunkedTimeline {
    /// Nearby services the chunks were built from.
    pub fn services(&self) -> &[EnergyService] {
        &self.services
    }

    pub fn partial_counts(&self) -> Vec<usize> {
        self.partials_by_chunk.iter().map(Vec::len).collect()
    }

    /// `|AllComp|`: product of per-chunk partial counts, saturating.
    pub fn combination_count(&self) -> u128 {
        self.partials_by_chunk
            .iter()
            .fold(1u128, |acc, p| acc.saturating_mul(p.len() as u128))
    }

    /// Parent of the partial with the largest deliverable energy in chunk `i`;
    /// ties go to the smallest service id. `None` for an idle chunk.
    pub fn max_parent(&self, i: usize) -> Option<&str> {
        max_partial(&self.partials_by_chunk[i]).and_then(|p| p.parent_id.as_deref())
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("timeline serializes")
    }
}

fn max_partial(partials: &[PartialService]) -> Option<&PartialService> {
    partials.iter().reduce(|best, p| {
        if p.dec > best.dec || (p.dec == best.dec && p.parent_label() < best.parent_label()) {
            p
        } else {
            best
        }
    })
}

/// Services in the query's area, within its intensity limit, that overlap the
/// query window. Sorted by start time, then id.
pub fn select_nearby(services: &[EnergyService], q: &EnergyQuery) -> Vec<EnergyService> {
    let (start, end) = (q.t_s(), q.soft_deadline_at());
    let mut nearby: Vec<EnergyService> = services
        .iter()
        .filter(|s| {
            s.area_id() == q.area_id()
                && s.intensity() <= q.max_intensity()
                && s.overlaps(start, end)
        })
        .cloned()
        .collect();
    nearby.sort_by(|a, b| {
        a.start_time()
            .cmp(&b.start_time())
            .then_with(|| a.id().cmp(b.id()))
    });
    nearby
}

fn partials_in(services: &[EnergyService], chunk: &Chunk) -> Vec<PartialService> {
    let partials: Vec<PartialService> = services
        .iter()
        .filter(|s| s.overlaps(chunk.start, chunk.end))
        .map(|s| {
            PartialService::of(
                s,
                chunk.index,
                s.start_time().max(chunk.start),
                s.end_time().min(chunk.end),
            )
        })
        .collect();
    if partials.is_empty() {
        vec![PartialService::idle(chunk)]
    } else {
        partials
    }
}

fn build(
    query_id: &str,
    window: (i64, i64),
    bounds: &[i64],
    services: Vec<EnergyService>,
) -> ChunkedTimeline {
    let chunks: Vec<Chunk> = bounds
        .windows(2)
        .enumerate()
        .map(|(index, w)| Chunk {
            index,
            start: w[0],
            end: w[1],
        })
        .collect();
    let partials_by_chunk = chunks.iter().map(|c| partials_in(&services, c)).collect();
    ChunkedTimeline {
        query_id: query_id.to_owned(),
        window,
        chunks,
        partials_by_chunk,
        services,
    }
}

/// Cuts `[t_s, t_s + du]` at every service start/end inside it. Boundaries
/// closer than `min_lch` to their predecessor are dropped, always keeping the
/// earlier one; the window end is never dropped.
pub fn chunk_window(nearby: &[EnergyService], q: &EnergyQuery, min_lch: i64) -> ChunkedTimeline {
    let (start, end) = (q.t_s(), q.soft_deadline_at());
    let mut interior: Vec<i64> = nearby
        .iter()
        .flat_map(|s| [s.start_time(), s.end_time()])
        .filter(|&t| start < t && t < end)
        .collect();
    interior.sort_unstable();
    interior.dedup();

    let mut bounds = vec![start];
    for t in interior {
        if t - bounds[bounds.len() - 1] >= min_lch {
            bounds.push(t);
        }
    }
    while bounds.len() > 1 && end - bounds[bounds.len() - 1] < min_lch {
        bounds.pop();
    }
    bounds.push(end);

    build(q.query_id(), (start, end), &bounds, nearby.to_vec())
}

/// Parent of the maximum-energy partial over `[start, end]`, computed
/// without materializing partials. Same tie rule as `max_partial`.
fn max_parent_in(services: &[EnergyService], start: i64, end: i64) -> Option<&str> {
    services
        .iter()
        .filter(|s| s.overlaps(start, end))
        .map(|s| {
            let minutes = (s.end_time().min(end) - s.start_time().max(start)) as f64;
            (deliverable_energy(minutes, s.intensity(), s.tsr()), s.id())
        })
        .reduce(|best, c| {
            if c.0 > best.0 || (c.0 == best.0 && c.1 < best.1) {
                c
            } else {
                best
            }
        })
        .map(|(_, id)| id)
}

/// Chunk bounds after merging, or `None` when no neighbours share a
/// maximum-energy parent.
fn merged_bounds(tl: &ChunkedTimeline) -> Option<Vec<i64>> {
    let mut bounds: Vec<i64> = tl.chunks.iter().map(|c| c.start).collect();
    bounds.push(tl.window.1);
    let mut changed = false;
    loop {
        let mut merged = false;
        let mut i = 0;
        // Walk left to right; a merged chunk is re-tested against its new neighbour.
        let mut maxes: Vec<Option<&str>> = bounds
            .windows(2)
            .map(|w| max_parent_in(&tl.services, w[0], w[1]))
            .collect();
        while i + 1 < maxes.len() {
            if maxes[i] == maxes[i + 1] {
                bounds.remove(i + 1);
                maxes.remove(i + 1);
                maxes[i] = max_parent_in(&tl.services, bounds[i], bounds[i + 1]);
                merged = true;
            } else {
                i += 1;
            }
        }
        if !merged {
            return changed.then_some(bounds);
        }
        changed = true;
    }
}

/// Merges consecutive chunks whose maximum-energy partial comes from the same
/// parent, recomputing partials on each merged chunk, until nothing changes.
pub fn merge_chunks_by_max(tl: &ChunkedTimeline) -> ChunkedTimeline {
    match merged_bounds(tl) {
        Some(bounds) => build(&tl.query_id, tl.window, &bounds, tl.services.clone()),
        None => tl.clone(),
    }
}

/// Owning form of [`merge_chunks_by_max`]; avoids copying when nothing merges.
pub fn into_merged(tl: ChunkedTimeline) -> ChunkedTimeline {
    match merged_bounds(&tl) {
        Some(bounds) => build(&tl.query_id, tl.window, &bounds, tl.services),
        None => tl,
    }
}

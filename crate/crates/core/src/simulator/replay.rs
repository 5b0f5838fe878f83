use std::collections::BTreeSet;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{CompositeService, EnergyQuery, EnergyService};
use crate::simulator::failure::FailureScenario;

/// How lost energy is recovered after the soft deadline.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReplacementPolicy {
    /// At every moment draw from the highest-rate live service, switching
    /// whenever a better one appears.
    #[default]
    BestAvailable,
    /// Take services one after another by availability time, then by
    /// advertised energy, each until it ends.
    Sequential,
}

impl FromStr for ReplacementPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "best-available" => Ok(ReplacementPolicy::BestAvailable),
            "sequential" => Ok(ReplacementPolicy::Sequential),
            other => Err(Error::config(
                "replacement",
                format!("unknown policy `{other}` (expected best-available or sequential)"),
            )),
        }
    }
}

/// Energy that has to be replaced: what revoked members would have
/// contributed towards the requirement.
pub fn replacement_deficit(
    selected: &CompositeService,
    scenario: &FailureScenario,
    q: &EnergyQuery,
) -> f64 {
    let lost: f64 = selected
        .partials
        .iter()
        .filter(|p| {
            p.parent_id
                .as_deref()
                .is_some_and(|id| scenario.is_revoked(id))
        })
        .map(|p| p.dec)
        .sum();
    let delivered = selected.tec - lost;
    (q.required_energy().min(selected.tec) - delivered).max(0.0)
}

/// Actual extension past the soft deadline once revoked members are
/// replaced by other live services of the area. Returns the `2 du`
/// sentinel when the deficit cannot be covered by `t_s + 2 du`.
pub fn effective_extension(
    selected: &CompositeService,
    scenario: &FailureScenario,
    q: &EnergyQuery,
    services: &[EnergyService],
    policy: ReplacementPolicy,
) -> f64 {
    let deficit = replacement_deficit(selected, scenario, q);
    if deficit <= 0.0 {
        return 0.0;
    }
    let from = q.soft_deadline_at();
    let until = q.t_s() + q.max_extension();
    let used: BTreeSet<&str> = selected
        .partials
        .iter()
        .filter_map(|p| p.parent_id.as_deref())
        .collect();
    let candidates: Vec<&EnergyService> = services
        .iter()
        .filter(|s| {
            s.area_id() == q.area_id()
                && !scenario.is_revoked(s.id())
                && !used.contains(s.id())
                && s.overlaps(from, until)
                && s.rate_per_minute() > 0.0
        })
        .collect();
    let covered_at = match policy {
        ReplacementPolicy::BestAvailable => best_available(&candidates, from, until, deficit),
        ReplacementPolicy::Sequential => sequential(candidates, from, until, deficit),
    };
    covered_at.map_or(q.max_extension() as f64, |t| t - from as f64)
}

fn best_available(
    candidates: &[&EnergyService],
    from: i64,
    until: i64,
    mut deficit: f64,
) -> Option<f64> {
    let mut cuts: Vec<i64> = candidates
        .iter()
        .flat_map(|s| [s.start_time(), s.end_time()])
        .filter(|&t| from < t && t < until)
        .chain([from, until])
        .collect();
    cuts.sort_unstable();
    cuts.dedup();
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        let rate = candidates
            .iter()
            .filter(|s| s.start_time() <= a && s.end_time() >= b)
            .map(|s| s.rate_per_minute())
            .fold(0.0, f64::max);
        if rate <= 0.0 {
            continue;
        }
        let energy = rate * (b - a) as f64;
        if energy >= deficit {
            return Some(a as f64 + deficit / rate);
        }
        deficit -= energy;
    }
    None
}

fn sequential(
    mut candidates: Vec<&EnergyService>,
    from: i64,
    until: i64,
    mut deficit: f64,
) -> Option<f64> {
    candidates.sort_by(|a, b| {
        a.start_time()
            .max(from)
            .cmp(&b.start_time().max(from))
            .then_with(|| b.dec_advertised().total_cmp(&a.dec_advertised()))
            .then_with(|| a.id().cmp(b.id()))
    });
    let mut cursor = from;
    for s in candidates {
        let begin = cursor.max(s.start_time());
        let end = s.end_time().min(until);
        if end <= begin {
            continue;
        }
        let rate = s.rate_per_minute();
        let energy = rate * (end - begin) as f64;
        if energy >= deficit {
            return Some(begin as f64 + deficit / rate);
        }
        deficit -= energy;
        cursor = end;
    }
    None
}

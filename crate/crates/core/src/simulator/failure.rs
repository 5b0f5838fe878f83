use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use serde::Serialize;

use crate::model::EnergyService;
use crate::simulator::stream_rng;

pub const DEFAULT_EPSILON: f64 = 0.01;

const FAILURE_STREAM: u64 = 3;

/// Revoked services; a revoked service delivers nothing for its whole window.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct FailureScenario {
    pub revoked: BTreeSet<String>,
    pub count_per_area: usize,
}

impl FailureScenario {
    pub fn is_revoked(&self, id: &str) -> bool {
        self.revoked.contains(id)
    }
}

/// Per area, a random ordering of services in which unreliable ones tend to
/// come first: service `i` gets key `u_i^(1/w_i)` with `w_i = 1 - rel_i + epsilon`,
/// sorted descending. Any prefix is a weighted sample without replacement, so
/// scenarios for growing failure counts are nested.
#[derive(Debug, Clone, PartialEq)]
pub struct FailureOrder {
    by_area: BTreeMap<String, Vec<String>>,
}

impl FailureOrder {
    pub fn new(services: &[EnergyService], epsilon: f64, seed: u64) -> Self {
        let mut grouped: BTreeMap<String, Vec<&EnergyService>> = BTreeMap::new();
        for s in services {
            grouped.entry(s.area_id().to_owned()).or_default().push(s);
        }
        let mut rng = stream_rng(seed, FAILURE_STREAM);
        let by_area = grouped
            .into_iter()
            .map(|(area, mut members)| {
                members.sort_by(|a, b| a.id().cmp(b.id()));
                let mut keyed: Vec<(f64, &str)> = members
                    .iter()
                    .map(|s| {
                        let weight = 1.0 - s.reliability() + epsilon;
                        let u: f64 = rng.random();
                        (u.powf(1.0 / weight), s.id())
                    })
                    .collect();
                keyed.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| a.1.cmp(b.1)));
                (
                    area,
                    keyed.into_iter().map(|(_, id)| id.to_owned()).collect(),
                )
            })
            .collect();
        FailureOrder { by_area }
    }

    /// The first `count` services of every area (all of them when an area has fewer).
    pub fn scenario(&self, count: usize) -> FailureScenario {
        FailureScenario {
            revoked: self
                .by_area
                .values()
                .flat_map(|ids| ids.iter().take(count).cloned())
                .collect(),
            count_per_area: count,
        }
    }
}

/// Revokes `count` services per area, biased towards low reliability.
pub fn inject_failures(
    services: &[EnergyService],
    count: usize,
    epsilon: f64,
    seed: u64,
) -> FailureScenario {
    FailureOrder::new(services, epsilon, seed).scenario(count)
}

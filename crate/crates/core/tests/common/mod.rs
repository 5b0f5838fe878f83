//! Fixtures and independent oracles shared by the integration tests.
#![allow(dead_code)]

use energy_compose::assessment::{AgrVariant, ExtensionPool};
use energy_compose::composer::{assess_choice, AssessedComposite};
use energy_compose::model::{EnergyQuery, EnergyService};
use energy_compose::timeline::ChunkedTimeline;

pub fn svc(id: &str, st: i64, et: i64, intensity: f64, rel: f64) -> EnergyService {
    EnergyService::new(id, format!("owner-{id}"), "a", st, et, intensity, 1.0, rel).unwrap()
}

/// A = [0,30] at 300 mA, B = [10,30] at 600 mA, and E = [30,90] at 300 mA
/// as the only service live after the soft deadline.
pub fn s1() -> (Vec<EnergyService>, EnergyQuery) {
    let services = vec![
        svc("A", 0, 30, 300.0, 0.9),
        svc("B", 10, 30, 600.0, 0.5),
        svc("E", 30, 90, 300.0, 0.6),
    ];
    let q = EnergyQuery::new("q1", 0, "a", 200.0, 1000.0, 30, 70).unwrap();
    (services, q)
}

/// Five services over a 30-minute query giving 2,3,4,3,2,3,2 partials per chunk.
pub fn fig3() -> (Vec<EnergyService>, EnergyQuery) {
    let services = vec![
        svc("A", 0, 12, 400.0, 0.8),
        svc("B", 0, 40, 300.0, 0.6),
        svc("C", 4, 17, 500.0, 0.4),
        svc("D", 8, 25, 350.0, 0.7),
        svc("E", 21, 50, 450.0, 0.9),
    ];
    let q = EnergyQuery::new("fig3", 0, "a", 300.0, 1000.0, 30, 60).unwrap();
    (services, q)
}

/// Six 10-minute chunks with four partials each. The strongest partial comes
/// from the long service F1 everywhere except chunks 3 and 6, so merging
/// leaves four chunks: [0,20], [20,30], [30,50], [50,60].
pub fn six_chunk() -> (Vec<EnergyService>, EnergyQuery) {
    let mut services = vec![
        svc("F1", 0, 60, 500.0, 0.5),
        svc("F2", 0, 60, 400.0, 0.7),
        svc("F3", 0, 60, 300.0, 0.9),
    ];
    for j in 0..6i64 {
        let strong = j == 2 || j == 5;
        let intensity = if strong { 900.0 } else { 100.0 };
        services.push(svc(
            &format!("S{}", j + 1),
            10 * j,
            10 * j + 10,
            intensity,
            0.3 + 0.1 * j as f64,
        ));
    }
    let q = EnergyQuery::new("six", 0, "a", 400.0, 1000.0, 60, 90).unwrap();
    (services, q)
}

/// Every composition, by a plain odometer independent of the library's.
pub fn all_choices(counts: &[usize]) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = vec![Vec::new()];
    for &n in counts {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (0..n).map(move |i| {
                    let mut next = prefix.clone();
                    next.push(i);
                    next
                })
            })
            .collect();
    }
    out
}

pub fn oracle_dominates(a: &AssessedComposite, b: &AssessedComposite) -> bool {
    let (x, y) = (&a.scores, &b.scores);
    x.agr >= y.agr && x.ext_q <= y.ext_q && (x.agr > y.agr || x.ext_q < y.ext_q)
}

/// Pairwise O(n^2) front.
pub fn oracle_front(cands: &[AssessedComposite]) -> Vec<AssessedComposite> {
    cands
        .iter()
        .filter(|c| !cands.iter().any(|d| oracle_dominates(d, c)))
        .cloned()
        .collect()
}

/// Scores every composition over `options` and applies the feasibility rules:
/// within the extension budget, and meeting the energy requirement whenever
/// any budget-feasible composition does.
pub fn oracle_feasible(
    tl: &ChunkedTimeline,
    options: &[Vec<usize>],
    q: &EnergyQuery,
    pool: &ExtensionPool,
) -> Vec<AssessedComposite> {
    let counts: Vec<usize> = options.iter().map(Vec::len).collect();
    let within: Vec<AssessedComposite> = all_choices(&counts)
        .into_iter()
        .map(|pick| {
            pick.iter()
                .enumerate()
                .map(|(c, &o)| options[c][o])
                .collect::<Vec<_>>()
        })
        .filter_map(|choice| assess_choice(tl, &choice, q, pool, AgrVariant::Mean).ok())
        .filter(|c| c.scores.ext_q <= q.extension_budget() as f64)
        .collect();
    if within.iter().any(|c| c.scores.tec >= q.required_energy()) {
        within
            .into_iter()
            .filter(|c| c.scores.tec >= q.required_energy())
            .collect()
    } else {
        within
    }
}

pub fn full_options(tl: &ChunkedTimeline) -> Vec<Vec<usize>> {
    tl.partial_counts()
        .into_iter()
        .map(|n| (0..n).collect())
        .collect()
}

/// Parent labels of a composition, one per chunk.
pub fn labels(tl: &ChunkedTimeline, choice: &[usize]) -> Vec<String> {
    choice
        .iter()
        .enumerate()
        .map(|(c, &i)| tl.partials_by_chunk[c][i].parent_label().to_owned())
        .collect()
}

pub fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        (values[n / 2 - 1] + values[n / 2]) / 2.0
    }
}

//! Dominance over (AgR maximized, ExtQ minimized) and non-dominated sets.

use std::cmp::Ordering;

/// Anything scored on the two composition objectives.
pub trait Objectives {
    fn agr(&self) -> f64;
    fn ext_q(&self) -> f64;
}

impl Objectives for crate::assessment::Assessment {
    fn agr(&self) -> f64 {
        self.agr
    }
    fn ext_q(&self) -> f64 {
        self.ext_q
    }
}

impl<T: Objectives> Objectives for &T {
    fn agr(&self) -> f64 {
        (*self).agr()
    }
    fn ext_q(&self) -> f64 {
        (*self).ext_q()
    }
}

/// `a` is at least as good as `b` on both objectives and strictly better on one.
pub fn dominates<A: Objectives, B: Objectives>(a: &A, b: &B) -> bool {
    let (aa, ae, ba, be) = (a.agr(), a.ext_q(), b.agr(), b.ext_q());
    aa >= ba && ae <= be && (aa > ba || ae < be)
}

fn objective_order<T: Objectives>(a: &T, b: &T) -> Ordering {
    a.ext_q()
        .total_cmp(&b.ext_q())
        .then_with(|| b.agr().total_cmp(&a.agr()))
}

/// Indices of the non-dominated items, in input order.
///
/// Sort-and-sweep: after ordering by ExtQ ascending, an item survives iff it
/// has the best AgR of its ExtQ tie group and beats every earlier group.
pub fn non_dominated<T: Objectives>(items: &[T]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..items.len()).collect();
    order.sort_by(|&i, &j| objective_order(&items[i], &items[j]));

    let mut keep = vec![false; items.len()];
    let mut best_prior = f64::NEG_INFINITY;
    let mut g = 0;
    while g < order.len() {
        let ext = items[order[g]].ext_q();
        let mut end = g;
        while end < order.len() && items[order[end]].ext_q() == ext {
            end += 1;
        }
        // order is AgR-descending within the group
        let group_best = items[order[g]].agr();
        if group_best > best_prior {
            for &i in &order[g..end] {
                if items[i].agr() == group_best {
                    keep[i] = true;
                }
            }
            best_prior = group_best;
        }
        g = end;
    }
    (0..items.len()).filter(|&i| keep[i]).collect()
}

/// Incrementally maintained non-dominated set.
#[derive(Debug, Clone)]
pub struct FrontBuilder<T> {
    members: Vec<T>,
}

impl<T> Default for FrontBuilder<T> {
    fn default() -> Self {
        Self {
            members: Vec::new(),
        }
    }
}

impl<T: Objectives> FrontBuilder<T> {
    pub fn new() -> Self {
        Self::default()
    }

    /// Whether an item with these scores would currently be rejected.
    pub fn rejects<O: Objectives>(&self, item: &O) -> bool {
        self.members.iter().any(|m| dominates(m, item))
    }

    /// Inserts `item` unless some member dominates it; evicts members it dominates.
    pub fn insert(&mut self, item: T) -> bool {
        if self.rejects(&item) {
            return false;
        }
        self.members.retain(|m| !dominates(&item, m));
        self.members.push(item);
        true
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn into_members(self) -> Vec<T> {
        self.members
    }
}

//! Scores of a candidate composite: total energy, aggregate reliability,
//! remaining energy and expected extension past the soft deadline.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{deliverable_energy, EnergyQuery, EnergyService, PartialService};

/// How member weights are combined into the aggregate reliability.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AgrVariant {
    /// `(1/m) * sum(dec_i/TEC * du_i/du * rel_i)`.
    #[default]
    Mean,
    /// Same weights, divided by their sum instead of by `m`.
    Normalized,
}

impl std::str::FromStr for AgrVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mean" => Ok(AgrVariant::Mean),
            "normalized" => Ok(AgrVariant::Normalized),
            other => Err(Error::config(
                "agr-variant",
                format!("unknown variant `{other}` (expected mean or normalized)"),
            )),
        }
    }
}

pub fn dec_of_partial(ps: &PartialService) -> f64 {
    deliverable_energy(ps.duration() as f64, ps.intensity, ps.tsr)
}

pub fn tec(partials: &[PartialService]) -> f64 {
    partials.iter().map(dec_of_partial).sum()
}

/// Per-partial terms the aggregate scores are built from; lets candidates be
/// assessed with a handful of additions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PartialTerms {
    pub dec: f64,
    /// `dec * du * rel`
    pub weighted_rel: f64,
    /// `dec * du`
    pub weight: f64,
    pub idle: bool,
}

impl PartialTerms {
    pub fn of(ps: &PartialService) -> Self {
        let dec = dec_of_partial(ps);
        let du = ps.duration() as f64;
        PartialTerms {
            dec,
            weighted_rel: dec * du * ps.reliability,
            weight: dec * du,
            idle: ps.is_idle(),
        }
    }
}

/// Running sums over a composite's members.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct TermSums {
    pub tec: f64,
    pub weighted_rel: f64,
    pub weight: f64,
    pub members: usize,
}

impl TermSums {
    pub fn add(&mut self, t: &PartialTerms) {
        if t.idle {
            return;
        }
        self.tec += t.dec;
        self.weighted_rel += t.weighted_rel;
        self.weight += t.weight;
        self.members += 1;
    }

    pub fn from_terms<'a>(terms: impl IntoIterator<Item = &'a PartialTerms>) -> Self {
        let mut sums = TermSums::default();
        for t in terms {
            sums.add(t);
        }
        sums
    }

    pub fn agr(&self, query_duration: i64, variant: AgrVariant) -> Result<f64> {
        if !(self.tec > 0.0) {
            return Err(Error::UndefinedAggregate);
        }
        let value = match variant {
            AgrVariant::Mean => {
                self.weighted_rel / (self.tec * query_duration as f64 * self.members as f64)
            }
            AgrVariant::Normalized => self.weighted_rel / self.weight,
        };
        Ok(value.clamp(0.0, 1.0))
    }
}

/// Aggregate reliability; idle placeholders are not members.
pub fn agr(partials: &[PartialService], q: &EnergyQuery, variant: AgrVariant) -> Result<f64> {
    let terms: Vec<PartialTerms> = partials.iter().map(PartialTerms::of).collect();
    TermSums::from_terms(&terms).agr(q.duration(), variant)
}

/// Energy still needed after the soft deadline, `max(0, RE - TEC * AgR)`.
pub fn rem_re(tec: f64, agr: f64, q: &EnergyQuery) -> f64 {
    (q.required_energy() - tec * agr).max(0.0)
}

/// Mean intensity and transmission rate of the services live during the
/// extension window `[t_s + du, t_s + 2 du]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExtensionPool {
    pub size: usize,
    pub mean_intensity: f64,
    pub mean_tsr: f64,
}

impl ExtensionPool {
    pub fn for_query(services: &[EnergyService], q: &EnergyQuery) -> Self {
        let start = q.soft_deadline_at();
        let end = start + q.duration();
        let members: Vec<&EnergyService> = services
            .iter()
            .filter(|s| s.area_id() == q.area_id() && s.overlaps(start, end))
            .collect();
        Self::from_members(&members)
    }

    pub fn from_members(members: &[&EnergyService]) -> Self {
        if members.is_empty() {
            return ExtensionPool {
                size: 0,
                mean_intensity: 0.0,
                mean_tsr: 0.0,
            };
        }
        let n = members.len() as f64;
        ExtensionPool {
            size: members.len(),
            mean_intensity: members.iter().map(|s| s.intensity()).sum::<f64>() / n,
            mean_tsr: members.iter().map(|s| s.tsr()).sum::<f64>() / n,
        }
    }

    /// Expected delivery rate in mAh per minute.
    pub fn rate_per_minute(&self) -> f64 {
        self.mean_intensity * self.mean_tsr / 60.0
    }
}

/// Expected extension in minutes to collect `rem_re` from the pool. An empty
/// (or zero-rate) pool yields the `2 du` sentinel.
pub fn ext_q(rem_re: f64, q: &EnergyQuery, pool: &ExtensionPool) -> f64 {
    if rem_re <= 0.0 {
        return 0.0;
    }
    let rate = pool.rate_per_minute();
    if pool.size == 0 || !(rate > 0.0) {
        return q.max_extension() as f64;
    }
    rem_re / rate
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Assessment {
    pub tec: f64,
    pub agr: f64,
    pub rem_re: f64,
    pub ext_q: f64,
}

impl Assessment {
    pub fn from_sums(
        sums: &TermSums,
        q: &EnergyQuery,
        pool: &ExtensionPool,
        variant: AgrVariant,
    ) -> Result<Self> {
        let agr = sums.agr(q.duration(), variant)?;
        let rem = rem_re(sums.tec, agr, q);
        Ok(Assessment {
            tec: sums.tec,
            agr,
            rem_re: rem,
            ext_q: ext_q(rem, q, pool),
        })
    }
}

pub fn assess(
    partials: &[PartialService],
    q: &EnergyQuery,
    pool: &ExtensionPool,
    variant: AgrVariant,
) -> Result<Assessment> {
    let terms: Vec<PartialTerms> = partials.iter().map(PartialTerms::of).collect();
    Assessment::from_sums(&TermSums::from_terms(&terms), q, pool, variant)
}
